// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ellopt/optimality.hpp"

namespace ellopt {

enum class ImproveStatus { converged, max_rounds, cycle, monotonicity_violation };

const char* to_string(ImproveStatus s);

struct ImproveResult {
    ControlField control;
    ImproveStatus status = ImproveStatus::converged;
    int rounds = 0;
    int last_changes = 0;
    double final_violation = 0.0;
    std::vector<double> cost_history;
    ControlField cycle_partner;  // filled when a cycle is detected
};

/// Pointwise control improvement: each round solves state and adjoint for
/// the incumbent, then per element switches to the label with the largest
/// H(v) + max-term(v) score (ties keep the incumbent).  A fixed point
/// satisfies the first-order condition exactly.  Cost is monitored every
/// round; an increase beyond tol_j stops the iteration, as does a revisited
/// control (cycle of period <= 4).
ImproveResult improve_control(const Problem& pb, const ControlField& u0, int max_rounds,
                              const SolverOptions& opts = {}, double tol_j = 1e-9);

}  // namespace ellopt
