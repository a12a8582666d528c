// SPDX-License-Identifier: Apache-2.0
#include "ellopt/improve.hpp"

#include <cmath>
#include <deque>

#include "ellopt/util.hpp"

namespace ellopt {

const char* to_string(ImproveStatus s) {
    switch (s) {
        case ImproveStatus::converged: return "converged";
        case ImproveStatus::max_rounds: return "max-rounds";
        case ImproveStatus::cycle: return "cycle";
        default: return "monotonicity-violation";
    }
}

ImproveResult improve_control(const Problem& pb, const ControlField& u0, int max_rounds,
                              const SolverOptions& opts, double tol_j) {
    pb.check_control(u0);
    ImproveResult result;
    result.control = u0;
    result.status = ImproveStatus::max_rounds;

    if (pb.label_count == 1) {
        result.status = ImproveStatus::converged;
        result.final_violation = 0.0;
        return result;
    }

    std::deque<ControlField> recent;  // previous iterates, newest first

    for (int round = 1; round <= max_rounds; ++round) {
        const StateField ybar = solve_state(pb, result.control, opts);
        const StateField psibar = solve_adjoint(pb, result.control, ybar, opts);
        const std::vector<CellData> cells = make_cells(pb, result.control, ybar, psibar);

        const double j = evaluate_cost(pb, result.control, ybar);
        if (!result.cost_history.empty() &&
            j > result.cost_history.back() + tol_j * std::max(1.0, std::abs(result.cost_history.back()))) {
            result.cost_history.push_back(j);
            result.status = ImproveStatus::monotonicity_violation;
            break;
        }
        result.cost_history.push_back(j);

        // Pointwise maximization: switch where some label beats the incumbent
        // Hamiltonian by more than its own direction penalty allows.
        ControlField next = result.control;
        int changes = 0;
        for (const CellData& cell : cells) {
            const std::size_t e = static_cast<std::size_t>(cell.element);
            double best_score = hamiltonian(cell, cell.ubar_label);
            int best = cell.ubar_label;
            for (int v = 0; v < pb.label_count; ++v) {
                if (v == cell.ubar_label) continue;
                const FocTerms t = foc_terms(cell, v);
                const double score = hamiltonian(cell, v) + t.max_term;
                if (score > best_score) {
                    best_score = score;
                    best = v;
                }
            }
            if (best != next[e]) {
                next[e] = best;
                ++changes;
            }
        }
        result.rounds = round;
        result.last_changes = changes;

        if (changes == 0) {
            result.status = ImproveStatus::converged;
            break;
        }
        // Revisiting a control two to four rounds back means a cycle.
        for (const ControlField& past : recent)
            if (past == next) {
                result.status = ImproveStatus::cycle;
                result.cycle_partner = result.control;
                result.control = next;
                break;
            }
        if (result.status == ImproveStatus::cycle) break;

        recent.push_front(result.control);
        if (recent.size() > 3) recent.pop_back();
        result.control = next;
    }

    result.final_violation = verify_pontryagin(pb, result.control, opts).max_violation;
    return result;
}

}  // namespace ellopt
