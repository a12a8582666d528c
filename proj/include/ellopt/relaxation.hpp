// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ellopt/optimality.hpp"

namespace ellopt {

/// Relaxed coefficient interpolating A(ubar) (alpha = 0) and A(u) (alpha = 1)
/// with the rank-one laminate correction along ell:
///   A^a = a A(u) + (1-a) A(ubar)
///       - a(1-a) D ell ell^T D / [(1-a) ell^T A(u) ell + a ell^T A(ubar) ell],
/// D = A(u) - A(ubar).  Endpoints are exact.
SMat effective_coefficient(const SMat& au, const SMat& aubar, const Vec& ell, double alpha);

/// alpha-derivative of the relaxed coefficient at alpha = 0:
///   Theta = D - D ell ell^T D / (ell^T A(u) ell).
SMat theta_matrix(const SMat& au, const SMat& aubar, const Vec& ell);

/// Relaxed cost J^alpha = a Int f0(., y^a, u) + (1-a) Int f0(., y^a, ubar).
double relaxed_cost(const Problem& pb, const ControlField& ubar, const ControlField& u,
                    const DirectionField& ell, double alpha, const SolverOptions& opts = {},
                    StateField* relaxed_state = nullptr);

/// First-order coefficient of the relaxed expansion at the supplied
/// direction field: Int [ H(ubar) - H(u) - quotient(ell) ] dx.
double first_order_coefficient(const Problem& pb, const std::vector<CellData>& cells,
                               const ControlField& u, const DirectionField& ell);
double first_order_coefficient(const Problem& pb, const ControlField& ubar, const ControlField& u,
                               const DirectionField& ell, const SolverOptions& opts = {});

struct ExpansionRow {
    double alpha = 0.0;
    double j_alpha = 0.0;
    double first_ratio = 0.0;   // (J^a - J(ubar)) / a
    double second_ratio = 0.0;  // (J^a - J(ubar) - a J1) / a^2
    bool solver_ok = true;
    std::string note;
};

struct ExpansionTable {
    double j_ubar = 0.0;
    double j1 = 0.0;
    std::vector<ExpansionRow> rows;       // alpha strictly decreasing
    double second_order_limit = 0.0;      // Richardson from the two smallest alphas
    bool limit_valid = false;
};

/// Cost expansion probe along the relaxed family; rows for distinct alphas
/// are independent and may be computed on `threads` workers.
ExpansionTable expansion_probe(const Problem& pb, const ControlField& ubar, const ControlField& u,
                               const DirectionField& ell, const std::vector<double>& alphas,
                               const SolverOptions& opts = {}, int threads = 1);

struct SocReport {
    double value = 0.0;
    double ratio_term = 0.0;     // (H(ubar) - H(u)) * ell^T A(ubar) ell / ell^T A(u) ell
    double hy_term = 0.0;        // (H_y(ubar) - H_y(u)) Y
    double hyy_term = 0.0;       // -1/2 H_yy(ubar) Y^2
    double pairing_term = 0.0;   // coefficient-gap pairing with grad Y
    double tol = 0.0;            // 1e-6 * (1 + sum of absolute term integrals)
    bool pass = false;           // value >= -tol
    std::string warning;
};

/// Second-order value for a weakly singular pair (u, ell); Y solves the
/// variational equation with the Theta source.  The pairing term uses Theta.
SocReport soc_value(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                    const StateField& psibar, const ControlField& u, const DirectionField& ell,
                    const SolverOptions& opts = {});
SocReport soc_value(const Problem& pb, const ControlField& ubar, const ControlField& u,
                    const DirectionField& ell, const SolverOptions& opts = {});

/// Second-order value for a singular candidate; drops the ratio term, takes
/// Y from the singular variational equation, pairs with A(u) - A(ubar).
/// A violated precondition is reported in `warning`, the value still computed.
SocReport soc_value_singular(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                             const StateField& psibar, const ControlField& u,
                             const SolverOptions& opts = {});
SocReport soc_value_singular(const Problem& pb, const ControlField& ubar, const ControlField& u,
                             const SolverOptions& opts = {});

/// Reduced two-term value for coefficients independent of the control:
/// Int [ (H_y(ubar)-H_y(u)) Y - 1/2 H_yy(ubar) Y^2 ] with Y from the reduced
/// variational equation.  H carries no gradient term in this regime.
SocReport soc_value_reduced(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                            const StateField& psibar, const ControlField& u,
                            const SolverOptions& opts = {});

}  // namespace ellopt
