// SPDX-License-Identifier: Apache-2.0
#include "ellopt/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ellopt/util.hpp"

namespace ellopt {

SMat effective_coefficient(const SMat& au, const SMat& aubar, const Vec& ell, double alpha) {
    if (!(alpha >= 0.0) || !(alpha <= 1.0))
        throw std::invalid_argument("effective_coefficient: alpha must lie in [0,1]");
    const SMat diff = au - aubar;
    const double denom = (1.0 - alpha) * au.quad(ell) + alpha * aubar.quad(ell);
    const Vec w = diff.apply(ell);
    return au * alpha + aubar * (1.0 - alpha) - SMat::outer(w) * (alpha * (1.0 - alpha) / denom);
}

SMat theta_matrix(const SMat& au, const SMat& aubar, const Vec& ell) {
    const SMat diff = au - aubar;
    const Vec w = diff.apply(ell);
    return diff - SMat::outer(w) * (1.0 / au.quad(ell));
}

double relaxed_cost(const Problem& pb, const ControlField& ubar, const ControlField& u,
                    const DirectionField& ell, double alpha, const SolverOptions& opts,
                    StateField* relaxed_state) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("relaxed_cost: alpha must lie in (0,1)");
    const StateField y = solve_relaxed_state(pb, ubar, u, ell, alpha, opts);
    double j = 0.0;
    for (int e = 0; e < pb.mesh.element_count(); ++e) {
        const double yc = centroid_value(pb.mesh, y, e);
        j += pb.mesh.area[static_cast<std::size_t>(e)] *
             ((1.0 - alpha) * pb.f0(e, yc, ubar[static_cast<std::size_t>(e)]) +
              alpha * pb.f0(e, yc, u[static_cast<std::size_t>(e)]));
    }
    if (relaxed_state) *relaxed_state = y;
    return j;
}

double first_order_coefficient(const Problem& pb, const std::vector<CellData>& cells,
                               const ControlField& u, const DirectionField& ell) {
    pb.check_control(u);
    pb.check_direction(ell);
    double j1 = 0.0;
    for (const CellData& cell : cells) {
        const std::size_t e = static_cast<std::size_t>(cell.element);
        if (u[e] == cell.ubar_label) continue;
        const double h_gap = hamiltonian(cell, cell.ubar_label) - hamiltonian(cell, u[e]);
        j1 += pb.mesh.area[e] * (h_gap - direction_quotient(cell, u[e], ell[e]));
    }
    return j1;
}

double first_order_coefficient(const Problem& pb, const ControlField& ubar, const ControlField& u,
                               const DirectionField& ell, const SolverOptions& opts) {
    const StateField ybar = solve_state(pb, ubar, opts);
    const StateField psibar = solve_adjoint(pb, ubar, ybar, opts);
    return first_order_coefficient(pb, make_cells(pb, ubar, ybar, psibar), u, ell);
}

ExpansionTable expansion_probe(const Problem& pb, const ControlField& ubar, const ControlField& u,
                               const DirectionField& ell, const std::vector<double>& alphas,
                               const SolverOptions& opts, int threads) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !(alphas[i] < 1.0))
            throw std::invalid_argument("expansion_probe: alphas must lie in (0,1)");
        if (i > 0 && !(alphas[i] < alphas[i - 1]))
            throw std::invalid_argument("expansion_probe: alphas must be strictly decreasing");
    }

    ExpansionTable table;
    const StateField ybar = solve_state(pb, ubar, opts);
    const StateField psibar = solve_adjoint(pb, ubar, ybar, opts);
    table.j_ubar = evaluate_cost(pb, ubar, ybar);
    table.j1 = first_order_coefficient(pb, make_cells(pb, ubar, ybar, psibar), u, ell);

    table.rows.resize(alphas.size());
    run_jobs(static_cast<int>(alphas.size()), threads, [&](int i) {
        ExpansionRow& row = table.rows[static_cast<std::size_t>(i)];
        row.alpha = alphas[static_cast<std::size_t>(i)];
        try {
            row.j_alpha = relaxed_cost(pb, ubar, u, ell, row.alpha, opts);
            const double d = row.j_alpha - table.j_ubar;
            row.first_ratio = d / row.alpha;
            row.second_ratio = (d - row.alpha * table.j1) / (row.alpha * row.alpha);
        } catch (const std::exception& ex) {
            row.solver_ok = false;
            row.note = ex.what();
        }
    });

    // Richardson from the two smallest healthy alphas: the second-order ratio
    // carries an O(alpha) tail, so extrapolate linearly to alpha = 0.
    const ExpansionRow* small = nullptr;
    const ExpansionRow* prev = nullptr;
    for (auto it = table.rows.rbegin(); it != table.rows.rend(); ++it) {
        if (!it->solver_ok) continue;
        if (!small) {
            small = &*it;
        } else {
            prev = &*it;
            break;
        }
    }
    if (small && prev) {
        const double a1 = prev->alpha, r1 = prev->second_ratio;
        const double a2 = small->alpha, r2 = small->second_ratio;
        table.second_order_limit = (a1 * r2 - a2 * r1) / (a1 - a2);
        table.limit_valid = true;
    } else if (small) {
        table.second_order_limit = small->second_ratio;
        table.limit_valid = true;
    }
    return table;
}

namespace {

struct SocAccumulator {
    double ratio = 0.0, hy = 0.0, hyy = 0.0, pairing = 0.0;

    void finish(SocReport& report) const {
        report.ratio_term = ratio;
        report.hy_term = hy;
        report.hyy_term = hyy;
        report.pairing_term = pairing;
        report.value = ratio + hy + hyy + pairing;
        report.tol = 1e-6 * (1.0 + std::abs(ratio) + std::abs(hy) + std::abs(hyy) + std::abs(pairing));
        report.pass = report.value >= -report.tol;
    }
};

double hy_difference(const Problem& pb, int e, double yc, double psic, int vb, int vu) {
    const double hy_b = psic * pb.f_y(e, yc, vb) - pb.f0_y(e, yc, vb);
    const double hy_u = psic * pb.f_y(e, yc, vu) - pb.f0_y(e, yc, vu);
    return hy_b - hy_u;
}

}  // namespace

SocReport soc_value(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                    const StateField& psibar, const ControlField& u, const DirectionField& ell,
                    const SolverOptions& opts) {
    pb.check_control(u);
    pb.check_direction(ell);
    const StateField Y = solve_variational(pb, ubar, ybar, u, ell, opts);
    const std::vector<CellData> cells = make_cells(pb, ubar, ybar, psibar);

    SocAccumulator acc;
    for (const CellData& cell : cells) {
        const std::size_t e = static_cast<std::size_t>(cell.element);
        const double area = pb.mesh.area[e];
        const int vb = cell.ubar_label, vu = u[e];
        const double yc = cell.ybar, psic = cell.psibar;
        const double Yc = centroid_value(pb.mesh, Y, cell.element);
        const Vec gradY = element_gradient(pb.mesh, Y, cell.element);

        if (vu != vb) {
            const double h_gap = hamiltonian(cell, vb) - hamiltonian(cell, vu);
            const double ratio = cell.A[static_cast<std::size_t>(vb)].quad(ell[e]) /
                                 cell.A[static_cast<std::size_t>(vu)].quad(ell[e]);
            acc.ratio += area * h_gap * ratio;
            acc.hy += area * hy_difference(pb, cell.element, yc, psic, vb, vu) * Yc;
            const SMat theta = theta_matrix(cell.A[static_cast<std::size_t>(vu)],
                                            cell.A[static_cast<std::size_t>(vb)], ell[e]);
            acc.pairing += area * theta.bilinear(cell.grad_psi, gradY);
        }
        const double hyy = psic * pb.f_yy(cell.element, yc, vb) - pb.f0_yy(cell.element, yc, vb);
        acc.hyy += -0.5 * area * hyy * Yc * Yc;
    }

    SocReport report;
    acc.finish(report);
    return report;
}

SocReport soc_value(const Problem& pb, const ControlField& ubar, const ControlField& u,
                    const DirectionField& ell, const SolverOptions& opts) {
    const StateField ybar = solve_state(pb, ubar, opts);
    const StateField psibar = solve_adjoint(pb, ubar, ybar, opts);
    return soc_value(pb, ubar, ybar, psibar, u, ell, opts);
}

SocReport soc_value_singular(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                             const StateField& psibar, const ControlField& u,
                             const SolverOptions& opts) {
    pb.check_control(u);
    const StateField Y = solve_variational_singular(pb, ubar, ybar, u, opts);
    const std::vector<CellData> cells = make_cells(pb, ubar, ybar, psibar);
    const double tol = default_tol_sing(cells);

    SocAccumulator acc;
    double worst_gap = 0.0;
    for (const CellData& cell : cells) {
        const std::size_t e = static_cast<std::size_t>(cell.element);
        const double area = pb.mesh.area[e];
        const int vb = cell.ubar_label, vu = u[e];
        const double Yc = centroid_value(pb.mesh, Y, cell.element);
        const Vec gradY = element_gradient(pb.mesh, Y, cell.element);

        if (vu != vb) {
            worst_gap = std::max(worst_gap,
                                 std::abs(hamiltonian(cell, vb) - hamiltonian(cell, vu)));
            acc.hy += area * hy_difference(pb, cell.element, cell.ybar, cell.psibar, vb, vu) * Yc;
            const SMat diff = cell.A[static_cast<std::size_t>(vu)] - cell.A[static_cast<std::size_t>(vb)];
            acc.pairing += area * diff.bilinear(cell.grad_psi, gradY);
        }
        const double hyy =
            cell.psibar * pb.f_yy(cell.element, cell.ybar, vb) - pb.f0_yy(cell.element, cell.ybar, vb);
        acc.hyy += -0.5 * area * hyy * Yc * Yc;
    }

    SocReport report;
    acc.finish(report);
    if (worst_gap > tol)
        report.warning = "candidate is not singular: max Hamiltonian gap " + std::to_string(worst_gap);
    return report;
}

SocReport soc_value_singular(const Problem& pb, const ControlField& ubar, const ControlField& u,
                             const SolverOptions& opts) {
    const StateField ybar = solve_state(pb, ubar, opts);
    const StateField psibar = solve_adjoint(pb, ubar, ybar, opts);
    return soc_value_singular(pb, ubar, ybar, psibar, u, opts);
}

SocReport soc_value_reduced(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                            const StateField& psibar, const ControlField& u,
                            const SolverOptions& opts) {
    pb.check_control(u);
    const StateField Y = solve_variational_reduced(pb, ubar, ybar, u, opts);

    SocReport report;
    SocAccumulator acc;
    double coeff_dependence = 0.0;
    for (int e = 0; e < pb.mesh.element_count(); ++e) {
        const std::size_t se = static_cast<std::size_t>(e);
        const double area = pb.mesh.area[se];
        const int vb = ubar[se], vu = u[se];
        const double yc = centroid_value(pb.mesh, ybar, e);
        const double psic = centroid_value(pb.mesh, psibar, e);
        const double Yc = centroid_value(pb.mesh, Y, e);
        coeff_dependence = std::max(coeff_dependence, (pb.A(e, vu) - pb.A(e, vb)).frobenius());

        if (vu != vb) acc.hy += area * hy_difference(pb, e, yc, psic, vb, vu) * Yc;
        const double hyy = psic * pb.f_yy(e, yc, vb) - pb.f0_yy(e, yc, vb);
        acc.hyy += -0.5 * area * hyy * Yc * Yc;
    }
    acc.finish(report);
    if (coeff_dependence > 1e-12)
        report.warning = "coefficient depends on the control; reduced form is not applicable";
    return report;
}

}  // namespace ellopt
