// SPDX-License-Identifier: Apache-2.0
#include "ellopt/semilinear.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ellopt/relaxation.hpp"

namespace ellopt {

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += t * t;
    return std::sqrt(s);
}

CgOptions cg_options(const SolverOptions& opts) {
    CgOptions cg;
    cg.rtol = opts.cg_rtol;
    cg.max_iter = opts.cg_max_iter;
    return cg;
}

ElementMatrixField control_coefficient(const Problem& pb, const ControlField& u) {
    ElementMatrixField coeff(static_cast<std::size_t>(pb.mesh.element_count()));
    for (int e = 0; e < pb.mesh.element_count(); ++e)
        coeff[static_cast<std::size_t>(e)] = pb.A(e, u[static_cast<std::size_t>(e)]);
    return coeff;
}

/// System matrix of the linearized operator at ybar under ubar:
/// stiffness(A(ubar)) plus the mass of -f_y(., ybar, ubar) >= 0.
LinearSystem linearized_system(const Problem& pb, const ControlField& ubar, const StateField& ybar) {
    const int ne = pb.mesh.element_count();
    ElementScalarField reaction(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const double yc = centroid_value(pb.mesh, ybar, e);
        reaction[static_cast<std::size_t>(e)] = -pb.f_y(e, yc, ubar[static_cast<std::size_t>(e)]);
    }
    return assemble(pb.mesh, control_coefficient(pb, ubar), reaction);
}

}  // namespace

StateField newton_solve(const Mesh& mesh, const ElementMatrixField& coeff,
                        const std::function<double(int, double)>& reaction_fn,
                        const std::function<double(int, double)>& reaction_dy,
                        const SolverOptions& opts) {
    const int ne = mesh.element_count();
    const ElementScalarField zero(static_cast<std::size_t>(ne), 0.0);
    LinearSystem stiffness = assemble(mesh, coeff, zero);
    const int n = stiffness.unknowns;

    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    StateField y(static_cast<std::size_t>(mesh.node_count()), 0.0);

    auto residual = [&](const std::vector<double>& xi, const StateField& yi, std::vector<double>& out) {
        ElementScalarField g(static_cast<std::size_t>(ne));
        for (int e = 0; e < ne; ++e) g[static_cast<std::size_t>(e)] = reaction_fn(e, centroid_value(mesh, yi, e));
        const std::vector<double> b = load_scalar(mesh, g);
        out.assign(static_cast<std::size_t>(n), 0.0);
        apply_system(stiffness, xi, out);
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] -= b[static_cast<std::size_t>(stiffness.interior_to_node[static_cast<std::size_t>(i)])];
    };

    std::vector<double> r;
    residual(x, y, r);
    const double scale = std::max(1.0, norm2(r));
    const double tol = std::max(opts.newton_atol, opts.newton_rtol * scale);

    std::vector<double> history;
    double rnorm = norm2(r);
    history.push_back(rnorm);

    for (int it = 0; it < opts.newton_max_iter; ++it) {
        if (rnorm <= tol) return y;

        ElementScalarField reaction(static_cast<std::size_t>(ne));
        for (int e = 0; e < ne; ++e)
            reaction[static_cast<std::size_t>(e)] = -reaction_dy(e, centroid_value(mesh, y, e));
        LinearSystem jac = assemble(mesh, coeff, reaction);
        for (int i = 0; i < n; ++i) jac.rhs[static_cast<std::size_t>(i)] = -r[static_cast<std::size_t>(i)];
        const std::vector<double> step = solve_cg_raw(jac, cg_options(opts));

        // Damping: halve the step until the residual decreases.
        double s = 1.0;
        std::vector<double> x_try(static_cast<std::size_t>(n));
        StateField y_try;
        std::vector<double> r_try;
        bool accepted = false;
        while (s >= 1e-6) {
            for (int i = 0; i < n; ++i)
                x_try[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + s * step[static_cast<std::size_t>(i)];
            y_try = scatter_interior(mesh, stiffness, x_try);
            residual(x_try, y_try, r_try);
            if (norm2(r_try) < rnorm) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) break;
        x.swap(x_try);
        y.swap(y_try);
        r.swap(r_try);
        rnorm = norm2(r);
        history.push_back(rnorm);
    }
    if (rnorm <= tol) return y;

    std::ostringstream msg;
    msg << "newton_solve: no convergence after " << history.size() - 1 << " iterations; residuals:";
    for (double h : history) msg << ' ' << h;
    throw std::runtime_error(msg.str());
}

StateField solve_state(const Problem& pb, const ControlField& u, const SolverOptions& opts) {
    pb.check_control(u);
    return newton_solve(
        pb.mesh, control_coefficient(pb, u),
        [&](int e, double y) { return pb.f(e, y, u[static_cast<std::size_t>(e)]); },
        [&](int e, double y) { return pb.f_y(e, y, u[static_cast<std::size_t>(e)]); }, opts);
}

StateField solve_adjoint(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                         const SolverOptions& opts) {
    pb.check_control(ubar);
    LinearSystem sys = linearized_system(pb, ubar, ybar);
    const int ne = pb.mesh.element_count();
    ElementScalarField source(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const double yc = centroid_value(pb.mesh, ybar, e);
        source[static_cast<std::size_t>(e)] = -pb.f0_y(e, yc, ubar[static_cast<std::size_t>(e)]);
    }
    set_rhs(sys, load_scalar(pb.mesh, source));
    return solve_cg(pb.mesh, sys, cg_options(opts));
}

double evaluate_cost(const Problem& pb, const ControlField& u, const StateField& y) {
    pb.check_control(u);
    double j = 0.0;
    for (int e = 0; e < pb.mesh.element_count(); ++e)
        j += pb.mesh.area[static_cast<std::size_t>(e)] *
             pb.f0(e, centroid_value(pb.mesh, y, e), u[static_cast<std::size_t>(e)]);
    return j;
}

StateField solve_variational(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                             const ControlField& u, const DirectionField& ell,
                             const SolverOptions& opts) {
    pb.check_control(ubar);
    pb.check_control(u);
    pb.check_direction(ell);
    const int ne = pb.mesh.element_count();

    LinearSystem sys = linearized_system(pb, ubar, ybar);
    ElementMatrixField theta(static_cast<std::size_t>(ne));
    ElementScalarField df(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const int vu = u[static_cast<std::size_t>(e)], vb = ubar[static_cast<std::size_t>(e)];
        theta[static_cast<std::size_t>(e)] = theta_matrix(pb.A(e, vu), pb.A(e, vb), ell[static_cast<std::size_t>(e)]);
        const double yc = centroid_value(pb.mesh, ybar, e);
        df[static_cast<std::size_t>(e)] = pb.f(e, yc, vu) - pb.f(e, yc, vb);
    }
    std::vector<double> rhs = load_divergence(pb.mesh, theta, ybar);
    const std::vector<double> b2 = load_scalar(pb.mesh, df);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += b2[i];
    set_rhs(sys, rhs);
    return solve_cg(pb.mesh, sys, cg_options(opts));
}

StateField solve_variational_singular(const Problem& pb, const ControlField& ubar,
                                      const StateField& ybar, const ControlField& u,
                                      const SolverOptions& opts) {
    pb.check_control(ubar);
    pb.check_control(u);
    const int ne = pb.mesh.element_count();

    LinearSystem sys = linearized_system(pb, ubar, ybar);
    ElementMatrixField au(static_cast<std::size_t>(ne));
    ElementScalarField fu(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const int vu = u[static_cast<std::size_t>(e)];
        au[static_cast<std::size_t>(e)] = pb.A(e, vu);
        fu[static_cast<std::size_t>(e)] = pb.f(e, centroid_value(pb.mesh, ybar, e), vu);
    }
    std::vector<double> rhs = load_divergence(pb.mesh, au, ybar);
    const std::vector<double> b2 = load_scalar(pb.mesh, fu);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += b2[i];
    set_rhs(sys, rhs);
    return solve_cg(pb.mesh, sys, cg_options(opts));
}

StateField solve_variational_reduced(const Problem& pb, const ControlField& ubar,
                                     const StateField& ybar, const ControlField& u,
                                     const SolverOptions& opts) {
    pb.check_control(ubar);
    pb.check_control(u);
    const int ne = pb.mesh.element_count();

    LinearSystem sys = linearized_system(pb, ubar, ybar);
    ElementScalarField df(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const double yc = centroid_value(pb.mesh, ybar, e);
        df[static_cast<std::size_t>(e)] =
            pb.f(e, yc, u[static_cast<std::size_t>(e)]) - pb.f(e, yc, ubar[static_cast<std::size_t>(e)]);
    }
    set_rhs(sys, load_scalar(pb.mesh, df));
    return solve_cg(pb.mesh, sys, cg_options(opts));
}

StateField solve_relaxed_state(const Problem& pb, const ControlField& ubar, const ControlField& u,
                               const DirectionField& ell, double alpha, const SolverOptions& opts) {
    pb.check_control(ubar);
    pb.check_control(u);
    pb.check_direction(ell);
    if (!(alpha >= 0.0) || !(alpha <= 1.0))
        throw std::invalid_argument("solve_relaxed_state: alpha must lie in [0,1]");
    const int ne = pb.mesh.element_count();

    ElementMatrixField coeff(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e)
        coeff[static_cast<std::size_t>(e)] =
            effective_coefficient(pb.A(e, u[static_cast<std::size_t>(e)]),
                                  pb.A(e, ubar[static_cast<std::size_t>(e)]),
                                  ell[static_cast<std::size_t>(e)], alpha);

    return newton_solve(
        pb.mesh, coeff,
        [&](int e, double y) {
            return (1.0 - alpha) * pb.f(e, y, ubar[static_cast<std::size_t>(e)]) +
                   alpha * pb.f(e, y, u[static_cast<std::size_t>(e)]);
        },
        [&](int e, double y) {
            return (1.0 - alpha) * pb.f_y(e, y, ubar[static_cast<std::size_t>(e)]) +
                   alpha * pb.f_y(e, y, u[static_cast<std::size_t>(e)]);
        },
        opts);
}

}  // namespace ellopt
