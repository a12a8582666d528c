// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "ellopt/problem.hpp"

namespace ellopt {

struct SolverOptions {
    double newton_rtol = 1e-11;
    double newton_atol = 1e-13;
    int newton_max_iter = 50;
    double cg_rtol = 1e-12;
    long cg_max_iter = 0;  // 0 -> 20 * unknowns
};

/// Damped Newton for K(coeff) y = load(F(., y)) with F_y <= 0; initial
/// guess zero.  reaction_fn(e, y) and its y-derivative are sampled at element
/// centroids.  Throws std::runtime_error with the residual history on failure.
StateField newton_solve(const Mesh& mesh, const ElementMatrixField& coeff,
                        const std::function<double(int, double)>& reaction_fn,
                        const std::function<double(int, double)>& reaction_dy,
                        const SolverOptions& opts);

/// Semilinear state equation -div(A(x,u) grad y) = f(x,y,u), zero trace.
StateField solve_state(const Problem& pb, const ControlField& u, const SolverOptions& opts = {});

/// Linear adjoint equation
///   -div(A(x,ubar) grad psi) = f_y(x,ybar,ubar) psi - f0_y(x,ybar,ubar).
StateField solve_adjoint(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                         const SolverOptions& opts = {});

/// Centroid-quadrature cost integral of f0(x, y, u).
double evaluate_cost(const Problem& pb, const ControlField& u, const StateField& y);

/// Variational equation for the first-order sensitivity Y of the relaxed
/// state: -div(A(ubar) grad Y) = f_y(ybar,ubar) Y + div(Theta grad ybar)
///                               + f(ybar,u) - f(ybar,ubar).
StateField solve_variational(const Problem& pb, const ControlField& ubar, const StateField& ybar,
                             const ControlField& u, const DirectionField& ell,
                             const SolverOptions& opts = {});

/// Variant used for singular candidates:
/// -div(A(ubar) grad Y) = f_y(ybar,ubar) Y + div(A(u) grad ybar) + f(ybar,u).
StateField solve_variational_singular(const Problem& pb, const ControlField& ubar,
                                      const StateField& ybar, const ControlField& u,
                                      const SolverOptions& opts = {});

/// Reduced variational equation for control-independent coefficients:
/// -div(A grad Y) = f_y(ybar,ubar) Y + f(ybar,u) - f(ybar,ubar).
StateField solve_variational_reduced(const Problem& pb, const ControlField& ubar,
                                     const StateField& ybar, const ControlField& u,
                                     const SolverOptions& opts = {});

/// Relaxed state equation with the interpolated coefficient A^alpha and
/// reaction mix (1-alpha) f(.,y,ubar) + alpha f(.,y,u).
StateField solve_relaxed_state(const Problem& pb, const ControlField& ubar, const ControlField& u,
                               const DirectionField& ell, double alpha,
                               const SolverOptions& opts = {});

}  // namespace ellopt
