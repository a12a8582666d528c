// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ellopt/fem.hpp"

namespace ellopt {

/// Rational direction, one integer pair per component.
struct RationalDirection {
    std::vector<long> num;
    std::vector<long> den;  // positive
    int dim() const { return static_cast<int>(num.size()); }
    Vec value() const;      // throws if zero or denominators invalid
};

/// Two-phase laminate microstructure: phase B on the fraction alpha of each
/// period, phase C on the rest, layered along a piecewise-constant rational
/// direction field.
struct Laminate {
    SMat phase_b;
    SMat phase_c;
    double alpha = 0.5;
    std::vector<RationalDirection> directions;  // one per region
    std::vector<int> region_of_element;         // empty means single region 0

    void validate(int element_count) const;  // throws std::invalid_argument
};

/// Oscillating coefficient sampled at element centroids: phase B where the
/// fractional part of <x/eps, mu_k> falls in [0, alpha), phase C otherwise.
ElementMatrixField laminate_field(const Laminate& lam, const Mesh& mesh, double eps);

/// Closed-form H-limit of the laminate, per element:
///   G = a B + (1-a) C - a(1-a) (B-C) l l^T (B-C)
///       / [(1-a) l^T B l + a l^T C l].
ElementMatrixField hlimit_laminate(const Laminate& lam, const Mesh& mesh);

struct SweepRow {
    double eps = 0.0;
    double l2_error = 0.0;
    double h1_semi_error = 0.0;
};

/// Solve -div(G(x, x/eps) grad y) = g for each eps and compare with the
/// homogenized solution in L2 and the H1 seminorm.  Requires at least 8
/// elements per period: eps >= 8/m.
std::vector<SweepRow> epsilon_sweep(const Laminate& lam, const Mesh& mesh,
                                    const ElementScalarField& g, const std::vector<double>& eps_list,
                                    double cg_rtol = 1e-12, int threads = 1,
                                    StateField* homogenized = nullptr);

/// Midpoint-grid estimate of the volume fraction where the fractional part
/// of <nu, z> lies in [0, alpha) over the unit cell; converges to alpha for
/// any nonzero integer vector.
double decimal_measure(const std::vector<long>& nu, double alpha, int grid_points);

struct Corrector1d {
    Vec flux;      // the constant flux X through the laminate
    Vec slope_b;   // corrector slope on the B layer
    Vec slope_c;   // corrector slope on the C layer
};

/// One-dimensional corrector of a laminate along the unit direction mu:
///   X = [a (mu^T C mu) B mu + (1-a) (mu^T B mu) C mu] / mu^T[a C + (1-a) B]mu,
/// slopes (X - B mu)/(mu^T B mu) and (X - C mu)/(mu^T C mu).
/// Closure: a slope_b + (1-a) slope_c = 0.
Corrector1d corrector_1d(const SMat& b, const SMat& c, double alpha, const Vec& mu);

/// Effective matrix rebuilt from the corrector:
///   a B + (1-a) C + a B mu slope_b^T + (1-a) C mu slope_c^T,
/// symmetrized; must reproduce the closed-form H-limit.
SMat corrector_reconstruction(const SMat& b, const SMat& c, double alpha, const Vec& mu,
                              const Corrector1d& corr);

}  // namespace ellopt
