// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "ellopt/tensor.hpp"

namespace ellopt::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed = 0x5eed5eedULL) { return std::mt19937_64(seed); }

inline Vec random_vec(std::mt19937_64& rng, int dim, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = dist(rng);
    return v;
}

inline Vec random_unit(std::mt19937_64& rng, int dim) {
    for (;;) {
        const Vec v = random_vec(rng, dim);
        if (v.norm() > 1e-3) return v.normalized();
    }
}

/// Random SPD matrix with eigenvalues in [lo, hi]: Q diag(lambda) Q^T from a
/// random rotation (dim 2) or a product of Givens rotations (dim 3).
inline SMat random_spd(std::mt19937_64& rng, int dim, double lo = 0.5, double hi = 4.0) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> ev(lo, hi);

    double q[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    auto rotate = [&](int a, int b) {
        const double t = angle(rng), c = std::cos(t), s = std::sin(t);
        for (int i = 0; i < 3; ++i) {
            const double qa = q[i][a], qb = q[i][b];
            q[i][a] = c * qa - s * qb;
            q[i][b] = s * qa + c * qb;
        }
    };
    rotate(0, 1);
    if (dim == 3) {
        rotate(0, 2);
        rotate(1, 2);
    }

    double lambda[3];
    for (int i = 0; i < dim; ++i) lambda[i] = ev(rng);

    SMat m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) s += q[i][k] * lambda[k] * q[j][k];
            m.set(i, j, s);
        }
    return m;
}

/// Dense grid search of max <mu,xi><mu,eta> over the unit circle.
inline double circle_grid_max(const Vec& xi, const Vec& eta, int points = 100000) {
    double best = -1e300;
    for (int k = 0; k < points; ++k) {
        const double t = 2.0 * std::numbers::pi * k / points;
        const Vec mu{std::cos(t), std::sin(t)};
        best = std::max(best, mu.dot(xi) * mu.dot(eta));
    }
    return best;
}

inline double min_eigenvalue(const SMat& m) { return sym_eigen(m).values[0]; }

}  // namespace ellopt::testing
