// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ellopt/fem.hpp"
#include "ellopt/tensor.hpp"

namespace ellopt {

using ControlField = std::vector<int>;    // one label per element
using DirectionField = std::vector<Vec>;  // one unit vector per element

/// A complete problem instance: mesh, finite label set U = {0..label_count-1},
/// per-(element,label) coefficient matrices, reaction f and running cost f0
/// with y-derivatives sampled at element centroids, ellipticity window.
struct Problem {
    std::string name;
    Mesh mesh;
    int label_count = 1;
    double lambda = 0.0;   // ellipticity lower bound
    double Lambda = 0.0;   // ellipticity upper bound

    // coeff[e * label_count + v]
    std::vector<SMat> coeff;

    // All sampled at element centroids: (element, y, label) -> value.
    std::function<double(int, double, int)> f;
    std::function<double(int, double, int)> f_y;
    std::function<double(int, double, int)> f_yy;
    std::function<double(int, double, int)> f0;
    std::function<double(int, double, int)> f0_y;
    std::function<double(int, double, int)> f0_yy;

    const SMat& A(int element, int label) const {
        return coeff[static_cast<std::size_t>(element) * static_cast<std::size_t>(label_count) +
                     static_cast<std::size_t>(label)];
    }

    void check_control(const ControlField& u) const;
    void check_direction(const DirectionField& ell) const;
};

struct LaplaceMsParams {
    bool semilinear = false;  // false: f = g(x); true: f = -y + g(x)
    double ax = 1.0;          // diagonal coefficient entries
    double ay = 1.0;
};

/// Manufactured problem with exact solution sin(pi x1) sin(pi x2); single label.
Problem make_laplace_ms(int m, const LaplaceMsParams& p = {});

/// Exact manufactured solution at a point.
double manufactured_solution(double x1, double x2);

struct TwoPhaseParams {
    double a = 1.0;             // A(x,0) = a I
    double b = 2.0;             // A(x,1) = b I (or anisotropic, below)
    bool anisotropic = false;   // A(x,1) = diag(b, b/2)
    double reaction = -1.0;     // f = g(x) + reaction * y, must be <= 0
    double g_scale = 4.0;       // source amplitude
    double yd_scale = 1.0;      // tracking target amplitude
    bool yd_step = true;        // step target (left half) vs smooth sine target
    double beta0 = 0.0;         // control cost per label
    double beta1 = 0.02;
};

/// Two-phase tracking problem: U = {0,1},
///   f = g(x) + c y,  f0 = (y - y_d(x))^2 / 2 + beta(v).
/// The default step target keeps the adjoint sign pattern stable, so the
/// pointwise improvement rule reaches its fixed point without cost bumps.
Problem make_two_phase(int m, const TwoPhaseParams& p = {});

struct RegionFreeParams {
    std::array<double, 4> box{0.25, 0.75, 0.25, 0.75};  // Omega_0 = [x0,x1]x[y0,y1]
    double a_gap = 0.0;       // coefficient gap of label 1 outside the box
    double beta_out = 0.05;   // label-1 cost penalty outside the box
    double reaction = -1.0;
    double g_scale = 4.0;
    double yd_scale = 0.2;
};

/// Data independent of the control inside the box: any control agreeing with
/// the incumbent outside is singular.  Outside, label 1 carries a strict cost
/// penalty (and optionally a coefficient gap).
Problem make_region_free(int m, const RegionFreeParams& p = {});

bool region_free_inside(const RegionFreeParams& p, double x1, double x2);

struct RankOneGapParams {
    double qx = 1.0, qy = 0.0;  // gap direction q (normalized internally)
    double gap = 1.0;           // A(x,1) = A0 + gap * q q^T
    double a0 = 1.0, a1 = 2.0;  // A0 = diag(a0, a1)
    double reaction = -1.0;
    double g_scale = 4.0;
    double delta = 0.0;         // tracking offset: y_d = (1 + delta) ybar
    bool maximizer_mode = false;  // see below
};

/// Calibrated rank-one-gap instance.  The coefficient gap between the two
/// labels is rank one along q.  After solving the incumbent state and adjoint
/// on the given mesh, the per-element control cost of label 1 is tuned so the
/// flip-everywhere candidate satisfies the weak-singularity equality exactly:
///  - default mode: directions orthogonal to q, both coefficient-gap pairings
///    vanish and the Hamiltonian gap is tuned to zero (singular case);
///  - maximizer mode: directions maximize the quotient and the Hamiltonian
///    gap is tuned to the attained maximum (weakly singular, non-singular).
struct RankOneGapInstance {
    Problem problem;
    ControlField incumbent;   // label 0 everywhere
    ControlField candidate;   // label 1 everywhere
    DirectionField direction; // per-element calibrated direction
};

RankOneGapInstance make_rank_one_gap(int m, const RankOneGapParams& p = {});

}  // namespace ellopt
