// SPDX-License-Identifier: Apache-2.0
#include "ellopt/problem.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "ellopt/optimality.hpp"
#include "ellopt/semilinear.hpp"

namespace ellopt {

namespace {

constexpr double kPi = std::numbers::pi;

void spread_coefficient(Problem& pb, const std::function<SMat(int, int)>& a) {
    const int ne = pb.mesh.element_count();
    pb.coeff.resize(static_cast<std::size_t>(ne) * static_cast<std::size_t>(pb.label_count));
    for (int e = 0; e < ne; ++e)
        for (int v = 0; v < pb.label_count; ++v)
            pb.coeff[static_cast<std::size_t>(e) * static_cast<std::size_t>(pb.label_count) +
                     static_cast<std::size_t>(v)] = a(e, v);
}

void set_ellipticity(Problem& pb) {
    double lo = 1e300, hi = 0.0;
    for (const SMat& m : pb.coeff) {
        const auto e = sym_eigen(m);
        lo = std::min(lo, e.values[0]);
        hi = std::max(hi, e.values[static_cast<std::size_t>(m.dim() - 1)]);
        if (!is_spd(m)) throw std::invalid_argument("problem coefficient is not SPD");
    }
    pb.lambda = lo;
    pb.Lambda = hi;
}

}  // namespace

void Problem::check_control(const ControlField& u) const {
    if (u.size() != static_cast<std::size_t>(mesh.element_count()))
        throw std::invalid_argument("control field size does not match the mesh");
    for (int v : u)
        if (v < 0 || v >= label_count) throw std::invalid_argument("control label out of range");
}

void Problem::check_direction(const DirectionField& ell) const {
    if (ell.size() != static_cast<std::size_t>(mesh.element_count()))
        throw std::invalid_argument("direction field size does not match the mesh");
    for (const Vec& d : ell)
        if (!d.is_unit(1e-12)) throw std::invalid_argument("direction field entry is not a unit vector");
}

double manufactured_solution(double x1, double x2) {
    return std::sin(kPi * x1) * std::sin(kPi * x2);
}

Problem make_laplace_ms(int m, const LaplaceMsParams& p) {
    if (p.ax <= 0.0 || p.ay <= 0.0) throw std::invalid_argument("laplace-ms: coefficients must be positive");
    Problem pb;
    pb.name = "laplace-ms";
    pb.mesh = build_mesh(m);
    pb.label_count = 1;
    const SMat a = SMat::diag({p.ax, p.ay});
    spread_coefficient(pb, [&](int, int) { return a; });
    set_ellipticity(pb);

    auto centroids = std::make_shared<std::vector<std::array<double, 2>>>(pb.mesh.centroid);
    const double load_factor = (p.ax + p.ay) * kPi * kPi;
    const bool semilinear = p.semilinear;

    pb.f = [centroids, load_factor, semilinear](int e, double y, int) {
        const auto& c = (*centroids)[static_cast<std::size_t>(e)];
        const double g = load_factor * manufactured_solution(c[0], c[1]);
        return semilinear ? g + manufactured_solution(c[0], c[1]) - y : g;
    };
    pb.f_y = [semilinear](int, double, int) { return semilinear ? -1.0 : 0.0; };
    pb.f_yy = [](int, double, int) { return 0.0; };
    pb.f0 = [centroids](int e, double y, int) {
        const auto& c = (*centroids)[static_cast<std::size_t>(e)];
        const double d = y - manufactured_solution(c[0], c[1]);
        return 0.5 * d * d;
    };
    pb.f0_y = [centroids](int e, double y, int) {
        const auto& c = (*centroids)[static_cast<std::size_t>(e)];
        return y - manufactured_solution(c[0], c[1]);
    };
    pb.f0_yy = [](int, double, int) { return 1.0; };
    return pb;
}

Problem make_two_phase(int m, const TwoPhaseParams& p) {
    if (p.reaction > 0.0) throw std::invalid_argument("two-phase: reaction coefficient must be <= 0");
    if (p.a <= 0.0 || p.b <= 0.0) throw std::invalid_argument("two-phase: phases must be positive");
    Problem pb;
    pb.name = "two-phase";
    pb.mesh = build_mesh(m);
    pb.label_count = 2;
    const SMat a0 = SMat::identity(2) * p.a;
    const SMat a1 = p.anisotropic ? SMat::diag({p.b, 0.5 * p.b}) : SMat::identity(2) * p.b;
    spread_coefficient(pb, [&](int, int v) { return v == 0 ? a0 : a1; });
    set_ellipticity(pb);

    auto centroids = std::make_shared<std::vector<std::array<double, 2>>>(pb.mesh.centroid);
    const double c = p.reaction, gs = p.g_scale, yds = p.yd_scale;
    const bool step = p.yd_step;
    const double beta[2] = {p.beta0, p.beta1};

    auto target = [centroids, yds, step](int e) {
        const auto& x = (*centroids)[static_cast<std::size_t>(e)];
        if (step) return x[0] < 0.5 ? yds : 0.0;
        return yds * manufactured_solution(x[0], x[1]);
    };

    pb.f = [gs, c](int, double y, int) { return gs + c * y; };
    pb.f_y = [c](int, double, int) { return c; };
    pb.f_yy = [](int, double, int) { return 0.0; };
    pb.f0 = [target, beta](int e, double y, int v) {
        const double d = y - target(e);
        return 0.5 * d * d + beta[v];
    };
    pb.f0_y = [target](int e, double y, int) { return y - target(e); };
    pb.f0_yy = [](int, double, int) { return 1.0; };
    return pb;
}

bool region_free_inside(const RegionFreeParams& p, double x1, double x2) {
    return x1 >= p.box[0] && x1 <= p.box[1] && x2 >= p.box[2] && x2 <= p.box[3];
}

Problem make_region_free(int m, const RegionFreeParams& p) {
    if (p.reaction > 0.0) throw std::invalid_argument("region-free: reaction coefficient must be <= 0");
    Problem pb;
    pb.name = "region-free";
    pb.mesh = build_mesh(m);
    pb.label_count = 2;

    auto inside = std::make_shared<std::vector<char>>();
    inside->resize(static_cast<std::size_t>(pb.mesh.element_count()));
    for (int e = 0; e < pb.mesh.element_count(); ++e) {
        const auto& c = pb.mesh.centroid[static_cast<std::size_t>(e)];
        (*inside)[static_cast<std::size_t>(e)] = region_free_inside(p, c[0], c[1]) ? 1 : 0;
    }

    const SMat base = SMat::identity(2);
    spread_coefficient(pb, [&](int e, int v) {
        if (v == 1 && !(*inside)[static_cast<std::size_t>(e)])
            return SMat::identity(2) * (1.0 + p.a_gap);
        return base;
    });
    set_ellipticity(pb);

    auto centroids = std::make_shared<std::vector<std::array<double, 2>>>(pb.mesh.centroid);
    const double c = p.reaction, gs = p.g_scale, yds = p.yd_scale, bout = p.beta_out;

    pb.f = [gs, c](int, double y, int) { return gs + c * y; };
    pb.f_y = [c](int, double, int) { return c; };
    pb.f_yy = [](int, double, int) { return 0.0; };
    pb.f0 = [centroids, inside, yds, bout](int e, double y, int v) {
        const auto& x = (*centroids)[static_cast<std::size_t>(e)];
        const double d = y - yds * manufactured_solution(x[0], x[1]);
        const double penalty = (v == 1 && !(*inside)[static_cast<std::size_t>(e)]) ? bout : 0.0;
        return 0.5 * d * d + penalty;
    };
    pb.f0_y = [centroids, yds](int e, double y, int) {
        const auto& x = (*centroids)[static_cast<std::size_t>(e)];
        return y - yds * manufactured_solution(x[0], x[1]);
    };
    pb.f0_yy = [](int, double, int) { return 1.0; };
    return pb;
}

RankOneGapInstance make_rank_one_gap(int m, const RankOneGapParams& p) {
    if (p.reaction > 0.0) throw std::invalid_argument("rank-one-gap: reaction coefficient must be <= 0");
    const Vec q = Vec{p.qx, p.qy}.normalized();
    const SMat a0 = SMat::diag({p.a0, p.a1});
    const SMat a1 = a0 + SMat::outer(q) * p.gap;
    if (!is_spd(a0) || !is_spd(a1)) throw std::invalid_argument("rank-one-gap: phases must be SPD");

    RankOneGapInstance inst;
    Problem& pb = inst.problem;
    pb.name = "rank-one-gap";
    pb.mesh = build_mesh(m);
    pb.label_count = 2;
    spread_coefficient(pb, [&](int, int v) { return v == 0 ? a0 : a1; });
    set_ellipticity(pb);

    const int ne = pb.mesh.element_count();
    inst.incumbent.assign(static_cast<std::size_t>(ne), 0);
    inst.candidate.assign(static_cast<std::size_t>(ne), 1);

    const double c = p.reaction, gs = p.g_scale;
    pb.f = [gs, c](int, double y, int) { return gs + c * y; };
    pb.f_y = [c](int, double, int) { return c; };
    pb.f_yy = [](int, double, int) { return 0.0; };

    // Calibration stage 1: incumbent state fixes the tracking target.
    auto y_d = std::make_shared<std::vector<double>>(static_cast<std::size_t>(ne), 0.0);
    auto beta1 = std::make_shared<std::vector<double>>(static_cast<std::size_t>(ne), 0.0);
    pb.f0 = [y_d, beta1](int e, double y, int v) {
        const double d = y - (*y_d)[static_cast<std::size_t>(e)];
        return 0.5 * d * d + (v == 1 ? (*beta1)[static_cast<std::size_t>(e)] : 0.0);
    };
    pb.f0_y = [y_d](int e, double y, int) { return y - (*y_d)[static_cast<std::size_t>(e)]; };
    pb.f0_yy = [](int, double, int) { return 1.0; };

    SolverOptions tight;
    tight.cg_rtol = 1e-13;
    tight.newton_rtol = 1e-12;
    const StateField ybar = solve_state(pb, inst.incumbent, tight);
    for (int e = 0; e < ne; ++e)
        (*y_d)[static_cast<std::size_t>(e)] = (1.0 + p.delta) * centroid_value(pb.mesh, ybar, e);

    // Stage 2: adjoint under the calibrated target, then directions and the
    // per-element label-1 cost offset that closes the singularity equalities.
    const StateField psibar = solve_adjoint(pb, inst.incumbent, ybar, tight);
    inst.direction.assign(static_cast<std::size_t>(ne), Vec{1.0, 0.0});
    const std::vector<CellData> cells = make_cells(pb, inst.incumbent, ybar, psibar);
    for (int e = 0; e < ne; ++e) {
        const CellData& cell = cells[static_cast<std::size_t>(e)];
        const double coupling = p.gap * q.dot(cell.grad_y) * q.dot(cell.grad_psi);
        if (p.maximizer_mode) {
            const Vec ell = select_direction(cell, 1);
            inst.direction[static_cast<std::size_t>(e)] = ell;
            const double target = foc_terms(cell, 1).max_term;
            // h_gap currently equals beta-free gap = coupling; shift it to the
            // attained maximum of the quotient.
            (*beta1)[static_cast<std::size_t>(e)] = target - coupling;
        } else {
            inst.direction[static_cast<std::size_t>(e)] = rot90(q);
            (*beta1)[static_cast<std::size_t>(e)] = -coupling;
        }
    }
    return inst;
}

}  // namespace ellopt
