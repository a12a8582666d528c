// SPDX-License-Identifier: Apache-2.0
#include "ellopt/homogenize.hpp"

#include <cmath>
#include <stdexcept>

#include "ellopt/util.hpp"

namespace ellopt {

namespace {

double fractional(double t) { return t - std::floor(t); }

}  // namespace

Vec RationalDirection::value() const {
    const int n = dim();
    if (n < 1 || n > 3 || static_cast<int>(den.size()) != n)
        throw std::invalid_argument("rational direction: bad shape");
    Vec v(n);
    bool nonzero = false;
    for (int i = 0; i < n; ++i) {
        if (den[static_cast<std::size_t>(i)] <= 0)
            throw std::invalid_argument("rational direction: denominators must be positive");
        v[i] = static_cast<double>(num[static_cast<std::size_t>(i)]) /
               static_cast<double>(den[static_cast<std::size_t>(i)]);
        nonzero = nonzero || num[static_cast<std::size_t>(i)] != 0;
    }
    if (!nonzero) throw std::invalid_argument("rational direction: zero vector");
    return v;
}

void Laminate::validate(int element_count) const {
    if (!is_spd(phase_b) || !is_spd(phase_c))
        throw std::invalid_argument("laminate: phases must be SPD");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("laminate: volume fraction must lie in (0,1)");
    if (directions.empty()) throw std::invalid_argument("laminate: no direction");
    for (const RationalDirection& d : directions) (void)d.value();
    if (!region_of_element.empty()) {
        if (static_cast<int>(region_of_element.size()) != element_count)
            throw std::invalid_argument("laminate: region map does not cover the mesh");
        for (int r : region_of_element)
            if (r < 0 || r >= static_cast<int>(directions.size()))
                throw std::invalid_argument("laminate: region index out of range");
    }
}

ElementMatrixField laminate_field(const Laminate& lam, const Mesh& mesh, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("laminate_field: eps must be positive");
    lam.validate(mesh.element_count());

    std::vector<Vec> mu;
    mu.reserve(lam.directions.size());
    for (const RationalDirection& d : lam.directions) mu.push_back(d.value());

    ElementMatrixField field(static_cast<std::size_t>(mesh.element_count()));
    for (int e = 0; e < mesh.element_count(); ++e) {
        const int region = lam.region_of_element.empty() ? 0 : lam.region_of_element[static_cast<std::size_t>(e)];
        const auto& c = mesh.centroid[static_cast<std::size_t>(e)];
        const Vec& m = mu[static_cast<std::size_t>(region)];
        const double phase = fractional((c[0] * m[0] + c[1] * m[1]) / eps);
        field[static_cast<std::size_t>(e)] = phase < lam.alpha ? lam.phase_b : lam.phase_c;
    }
    return field;
}

ElementMatrixField hlimit_laminate(const Laminate& lam, const Mesh& mesh) {
    lam.validate(mesh.element_count());
    const double a = lam.alpha;
    const SMat diff = lam.phase_b - lam.phase_c;

    std::vector<SMat> per_region;
    per_region.reserve(lam.directions.size());
    for (const RationalDirection& d : lam.directions) {
        const Vec ell = d.value();
        const double denom = (1.0 - a) * lam.phase_b.quad(ell) + a * lam.phase_c.quad(ell);
        const Vec w = diff.apply(ell);
        per_region.push_back(lam.phase_b * a + lam.phase_c * (1.0 - a) -
                             SMat::outer(w) * (a * (1.0 - a) / denom));
    }

    ElementMatrixField field(static_cast<std::size_t>(mesh.element_count()));
    for (int e = 0; e < mesh.element_count(); ++e) {
        const int region = lam.region_of_element.empty() ? 0 : lam.region_of_element[static_cast<std::size_t>(e)];
        field[static_cast<std::size_t>(e)] = per_region[static_cast<std::size_t>(region)];
    }
    return field;
}

std::vector<SweepRow> epsilon_sweep(const Laminate& lam, const Mesh& mesh,
                                    const ElementScalarField& g, const std::vector<double>& eps_list,
                                    double cg_rtol, int threads, StateField* homogenized) {
    lam.validate(mesh.element_count());
    for (double eps : eps_list)
        if (eps < 8.0 / mesh.m - 1e-14)
            throw std::invalid_argument("epsilon_sweep: eps under-resolved, need eps >= 8/m");

    const ElementScalarField zero_reaction(static_cast<std::size_t>(mesh.element_count()), 0.0);
    CgOptions cg;
    cg.rtol = cg_rtol;

    LinearSystem hom_sys = assemble(mesh, hlimit_laminate(lam, mesh), zero_reaction);
    set_rhs(hom_sys, load_scalar(mesh, g));
    const StateField y_hom = solve_cg(mesh, hom_sys, cg);
    if (homogenized) *homogenized = y_hom;

    std::vector<SweepRow> rows(eps_list.size());
    run_jobs(static_cast<int>(eps_list.size()), threads, [&](int i) {
        const double eps = eps_list[static_cast<std::size_t>(i)];
        LinearSystem sys = assemble(mesh, laminate_field(lam, mesh, eps), zero_reaction);
        set_rhs(sys, load_scalar(mesh, g));
        const StateField y_eps = solve_cg(mesh, sys, cg);
        const FieldNorms err = norms(mesh, subtract(y_eps, y_hom));
        rows[static_cast<std::size_t>(i)] = {eps, err.l2, err.h1_semi};
    });
    return rows;
}

double decimal_measure(const std::vector<long>& nu, double alpha, int grid_points) {
    const int n = static_cast<int>(nu.size());
    if (n < 1 || n > 3) throw std::invalid_argument("decimal_measure: dimension must be 1..3");
    bool nonzero = false;
    for (long k : nu) nonzero = nonzero || k != 0;
    if (!nonzero) throw std::invalid_argument("decimal_measure: zero vector");
    if (grid_points < 100) throw std::invalid_argument("decimal_measure: need at least 100 grid points");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("decimal_measure: alpha must lie in (0,1)");

    const double h = 1.0 / grid_points;
    long hits = 0;
    const double n0 = static_cast<double>(nu[0]);
    const double n1 = n >= 2 ? static_cast<double>(nu[1]) : 0.0;
    const double n2 = n >= 3 ? static_cast<double>(nu[2]) : 0.0;

    for (int i = 0; i < grid_points; ++i) {
        const double s0 = n0 * (i + 0.5) * h;
        if (n == 1) {
            if (fractional(s0) < alpha) ++hits;
            continue;
        }
        for (int j = 0; j < grid_points; ++j) {
            const double s1 = s0 + n1 * (j + 0.5) * h;
            if (n == 2) {
                if (fractional(s1) < alpha) ++hits;
                continue;
            }
            for (int k = 0; k < grid_points; ++k)
                if (fractional(s1 + n2 * (k + 0.5) * h) < alpha) ++hits;
        }
    }
    double cells = static_cast<double>(grid_points);
    for (int d = 1; d < n; ++d) cells *= grid_points;
    return static_cast<double>(hits) / cells;
}

Corrector1d corrector_1d(const SMat& b, const SMat& c, double alpha, const Vec& mu) {
    if (!is_spd(b) || !is_spd(c)) throw std::invalid_argument("corrector_1d: phases must be SPD");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("corrector_1d: volume fraction must lie in (0,1)");
    const Vec m = mu.normalized();
    const double qb = b.quad(m), qc = c.quad(m);
    const double denom = alpha * qc + (1.0 - alpha) * qb;

    Corrector1d out;
    out.flux = (b.apply(m) * (alpha * qc) + c.apply(m) * ((1.0 - alpha) * qb)) * (1.0 / denom);
    out.slope_b = (out.flux - b.apply(m)) * (1.0 / qb);
    out.slope_c = (out.flux - c.apply(m)) * (1.0 / qc);
    return out;
}

SMat corrector_reconstruction(const SMat& b, const SMat& c, double alpha, const Vec& mu,
                              const Corrector1d& corr) {
    const Vec m = mu.normalized();
    const int n = b.dim();
    const Vec bm = b.apply(m), cm = c.apply(m);
    SMat rec(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double gij = alpha * (b(i, j) + bm[i] * corr.slope_b[j]) +
                               (1.0 - alpha) * (c(i, j) + cm[i] * corr.slope_c[j]);
            const double gji = alpha * (b(j, i) + bm[j] * corr.slope_b[i]) +
                               (1.0 - alpha) * (c(j, i) + cm[j] * corr.slope_c[i]);
            rec.set(i, j, 0.5 * (gij + gji));
        }
    return rec;
}

}  // namespace ellopt
