// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "ellopt/fem.hpp"
#include "ellopt/problem.hpp"
#include "ellopt/semilinear.hpp"
#include "test_support.hpp"

using namespace ellopt;
using namespace ellopt::testing;

namespace {

ElementScalarField constant_field(const Mesh& mesh, double v) {
    return ElementScalarField(static_cast<std::size_t>(mesh.element_count()), v);
}

ElementMatrixField identity_field(const Mesh& mesh) {
    return ElementMatrixField(static_cast<std::size_t>(mesh.element_count()), SMat::identity(2));
}

double l2_error_vs(const Mesh& mesh, const StateField& y,
                   const std::function<double(double, double)>& exact) {
    double err = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& c = mesh.centroid[static_cast<std::size_t>(e)];
        const double d = centroid_value(mesh, y, e) - exact(c[0], c[1]);
        err += mesh.area[static_cast<std::size_t>(e)] * d * d;
    }
    return std::sqrt(err);
}

double h1_error_vs(const Mesh& mesh, const StateField& y,
                   const std::function<Vec(double, double)>& exact_grad) {
    double err = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& c = mesh.centroid[static_cast<std::size_t>(e)];
        const Vec d = element_gradient(mesh, y, e) - exact_grad(c[0], c[1]);
        err += mesh.area[static_cast<std::size_t>(e)] * d.dot(d);
    }
    return std::sqrt(err);
}

}  // namespace

TEST_CASE("build_mesh counting and geometry") {
    CHECK_THROWS_AS((void)build_mesh(1), std::invalid_argument);

    const Mesh m2 = build_mesh(2);
    CHECK(m2.node_count() == 9);
    CHECK(m2.element_count() == 8);
    int boundary = 0;
    for (auto b : m2.boundary) boundary += b;
    CHECK(boundary == 8);

    const Mesh m4 = build_mesh(4);
    CHECK(m4.node_count() == 25);
    CHECK(m4.element_count() == 32);

    for (int m : {2, 5, 9}) {
        const Mesh mesh = build_mesh(m);
        double total = 0.0;
        for (double a : mesh.area) {
            CHECK(a == doctest::Approx(0.5 / (m * m)).epsilon(1e-12));
            total += a;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("assemble: Laplacian structure") {
    const Mesh mesh = build_mesh(4);
    const FullMatrix full = assemble_full(mesh, identity_field(mesh), constant_field(mesh, 0.0));

    // Constants lie in the kernel before boundary elimination.
    const std::vector<double> sums = full.row_sum();
    for (double s : sums) CHECK(std::abs(s) < 1e-13);

    // Interior row of the structured P1 Laplacian: 4 on the diagonal,
    // -1 to the four axis neighbours, 0 on the diagonal couplings.
    const int center = mesh.node_id(2, 2);
    double diag = 0.0, off_axis = 0.0;
    for (int k = full.row_ptr[static_cast<std::size_t>(center)]; k < full.row_ptr[static_cast<std::size_t>(center) + 1]; ++k) {
        const int j = full.col[static_cast<std::size_t>(k)];
        if (j == center) diag = full.val[static_cast<std::size_t>(k)];
        if (j == mesh.node_id(1, 1) || j == mesh.node_id(3, 3)) off_axis += std::abs(full.val[static_cast<std::size_t>(k)]);
    }
    CHECK(diag == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(off_axis < 1e-13);
}

TEST_CASE("assemble: linearity in the coefficient") {
    const Mesh mesh = build_mesh(3);
    auto rng = make_rng(21);
    ElementMatrixField coeff(static_cast<std::size_t>(mesh.element_count()));
    for (auto& c : coeff) c = random_spd(rng, 2);
    ElementMatrixField doubled = coeff;
    for (auto& c : doubled) c = c * 2.0;

    const FullMatrix a = assemble_full(mesh, coeff, constant_field(mesh, 0.0));
    const FullMatrix b = assemble_full(mesh, doubled, constant_field(mesh, 0.0));
    REQUIRE(a.val.size() == b.val.size());
    for (std::size_t k = 0; k < a.val.size(); ++k)
        CHECK(b.val[k] == doctest::Approx(2.0 * a.val[k]).epsilon(1e-13));
}

TEST_CASE("assemble rejects negative reaction") {
    const Mesh mesh = build_mesh(3);
    CHECK_THROWS_AS((void)assemble(mesh, identity_field(mesh), constant_field(mesh, -1.0)),
                    std::invalid_argument);
}

TEST_CASE("random SPD field solves with CG") {
    const Mesh mesh = build_mesh(8);
    auto rng = make_rng(22);
    ElementMatrixField coeff(static_cast<std::size_t>(mesh.element_count()));
    for (auto& c : coeff) c = random_spd(rng, 2, 0.3, 6.0);
    LinearSystem sys = assemble(mesh, coeff, constant_field(mesh, 0.5));
    set_rhs(sys, load_scalar(mesh, constant_field(mesh, 1.0)));
    CgResult stats;
    const StateField y = solve_cg(mesh, sys, {}, &stats);
    CHECK(stats.converged);

    // Galerkin residual check.
    std::vector<double> x(static_cast<std::size_t>(sys.unknowns));
    for (int u = 0; u < sys.unknowns; ++u)
        x[static_cast<std::size_t>(u)] = y[static_cast<std::size_t>(sys.interior_to_node[static_cast<std::size_t>(u)])];
    std::vector<double> Ax(x.size());
    apply_system(sys, x, Ax);
    double rn = 0.0, bn = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        rn += (Ax[i] - sys.rhs[i]) * (Ax[i] - sys.rhs[i]);
        bn += sys.rhs[i] * sys.rhs[i];
    }
    CHECK(std::sqrt(rn) <= 1e-10 * std::sqrt(bn));

    for (int i = 0; i < mesh.node_count(); ++i)
        if (mesh.boundary[static_cast<std::size_t>(i)]) CHECK(y[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("load_scalar properties") {
    const Mesh mesh = build_mesh(5);
    const std::vector<double> ones = load_scalar(mesh, constant_field(mesh, 1.0));
    double total = 0.0;
    for (double v : ones) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> zeros = load_scalar(mesh, constant_field(mesh, 0.0));
    for (double v : zeros) CHECK(v == 0.0);

    ElementScalarField g = constant_field(mesh, 0.0);
    g[7] = 1.0;
    const std::vector<double> spike = load_scalar(mesh, g);
    int nonzero = 0;
    for (double v : spike)
        if (v != 0.0) {
            CHECK(v == doctest::Approx(mesh.area[7] / 3.0));
            ++nonzero;
        }
    CHECK(nonzero == 3);
}

TEST_CASE("load_divergence: constants and weak-form identity") {
    const Mesh mesh = build_mesh(6);
    SUBCASE("constant field gives zero") {
        const StateField w(static_cast<std::size_t>(mesh.node_count()), 3.25);
        for (double v : load_divergence(mesh, identity_field(mesh), w)) CHECK(std::abs(v) < 1e-14);
    }
    SUBCASE("zero coefficient gives zero") {
        const ElementMatrixField zero(static_cast<std::size_t>(mesh.element_count()), SMat(2));
        StateField w(static_cast<std::size_t>(mesh.node_count()));
        for (int i = 0; i < mesh.node_count(); ++i) w[static_cast<std::size_t>(i)] = mesh.nodes[static_cast<std::size_t>(i)][0];
        for (double v : load_divergence(mesh, zero, w)) CHECK(v == 0.0);
    }
    SUBCASE("matches -load_scalar(g) for a Laplace solve") {
        ElementScalarField g(static_cast<std::size_t>(mesh.element_count()));
        for (int e = 0; e < mesh.element_count(); ++e) {
            const auto& c = mesh.centroid[static_cast<std::size_t>(e)];
            g[static_cast<std::size_t>(e)] = std::sin(3.0 * c[0]) + c[1];
        }
        LinearSystem sys = assemble(mesh, identity_field(mesh), constant_field(mesh, 0.0));
        set_rhs(sys, load_scalar(mesh, g));
        CgOptions tight;
        tight.rtol = 1e-14;
        const StateField w = solve_cg(mesh, sys, tight);
        const std::vector<double> div = load_divergence(mesh, identity_field(mesh), w);
        const std::vector<double> lg = load_scalar(mesh, g);
        for (int i = 0; i < mesh.node_count(); ++i)
            if (!mesh.boundary[static_cast<std::size_t>(i)])
                CHECK(div[static_cast<std::size_t>(i)] ==
                      doctest::Approx(-lg[static_cast<std::size_t>(i)]).epsilon(1e-8).scale(1e-4));
    }
}

TEST_CASE("load_divergence is linear in both arguments") {
    const Mesh mesh = build_mesh(4);
    auto rng = make_rng(23);
    ElementMatrixField t1(static_cast<std::size_t>(mesh.element_count()), SMat(2)),
        t2(static_cast<std::size_t>(mesh.element_count()), SMat(2));
    for (auto& c : t1) c = random_spd(rng, 2);
    for (auto& c : t2) c = random_spd(rng, 2);
    StateField w1(static_cast<std::size_t>(mesh.node_count())), w2(w1);
    for (std::size_t i = 0; i < w1.size(); ++i) {
        w1[i] = random_vec(rng, 2)[0];
        w2[i] = random_vec(rng, 2)[1];
    }
    ElementMatrixField tsum(t1.size(), SMat(2));
    for (std::size_t e = 0; e < t1.size(); ++e) tsum[e] = t1[e] * 2.0 + t2[e] * -0.5;
    StateField wsum(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) wsum[i] = 0.7 * w1[i] - 1.3 * w2[i];

    const auto lhs = load_divergence(mesh, tsum, wsum);
    std::vector<double> rhs(lhs.size(), 0.0);
    const double ct[2] = {2.0, -0.5};
    const double cw[2] = {0.7, -1.3};
    const ElementMatrixField* thetas[2] = {&t1, &t2};
    const StateField* ws[2] = {&w1, &w2};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const auto part = load_divergence(mesh, *thetas[a], *ws[b]);
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += ct[a] * cw[b] * part[i];
        }
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("norms and integrate") {
    const Mesh mesh = build_mesh(7);
    const StateField zero(static_cast<std::size_t>(mesh.node_count()), 0.0);
    const FieldNorms nz = norms(mesh, zero);
    CHECK(nz.l2 == 0.0);
    CHECK(nz.h1_semi == 0.0);

    StateField x1(static_cast<std::size_t>(mesh.node_count()));
    for (int i = 0; i < mesh.node_count(); ++i) x1[static_cast<std::size_t>(i)] = mesh.nodes[static_cast<std::size_t>(i)][0];
    const FieldNorms nx = norms(mesh, x1);
    CHECK(nx.h1_semi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nx.l2 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));

    CHECK(integrate(mesh, constant_field(mesh, 1.0)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("zero rhs gives zero field") {
    const Mesh mesh = build_mesh(4);
    LinearSystem sys = assemble(mesh, identity_field(mesh), constant_field(mesh, 0.0));
    const StateField y = solve_cg(mesh, sys);
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("manufactured convergence: linear isotropic and anisotropic") {
    for (bool aniso : {false, true}) {
        LaplaceMsParams p;
        if (aniso) {
            p.ax = 1.0;
            p.ay = 10.0;
        }
        double prev_l2 = 0.0, prev_h1 = 0.0;
        int step = 0;
        for (int m : {8, 16, 32, 64}) {
            const Problem pb = make_laplace_ms(m, p);
            const ControlField u(static_cast<std::size_t>(pb.mesh.element_count()), 0);
            const StateField y = solve_state(pb, u);
            const double el2 = l2_error_vs(pb.mesh, y, manufactured_solution);
            const double eh1 = h1_error_vs(pb.mesh, y, [](double a, double b) {
                const double pi = std::numbers::pi;
                return Vec{pi * std::cos(pi * a) * std::sin(pi * b),
                           pi * std::sin(pi * a) * std::cos(pi * b)};
            });
            if (step > 0) {
                CHECK(prev_l2 / el2 > 3.5);
                CHECK(prev_l2 / el2 < 4.5);
                CHECK(prev_h1 / eh1 > 1.8);
            }
            prev_l2 = el2;
            prev_h1 = eh1;
            ++step;
        }
    }
}

TEST_CASE("every interior edge is shared by exactly two triangles") {
    const Mesh mesh = build_mesh(6);
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : mesh.elements)
        for (int k = 0; k < 3; ++k) {
            int a = tri[static_cast<std::size_t>(k)], b = tri[static_cast<std::size_t>((k + 1) % 3)];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    for (const auto& [edge, count] : edge_count) {
        const bool both_boundary = mesh.boundary[static_cast<std::size_t>(edge.first)] &&
                                   mesh.boundary[static_cast<std::size_t>(edge.second)];
        if (count == 1)
            CHECK(both_boundary);  // boundary edges only
        else
            CHECK(count == 2);
    }
}

TEST_CASE("subtract length mismatch throws") {
    CHECK_THROWS_AS((void)subtract(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
}
