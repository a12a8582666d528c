// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ellopt/tensor.hpp"
#include "test_support.hpp"

using namespace ellopt;
using namespace ellopt::testing;

TEST_CASE("spd_inverse basics") {
    CHECK((spd_inverse(SMat::identity(2)) - SMat::identity(2)).frobenius() < 1e-14);
    CHECK((spd_inverse(SMat::diag({2.0, 4.0})) - SMat::diag({0.5, 0.25})).frobenius() < 1e-14);
    CHECK_THROWS_AS((void)spd_inverse(SMat::diag({1.0, -1.0})), std::invalid_argument);
    CHECK_THROWS_AS((void)spd_inverse(SMat::diag({1.0, 0.0, 1.0})), std::invalid_argument);
}

TEST_CASE("spd_inverse residual oracle over random SPD") {
    auto rng = make_rng(11);
    for (int dim : {2, 3})
        for (int trial = 0; trial < 500; ++trial) {
            const SMat m = random_spd(rng, dim, 0.1, 10.0);
            const SMat inv = spd_inverse(m);
            // ||M M^-1 - I||_F via congruence-free multiply.
            double res = 0.0;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < dim; ++k) s += m(i, k) * inv(k, j);
                    const double want = i == j ? 1.0 : 0.0;
                    res += (s - want) * (s - want);
                }
            CHECK(std::sqrt(res) <= 1e-10);
        }
}

TEST_CASE("spd_sqrt squares back") {
    CHECK((spd_sqrt(SMat::identity(3)) - SMat::identity(3)).frobenius() < 1e-14);
    CHECK((spd_sqrt(SMat::diag({4.0, 9.0})) - SMat::diag({2.0, 3.0})).frobenius() < 1e-14);

    auto rng = make_rng(12);
    for (int dim : {2, 3})
        for (int trial = 0; trial < 500; ++trial) {
            const SMat m = random_spd(rng, dim, 0.1, 10.0);
            const SMat r = spd_sqrt(m);
            CHECK(min_eigenvalue(r) > 0.0);
            CHECK((congruence(r, SMat::identity(dim)) - m).frobenius() <= 1e-10);
        }
}

TEST_CASE("pair_max_bilinear closed form and tie-breaks") {
    SUBCASE("aligned") {
        const auto got = pair_max_bilinear(Vec{1, 0}, Vec{1, 0});
        CHECK(got.value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(got.maximizer[0] == doctest::Approx(1.0));
        CHECK(std::abs(got.maximizer[1]) < 1e-14);
    }
    SUBCASE("antiparallel gives zero with orthogonal maximizer") {
        const auto got = pair_max_bilinear(Vec{1, 0}, Vec{-1, 0});
        CHECK(got.value == doctest::Approx(0.0));
        CHECK(std::abs(got.maximizer[0]) < 1e-14);
        CHECK(std::abs(std::abs(got.maximizer[1]) - 1.0) < 1e-14);
        // Spec tie-break: 90-degree rotation of xi/|xi|.
        CHECK(got.maximizer[1] == doctest::Approx(1.0));
    }
    SUBCASE("orthogonal inputs") {
        const auto got = pair_max_bilinear(Vec{1, 0}, Vec{0, 1});
        CHECK(got.value == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(got.maximizer[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(got.maximizer[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(circle_grid_max(Vec{1, 0}, Vec{0, 1}) == doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("zero input") {
        const auto got = pair_max_bilinear(Vec{0, 0}, Vec{1, 2});
        CHECK(got.value == 0.0);
        CHECK(got.maximizer[0] == 1.0);
        CHECK(got.maximizer[1] == 0.0);
    }
    SUBCASE("dim 1 rejected") {
        CHECK_THROWS_AS((void)pair_max_bilinear(Vec{1.0}, Vec{1.0}), std::invalid_argument);
    }
}

TEST_CASE("pair_max_bilinear matches dense grid search") {
    auto rng = make_rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec xi = random_vec(rng, 2, -3.0, 3.0);
        const Vec eta = random_vec(rng, 2, -3.0, 3.0);
        const auto got = pair_max_bilinear(xi, eta);
        CHECK(got.value == doctest::Approx(circle_grid_max(xi, eta, 100000)).epsilon(1e-6));
        // Attainment by substitution.
        CHECK(std::abs(got.maximizer.dot(xi) * got.maximizer.dot(eta) - got.value) <= 1e-10);
        CHECK(got.maximizer.is_unit(1e-12));
    }
}

TEST_CASE("pair_max maximizer attains in dim 3") {
    auto rng = make_rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec xi = random_vec(rng, 3, -2.0, 2.0);
        const Vec eta = random_vec(rng, 3, -2.0, 2.0);
        const auto got = pair_max_bilinear(xi, eta);
        CHECK(std::abs(got.maximizer.dot(xi) * got.maximizer.dot(eta) - got.value) <= 1e-10);
    }
}

TEST_CASE("laminate_matrix examples") {
    SUBCASE("equal phases collapse") {
        const SMat got = laminate_matrix(SMat::identity(2), SMat::identity(2), 0.3, Vec{1, 0});
        CHECK((got - SMat::identity(2)).frobenius() < 1e-14);
    }
    SUBCASE("scalar phases give harmonic/arithmetic diagonal") {
        const SMat got = laminate_matrix(SMat::identity(2), SMat::identity(2) * 4.0, 0.5, Vec{1, 0});
        CHECK(got(0, 0) == doctest::Approx(1.6).epsilon(1e-13));
        CHECK(got(1, 1) == doctest::Approx(2.5).epsilon(1e-13));
        CHECK(std::abs(got(0, 1)) < 1e-14);
    }
    SUBCASE("direction scale invariance") {
        auto rng = make_rng(15);
        for (int trial = 0; trial < 100; ++trial) {
            const SMat b1 = random_spd(rng, 2), b2 = random_spd(rng, 2);
            const Vec mu = random_unit(rng, 2);
            const SMat g1 = laminate_matrix(b1, b2, 0.4, mu);
            const SMat g2 = laminate_matrix(b1, b2, 0.4, mu * -3.7);
            CHECK((g1 - g2).frobenius() < 1e-12);
        }
    }
}

TEST_CASE("laminate bounds: harmonic <= G <= arithmetic") {
    auto rng = make_rng(16);
    std::uniform_real_distribution<double> adist(0.05, 0.95);
    for (int dim : {2, 3})
        for (int trial = 0; trial < 500; ++trial) {
            const SMat b1 = random_spd(rng, dim, 0.3, 5.0);
            const SMat b2 = random_spd(rng, dim, 0.3, 5.0);
            const double alpha = adist(rng);
            const Vec mu = random_unit(rng, dim);
            const SMat g = laminate_matrix(b1, b2, alpha, mu);
            const SMat arith = b1 * alpha + b2 * (1.0 - alpha);
            const SMat harm = spd_inverse(spd_inverse(b1) * alpha + spd_inverse(b2) * (1.0 - alpha));
            CHECK(min_eigenvalue(arith - g) >= -1e-10);
            CHECK(min_eigenvalue(g - harm) >= -1e-10);
        }
}

TEST_CASE("harmonic identity residual") {
    const SMat b = SMat::diag({1.0, 2.0});
    CHECK(harmonic_identity_residual(b, b, 0.5) < 1e-14);
    CHECK(harmonic_identity_residual(SMat::diag({1.0, 2.0}), SMat::diag({3.0, 1.0}), 0.3) <= 1e-12);

    auto rng = make_rng(17);
    std::uniform_real_distribution<double> adist(0.05, 0.95);
    double worst = 0.0;
    for (int dim : {2, 3})
        for (int trial = 0; trial < 500; ++trial) {
            const SMat b1 = random_spd(rng, dim, 0.3, 5.0);
            const SMat b2 = random_spd(rng, dim, 0.3, 5.0);
            worst = std::max(worst, harmonic_identity_residual(b1, b2, adist(rng)));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("eigen decomposition reconstructs") {
    auto rng = make_rng(18);
    for (int dim : {1, 2, 3})
        for (int trial = 0; trial < 300; ++trial) {
            const SMat m = random_spd(rng, dim, 0.01, 20.0);
            const auto e = sym_eigen(m);
            SMat rec(dim);
            for (int k = 0; k < dim; ++k)
                for (int i = 0; i < dim; ++i)
                    for (int j = i; j < dim; ++j)
                        rec.add(i, j, e.values[static_cast<std::size_t>(k)] *
                                          e.vectors[static_cast<std::size_t>(k)][i] *
                                          e.vectors[static_cast<std::size_t>(k)][j]);
            CHECK((rec - m).frobenius() <= 1e-11 * (1.0 + m.frobenius()));
            for (int k = 1; k < dim; ++k)
                CHECK(e.values[static_cast<std::size_t>(k)] >= e.values[static_cast<std::size_t>(k - 1)]);
        }
}

TEST_CASE("orthogonal_unit is orthogonal and deterministic") {
    auto rng = make_rng(19);
    for (int dim : {2, 3})
        for (int trial = 0; trial < 100; ++trial) {
            const Vec v = random_unit(rng, dim);
            const Vec w = orthogonal_unit(v);
            CHECK(std::abs(w.dot(v)) < 1e-12);
            CHECK(w.is_unit(1e-12));
        }
}
