#include <gtest/gtest.h>

#include <cmath>

#include "lattes/weierstrass.hpp"
#include "support.hpp"

using namespace lattes;
using lattes::testing::c;
using lattes::testing::Gen;

namespace {

const Lattice kSquare = lattice_new(c("i"));
const Lattice kHex = lattice_new(c("1/2+sqrt(3)/2i"));

cd random_point(Gen& g, const Lattice& lat) {
    for (;;) {
        const cd z = embed(lat, g.real(-2, 2), g.real(-2, 2));
        if (detail::reduce(lat, z).dist > 0.05) return z;
    }
}

}  // namespace

TEST(Invariants, LemniscaticClosedForm) {
    const auto [g2, g3] = g_invariants(kSquare);
    const double expected = std::pow(std::tgamma(0.25), 8) / (16 * kPi * kPi);
    EXPECT_NEAR(g2.real(), expected, 1e-9);
    EXPECT_NEAR(g2.imag(), 0.0, 1e-10);
    EXPECT_NEAR(g2.real(), 189.0727201292, 1e-8);
    EXPECT_LT(std::abs(g3), 1e-10);
}

TEST(Invariants, HexagonalG2Vanishes) {
    const auto [g2, g3] = g_invariants(kHex);
    EXPECT_LT(std::abs(g2), 1e-10);
    EXPECT_GT(std::abs(g3), 1.0);
}

TEST(Invariants, MatchDirectSums) {
    for (const char* w : {"i", "1/2+sqrt(3)/2i", "1/3+2i", "-1/5+4/5i"}) {
        const Lattice lat = lattice_new(c(w));
        const auto [g2, g3] = g_invariants(lat);
        const auto [d2, d3] = g_invariants_direct(lat, 300);
        EXPECT_LT(std::abs(g2 - d2), 1e-3 * std::max(1.0, std::abs(g2))) << w;
        EXPECT_LT(std::abs(g3 - d3), 1e-3 * std::max(1.0, std::abs(g3))) << w;
    }
}

TEST(Invariants, BasisChangeAndHomogeneity) {
    const auto [a2, a3] = g_invariants(kSquare);
    const auto [b2, b3] = g_invariants(lattice_new(c("1+i")));
    EXPECT_LT(std::abs(a2 - b2), 1e-9);
    EXPECT_LT(std::abs(a3 - b3), 1e-9);
    // Z + (i/2) Z = (i/2) (Z + 2i Z): g2 scales by (i/2)^-4 = 16, g3 by (i/2)^-6 = -64.
    const auto [h2, h3] = g_invariants(lattice_new(c("1/2i")));
    const auto [t2, t3] = g_invariants(lattice_new(c("2i")));
    EXPECT_LT(std::abs(h2 - 16.0 * t2), 1e-9 * std::abs(h2));
    EXPECT_LT(std::abs(h3 + 64.0 * t3), 1e-9 * std::abs(h3));
}

TEST(Wp, SquareLatticeHalfPeriod) {
    EXPECT_LT(std::abs(wp(kSquare, cd(0.5, 0.5))), 1e-12);
    const double e1 = wp(kSquare, cd(0.5, 0.0)).real();
    EXPECT_NEAR(e1, std::sqrt(g_invariants(kSquare).first.real() / 4), 1e-10);
    EXPECT_LT(std::abs(wp_prime(kSquare, cd(0.5, 0.0))), 1e-10);
}

TEST(Wp, NearPole) {
    EXPECT_THROW(wp(kSquare, cd(1e-8, 0.0)), Error);
    EXPECT_THROW(wp(kSquare, cd(1.0, 1.0 + 1e-9)), Error);
    try {
        wp_prime(kHex, cd(0.0, 0.0));
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NearPole);
    }
}

TEST(Wp, MatchesDirectSum) {
    Gen g(51);
    for (const Lattice& lat : {kSquare, kHex}) {
        for (int i = 0; i < 10; ++i) {
            const cd z = embed(lat, g.real(0.1, 0.9), g.real(0.1, 0.9));
            const cd fast = wp(lat, z), slow = wp_direct(lat, z, 300);
            ASSERT_LT(std::abs(fast - slow), 1e-3 * std::max(1.0, std::abs(fast)));
        }
    }
}

TEST(Property, DifferentialEquation) {
    Gen g(52);
    for (const char* w : {"i", "1/2+sqrt(3)/2i", "1/3+2i", "3/2i"}) {
        const Lattice lat = lattice_new(c(w));
        for (int i = 0; i < 50; ++i) ASSERT_LT(wp_ode_residual(lat, random_point(g, lat)), 1e-10) << w;
    }
}

TEST(Property, EvenAndPeriodic) {
    Gen g(53);
    for (const Lattice& lat : {kSquare, kHex}) {
        const cd tau = lat.omega_float();
        for (int i = 0; i < 100; ++i) {
            const cd z = random_point(g, lat);
            const cd p = wp(lat, z);
            const double scale = std::max(1.0, std::abs(p));
            ASSERT_LT(std::abs(wp(lat, -z) - p) / scale, 1e-9);
            ASSERT_LT(std::abs(wp(lat, z + 1.0) - p) / scale, 1e-9);
            ASSERT_LT(std::abs(wp(lat, z + tau) - p) / scale, 1e-9);
            ASSERT_LT(std::abs(wp(lat, z - 3.0 * tau + 2.0) - p) / scale, 1e-9);
        }
    }
}

TEST(Property, DerivativeMatchesFiniteDifference) {
    Gen g(54);
    for (int i = 0; i < 50; ++i) {
        const cd z = random_point(g, kHex);
        const double h = 1e-5;
        const cd fd = (wp(kHex, z + h) - wp(kHex, z - h)) / (2 * h);
        const cd d = wp_prime(kHex, z);
        ASSERT_LT(std::abs(fd - d), 1e-4 * std::max(1.0, std::abs(d)));
    }
}

TEST(Property, DuplicationFormula) {
    Gen g(55);
    for (const Lattice& lat : {kSquare, kHex, lattice_new(c("1/5+3/2i"))}) {
        const auto [g2, g3] = g_invariants(lat);
        for (int i = 0; i < 50; ++i) {
            const cd z = random_point(g, lat);
            if (detail::reduce(lat, 2.0 * z).dist < 0.05) continue;
            const cd lhs = wp(lat, 2.0 * z);
            ASSERT_LT(std::abs(lhs - duplication(wp(lat, z), g2, g3)), 1e-8 * std::max(1.0, std::abs(lhs)));
        }
    }
}
