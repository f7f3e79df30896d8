#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include "lattes/error.hpp"
#include "lattes/lattice.hpp"

namespace lattes {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPoleRadius = 1e-6;
inline constexpr double kDefaultWpTol = 1e-13;

namespace detail {

// csc^2(pi w) from q = exp(2 pi i w), taken on the side where |q| <= 1.
inline cd csc2_pi(cd w) {
    if (w.imag() < 0) w = -w;
    const cd q = std::exp(cd(0, 2 * kPi) * w);
    const cd one_minus = 1.0 - q;
    return -4.0 * q / (one_minus * one_minus);
}

inline cd cot_pi(cd w) {
    const bool flip = w.imag() < 0;
    if (flip) w = -w;
    const cd q = std::exp(cd(0, 2 * kPi) * w);
    const cd c = cd(0, 1) * (q + 1.0) / (q - 1.0);
    return flip ? -c : c;
}

// Sums over n of (w + n)^-4 and (w + n)^-6.
inline cd row_inv4(cd w) {
    const cd k = csc2_pi(w);
    return std::pow(kPi, 4) / 3.0 * (3.0 * k * k - 2.0 * k);
}

inline cd row_inv6(cd w) {
    const cd k = csc2_pi(w);
    return std::pow(kPi, 6) / 15.0 * (15.0 * k * k * k - 15.0 * k * k + 2.0 * k);
}

// Rows |m| > M contribute at most tol: each row term is bounded by
// c * exp(2 pi |Im z|) * r^|m| with r = exp(-2 pi Im tau), summed geometrically.
inline int row_count(double im_tau, double im_z, double tol) {
    const double r = std::exp(-2.0 * kPi * im_tau);
    const double c = 64.0 * std::pow(kPi, 6) * std::exp(2.0 * kPi * std::abs(im_z));
    int m = 1;
    while (c * std::pow(r, m + 1) / (1.0 - r) > tol && m < 100000) ++m;
    return m;
}

struct Reduced {
    cd z;
    double dist;  // distance to the nearest lattice point
};

// z minus the nearest lattice point found among the neighbours of the rounded coordinates.
inline Reduced reduce(const Lattice& lat, cd z) {
    const cd tau = lat.omega_float();
    const double y = z.imag() / tau.imag();
    const double x = z.real() - y * tau.real();
    const double fy = std::round(y);
    const double fx = std::round(x);
    cd best = z - (fx + fy * tau);
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            const cd cand = z - ((fx + i) + (fy + j) * tau);
            if (std::abs(cand) < std::abs(best)) best = cand;
        }
    }
    return {best, std::abs(best)};
}

}  // namespace detail

/// Elliptic invariants g2 = 60 sum' w^-4, g3 = 140 sum' w^-6.
inline std::pair<cd, cd> g_invariants(const Lattice& lat, double tol = kDefaultWpTol) {
    const cd tau = lat.omega_float();
    const int rows = detail::row_count(tau.imag(), 0.0, tol);
    cd g4 = std::pow(kPi, 4) / 45.0;
    cd g6 = 2.0 * std::pow(kPi, 6) / 945.0;
    for (int m = rows; m >= 1; --m) {
        // Rows m and -m agree since the summands are even.
        g4 += 2.0 * detail::row_inv4(double(m) * tau);
        g6 += 2.0 * detail::row_inv6(double(m) * tau);
    }
    return {60.0 * g4, 140.0 * g6};
}

/// Weierstrass p(z; Lambda).
inline cd wp(const Lattice& lat, cd z, double tol = kDefaultWpTol) {
    const auto red = detail::reduce(lat, z);
    if (red.dist < kPoleRadius) throw Error(ErrorCode::NearPole, "z is within 1e-6 of a lattice point");
    const cd tau = lat.omega_float();
    const cd w = red.z;
    const int rows = detail::row_count(tau.imag(), w.imag(), tol);
    const double pi2 = kPi * kPi;
    cd sum = 0.0;
    for (int m = rows; m >= 1; --m) {
        const cd mt = double(m) * tau;
        const cd c = detail::csc2_pi(mt);
        sum += (detail::csc2_pi(w + mt) - c) + (detail::csc2_pi(w - mt) - c);
    }
    sum += detail::csc2_pi(w) - 1.0 / 3.0;
    return pi2 * sum;
}

/// Derivative p'(z) = -2 sum (z - w)^-3.
inline cd wp_prime(const Lattice& lat, cd z, double tol = kDefaultWpTol) {
    const auto red = detail::reduce(lat, z);
    if (red.dist < kPoleRadius) throw Error(ErrorCode::NearPole, "z is within 1e-6 of a lattice point");
    const cd tau = lat.omega_float();
    const cd w = red.z;
    const int rows = detail::row_count(tau.imag(), w.imag(), tol);
    const auto row = [](cd u) { return detail::cot_pi(u) * detail::csc2_pi(u); };
    cd sum = 0.0;
    for (int m = rows; m >= 1; --m) {
        const cd mt = double(m) * tau;
        sum += row(w + mt) + row(w - mt);
    }
    sum += row(w);
    return -2.0 * std::pow(kPi, 3) * sum;
}

/// Plain truncated lattice sum over |n|, |m| <= radius; slow, low accuracy.
inline cd wp_direct(const Lattice& lat, cd z, int radius) {
    const cd tau = lat.omega_float();
    cd sum = 1.0 / (z * z);
    for (int m = -radius; m <= radius; ++m) {
        for (int n = -radius; n <= radius; ++n) {
            if (m == 0 && n == 0) continue;
            const cd w = double(n) + double(m) * tau;
            sum += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
        }
    }
    return sum;
}

/// Plain truncated Eisenstein sums, as an oracle for g_invariants.
inline std::pair<cd, cd> g_invariants_direct(const Lattice& lat, int radius) {
    const cd tau = lat.omega_float();
    cd g4 = 0.0, g6 = 0.0;
    for (int m = -radius; m <= radius; ++m) {
        for (int n = -radius; n <= radius; ++n) {
            if (m == 0 && n == 0) continue;
            const cd w = double(n) + double(m) * tau;
            const cd w2 = w * w;
            g4 += 1.0 / (w2 * w2);
            g6 += 1.0 / (w2 * w2 * w2);
        }
    }
    return {60.0 * g4, 140.0 * g6};
}

/// |p'^2 - (4 p^3 - g2 p - g3)| relative to max(1, |p|^3).
inline double wp_ode_residual(const Lattice& lat, cd z, double tol = kDefaultWpTol) {
    const auto [g2, g3] = g_invariants(lat, tol);
    const cd p = wp(lat, z, tol);
    const cd dp = wp_prime(lat, z, tol);
    const cd r = dp * dp - (4.0 * p * p * p - g2 * p - g3);
    return std::abs(r) / std::max(1.0, std::pow(std::abs(p), 3));
}

/// p(2z) as a rational function of x = p(z).
inline cd duplication(cd x, cd g2, cd g3) {
    const cd x2 = x * x;
    const cd num = x2 * x2 + 0.5 * g2 * x2 + 2.0 * g3 * x + g2 * g2 / 16.0;
    const cd den = 4.0 * x2 * x - g2 * x - g3;
    return num / den;
}

}  // namespace lattes
