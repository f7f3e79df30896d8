#pragma once

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "lattes/numbers.hpp"

namespace lattes::testing {

inline QN q(const char* s) { return qnum_parse(s); }
inline ComplexQ c(const char* s) { return parse_complex(s); }

/// Deterministic generators for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    template <class T>
    const T& pick(const std::vector<T>& xs) {
        return xs[static_cast<std::size_t>(integer(0, static_cast<long>(xs.size()) - 1))];
    }

    Rational rational(long max_num = 50, long max_den = 30) {
        Rational r(integer(-max_num, max_num), integer(1, max_den));
        r.canonicalize();
        return r;
    }

    /// Element of Q(sqrt d); d = 0 gives a rational.
    QN quadratic(long d, long max_num = 50, long max_den = 30) {
        const long w = integer(1, max_den);
        if (d == 0) return QN::make(integer(-max_num, max_num), 0, w, 0);
        return QN::make(integer(-max_num, max_num), integer(-max_num, max_num), w, d);
    }

    /// Rational in [0, 1) with denominator up to max_den.
    QN unit_rational(long max_den = 12) {
        const long d = integer(1, max_den);
        return QN::ratio(integer(0, d - 1), d);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Resets the float-mirror perturbation on scope exit.
struct MirrorPerturbation {
    explicit MirrorPerturbation(double eps) { float_mirror_perturbation() = eps; }
    ~MirrorPerturbation() { float_mirror_perturbation() = 0.0; }
};

}  // namespace lattes::testing
