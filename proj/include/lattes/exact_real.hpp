#pragma once

#include <gmpxx.h>

#include <array>
#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "lattes/error.hpp"
#include "lattes/numbers.hpp"

namespace lattes {

namespace detail {

inline int sign_of(const Rational& q) { return sgn(q); }

// sign(r + s*sqrt(g)) for square-free g > 1 (or s == 0).
inline int quadratic_sign(const Rational& r, const Rational& s, long g) {
    const int sr = sign_of(r);
    const int ss = sign_of(s);
    if (ss == 0 || g == 0) return sr;
    if (sr == 0 || sr == ss) return ss;
    const Rational lhs = r * r;
    const Rational rhs = s * s * g;
    return lhs > rhs ? sr : ss;
}

}  // namespace detail

/// Exact real in Q(sqrt(g1), sqrt(g2)), used for lift coordinates.
///
/// value = c0 + c1 sqrt(g1) + c2 sqrt(g2) + c3 sqrt(g1) sqrt(g2), with
/// 0 < g1 < g2 square free, or fewer generators (0 marks an absent one).
/// Scalars from at most two distinct quadratic fields may be mixed; a third
/// radicand raises IncompatibleField.
class ExactReal {
public:
    ExactReal() = default;
    ExactReal(long n) { c_[0] = n; }  // NOLINT(google-explicit-constructor)
    explicit ExactReal(const Integer& n) { c_[0] = n; }
    explicit ExactReal(const Rational& q) { c_[0] = q; }
    explicit ExactReal(const QN& x) {
        c_[0] = x.rational_part();
        if (!x.is_rational()) {
            c_[1] = x.irrational_coefficient();
            g1_ = x.radicand();
        }
    }

    long g1() const { return g1_; }
    long g2() const { return g2_; }
    const Rational& coeff(int i) const { return c_[static_cast<std::size_t>(i)]; }

    bool is_rational() const { return g1_ == 0; }
    bool is_integer() const { return g1_ == 0 && c_[0].get_den() == 1; }
    const Rational& rational_value() const { return c_[0]; }
    bool is_zero() const { return sgn(c_[0]) == 0 && g1_ == 0; }

    /// Back to a single quadratic field; throws when two radicands remain.
    QN to_qn() const {
        if (g2_ != 0) throw Error(ErrorCode::IncompatibleField, "value needs two radicands: " + str());
        const Rational& r = c_[0];
        if (g1_ == 0) return QN(r);
        const Rational& s = c_[1];
        const Integer den = r.get_den() * s.get_den();
        return QN::make(r.get_num() * s.get_den(), s.get_num() * r.get_den(), den, g1_);
    }

    friend ExactReal operator+(const ExactReal& a, const ExactReal& b) {
        auto [x, y] = unify(a, b);
        for (std::size_t i = 0; i < 4; ++i) x.c_[i] += y.c_[i];
        x.trim();
        return x;
    }
    friend ExactReal operator-(const ExactReal& a, const ExactReal& b) {
        auto [x, y] = unify(a, b);
        for (std::size_t i = 0; i < 4; ++i) x.c_[i] -= y.c_[i];
        x.trim();
        return x;
    }
    ExactReal operator-() const {
        ExactReal r = *this;
        for (auto& c : r.c_) c = -c;
        return r;
    }
    friend ExactReal operator*(const ExactReal& a, const ExactReal& b) {
        auto [x, y] = unify(a, b);
        const long g1 = x.g1_;
        const long g2 = x.g2_;
        const auto& p = x.c_;
        const auto& q = y.c_;
        ExactReal r;
        r.g1_ = g1;
        r.g2_ = g2;
        // Basis 1, e1 = sqrt g1, e2 = sqrt g2, e3 = e1 e2.
        r.c_[0] = p[0] * q[0] + g1 * p[1] * q[1] + g2 * p[2] * q[2] + g1 * g2 * p[3] * q[3];
        r.c_[1] = p[0] * q[1] + p[1] * q[0] + g2 * (p[2] * q[3] + p[3] * q[2]);
        r.c_[2] = p[0] * q[2] + p[2] * q[0] + g1 * (p[1] * q[3] + p[3] * q[1]);
        r.c_[3] = p[0] * q[3] + p[3] * q[0] + p[1] * q[2] + p[2] * q[1];
        r.trim();
        return r;
    }
    friend ExactReal operator/(const ExactReal& a, const ExactReal& b) { return a * b.inverse(); }

    ExactReal& operator+=(const ExactReal& o) { return *this = *this + o; }
    ExactReal& operator-=(const ExactReal& o) { return *this = *this - o; }
    ExactReal& operator*=(const ExactReal& o) { return *this = *this * o; }

    ExactReal inverse() const {
        if (sign() == 0) throw Error(ErrorCode::SyntaxError, "division by zero");
        // x * conj2(x) lies in Q(sqrt g1); times its conjugate it is rational.
        const ExactReal c2 = conjugate(2);
        const ExactReal y = *this * c2;
        const ExactReal c1 = y.conjugate(1);
        const ExactReal z = y * c1;
        const Rational n = z.c_[0];
        ExactReal r = c2 * c1;
        for (auto& c : r.c_) c /= n;
        r.trim();
        return r;
    }

    int sign() const {
        if (g1_ == 0) return detail::sign_of(c_[0]);
        if (g2_ == 0) return detail::quadratic_sign(c_[0], c_[1], g1_);
        // value = A + B sqrt(g2) with A, B in Q(sqrt g1).
        const int sa = detail::quadratic_sign(c_[0], c_[1], g1_);
        const int sb = detail::quadratic_sign(c_[2], c_[3], g1_);
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        // sign(A^2 - g2 B^2) decides which term dominates.
        const Rational r = c_[0] * c_[0] + g1_ * c_[1] * c_[1] - g2_ * (c_[2] * c_[2] + g1_ * c_[3] * c_[3]);
        const Rational s = 2 * (c_[0] * c_[1] - g2_ * c_[2] * c_[3]);
        return detail::quadratic_sign(r, s, g1_) > 0 ? sa : sb;
    }

    Integer floor() const {
        if (g1_ == 0) {
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), c_[0].get_num_mpz_t(), c_[0].get_den_mpz_t());
            return q;
        }
        Integer n(floor_of(approx()));
        while ((*this - ExactReal(n)).sign() < 0) n -= 1;
        while ((*this - ExactReal(Integer(n + 1))).sign() >= 0) n += 1;
        return n;
    }

    Integer ceil() const {
        Integer f = floor();
        if ((*this - ExactReal(f)).sign() == 0) return f;
        return f + 1;
    }

    friend bool operator==(const ExactReal& a, const ExactReal& b) { return (a - b).sign() == 0; }
    friend std::strong_ordering operator<=>(const ExactReal& a, const ExactReal& b) {
        const int s = (a - b).sign();
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    double to_double() const { return perturb_mirror(approx().get_d()); }

    std::string str() const {
        if (g2_ == 0) return to_qn().str();
        std::string out = sgn(c_[0]) != 0 ? c_[0].get_str() : "";
        const std::array<std::string, 3> names = {"sqrt(" + std::to_string(g1_) + ")",
                                                  "sqrt(" + std::to_string(g2_) + ")",
                                                  "sqrt(" + std::to_string(g1_ * g2_) + ")"};
        for (std::size_t i = 1; i < 4; ++i) {
            if (sgn(c_[i]) == 0) continue;
            if (!out.empty() && sgn(c_[i]) > 0) out += "+";
            if (c_[i] == -1) out += "-";
            else if (c_[i] != 1) out += c_[i].get_str() + "*";
            out += names[i - 1];
        }
        return out;
    }

    /// Both values written over one common basis (coefficients via coeff()).
    static std::pair<ExactReal, ExactReal> in_common_field(const ExactReal& a, const ExactReal& b) {
        return unify(a, b);
    }

private:
    static mpf_class floor_of(const mpf_class& x) {
        mpf_class r(0, 256);
        mpf_floor(r.get_mpf_t(), x.get_mpf_t());
        return r;
    }

    mpf_class approx() const {
        const auto root = [](long g) {
            mpf_class r(0, 256);
            mpf_class gg(g, 256);
            mpf_sqrt(r.get_mpf_t(), gg.get_mpf_t());
            return r;
        };
        mpf_class acc(c_[0], 256);
        if (g1_ != 0) acc += mpf_class(c_[1], 256) * root(g1_);
        if (g2_ != 0) {
            acc += mpf_class(c_[2], 256) * root(g2_);
            acc += mpf_class(c_[3], 256) * root(g1_) * root(g2_);
        }
        return acc;
    }

    ExactReal conjugate(int which) const {
        ExactReal r = *this;
        if (which == 1) {
            r.c_[1] = -r.c_[1];
            r.c_[3] = -r.c_[3];
        } else {
            r.c_[2] = -r.c_[2];
            r.c_[3] = -r.c_[3];
        }
        return r;
    }

    // Drops generators whose coefficients vanished.
    void trim() {
        if (g2_ != 0 && sgn(c_[2]) == 0 && sgn(c_[3]) == 0) g2_ = 0;
        if (g1_ != 0 && sgn(c_[1]) == 0 && sgn(c_[3]) == 0) {
            if (g2_ != 0) {
                c_[1] = c_[2];
                c_[2] = 0;
                g1_ = g2_;
                g2_ = 0;
            } else {
                g1_ = 0;
            }
        }
    }

    ExactReal embedded(long h1, long h2) const {
        if (g1_ == h1 && g2_ == h2) return *this;
        ExactReal r;
        r.g1_ = h1;
        r.g2_ = h2;
        r.c_[0] = c_[0];
        const auto slot = [&](long g) -> std::size_t { return g == h1 ? 1 : 2; };
        if (g1_ != 0) r.c_[slot(g1_)] = c_[1];
        if (g2_ != 0) {
            r.c_[slot(g2_)] = c_[2];
            r.c_[3] = c_[3];
        }
        return r;
    }

    static std::pair<ExactReal, ExactReal> unify(const ExactReal& a, const ExactReal& b) {
        std::vector<long> gens;
        for (long g : {a.g1_, a.g2_, b.g1_, b.g2_}) {
            if (g == 0) continue;
            bool seen = false;
            for (long h : gens) seen = seen || h == g;
            if (!seen) gens.push_back(g);
        }
        if (gens.size() > 2)
            throw Error(ErrorCode::IncompatibleField, "more than two distinct radicands in one computation");
        if (gens.size() == 2 && gens[0] > gens[1]) std::swap(gens[0], gens[1]);
        const long h1 = gens.empty() ? 0 : gens[0];
        const long h2 = gens.size() < 2 ? 0 : gens[1];
        return {a.embedded(h1, h2), b.embedded(h1, h2)};
    }

    std::array<Rational, 4> c_{};
    long g1_ = 0;
    long g2_ = 0;
};

/// Point or vector in lattice coordinates (x, y) meaning x + y*omega.
struct Vec2 {
    ExactReal x;
    ExactReal y;

    Vec2() = default;
    Vec2(ExactReal x_, ExactReal y_) : x(std::move(x_)), y(std::move(y_)) {}
    Vec2(const QN& x_, const QN& y_) : x(x_), y(y_) {}

    friend Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(const ExactReal& t, const Vec2& v) { return {t * v.x, t * v.y}; }
    friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
};

inline ExactReal cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline ExactReal dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a).sign(); }

}  // namespace lattes
