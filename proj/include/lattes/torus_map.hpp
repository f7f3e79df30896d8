#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <variant>

#include "lattes/error.hpp"
#include "lattes/exact_real.hpp"
#include "lattes/lattice.hpp"
#include "lattes/numbers.hpp"

namespace lattes {

/// Integer matrix [[p, r], [q, s]] acting on lattice coordinates (x, y).
struct IntMatrix2 {
    Integer p{1}, r{0}, q{0}, s{1};

    Integer det() const { return p * s - q * r; }
    Vec2 apply(const Vec2& v) const {
        return {ExactReal(p) * v.x + ExactReal(r) * v.y, ExactReal(q) * v.x + ExactReal(s) * v.y};
    }
    std::pair<QN, QN> apply(const QN& x, const QN& y) const {
        return {QN(p) * x + QN(r) * y, QN(q) * x + QN(s) * y};
    }
    std::pair<Integer, Integer> apply(const Integer& x, const Integer& y) const { return {p * x + r * y, q * x + s * y}; }

    friend IntMatrix2 operator*(const IntMatrix2& a, const IntMatrix2& b) {
        return {a.p * b.p + a.r * b.q, a.p * b.r + a.r * b.s, a.q * b.p + a.s * b.q, a.q * b.r + a.s * b.s};
    }
    friend bool operator==(const IntMatrix2& a, const IntMatrix2& b) {
        return a.p == b.p && a.r == b.r && a.q == b.q && a.s == b.s;
    }
    IntMatrix2 power(int n) const {
        IntMatrix2 out;
        for (int i = 0; i < n; ++i) out = out * *this;
        return out;
    }
};

namespace detail {

// Solves c * 1 = p + q omega and c * omega = r + s omega over the integers.
// Returns nullopt when c does not preserve Lambda.
inline std::optional<IntMatrix2> multiplication_matrix(const ComplexQ& c, const Lattice& lat) {
    const ComplexQ& w = lat.omega();
    try {
        const auto [p, q] = lattice_coordinates(c, lat);
        const auto [r, s] = lattice_coordinates(c * w, lat);
        if (!p.is_integer() || !q.is_integer() || !r.is_integer() || !s.is_integer()) return std::nullopt;
        return IntMatrix2{p.to_integer(), r.to_integer(), q.to_integer(), s.to_integer()};
    } catch (const Error& e) {
        // c and omega from different quadratic fields: c = p + q omega is then impossible.
        if (e.code() == ErrorCode::MixedRadicals) return std::nullopt;
        throw;
    }
}

}  // namespace detail

struct IntegerDerivative {
    Integer a;
};

struct NonRealMultiplier {
    ComplexQ a;
    double theta;  ///< arg(a), in (-pi, pi)
};

using MultiplierClass = std::variant<IntegerDerivative, NonRealMultiplier>;

/// A(z) = a z + b mod Lambda with its integer matrix M and degree.
class AffineTorusMap {
public:
    static AffineTorusMap create(const ComplexQ& a, const ComplexQ& b, const Lattice& lat) {
        const auto m = detail::multiplication_matrix(a, lat);
        if (!m) throw Error(ErrorCode::NotACovering, "a = " + a.str() + " does not map Lambda into itself");
        const ComplexQ& w = lat.omega();
        const ComplexQ qq{QN(m->q), QN(0)};
        const ComplexQ residual = qq * w * w + ComplexQ{QN(m->p - m->s), QN(0)} * w - ComplexQ{QN(m->r), QN(0)};
        if (!(residual == ComplexQ{}))
            throw Error(ErrorCode::NotACovering, "q omega^2 + (p - s) omega - r != 0");
        const Integer degree = m->det();
        if (!(QN(degree) == a.norm_squared()))
            throw Error(ErrorCode::NotACovering, "ps - qr differs from |a|^2");
        if (degree < 2)
            throw Error(ErrorCode::DegreeTooLow, "degree " + degree.get_str() + " < 2 for a = " + a.str());
        if (a.is_real() && !(m->q == 0 && m->r == 0 && m->p == m->s))
            throw Error(ErrorCode::NotACovering, "real multiplier must be an integer");

        AffineTorusMap map;
        map.lat_ = lat;
        map.a_ = a;
        map.b_complex_ = b;
        try {
            const auto [bx, by] = lattice_coordinates(b, lat);
            map.b_ = reduce_to_fundamental(bx, by);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::MixedRadicals)
                throw Error(ErrorCode::IncompatibleField, "b and omega live in different quadratic fields");
            throw;
        }
        map.m_ = *m;
        map.degree_ = degree;
        return map;
    }

    const Lattice& lattice() const { return lat_; }
    const ComplexQ& a() const { return a_; }
    const ComplexQ& b_complex() const { return b_complex_; }
    const TorusPoint& b() const { return b_; }
    const IntMatrix2& matrix() const { return m_; }
    const Integer& degree() const { return degree_; }

    bool has_integer_derivative() const { return a_.is_real(); }
    /// The integer multiplier; only valid with an integer derivative.
    Integer integer_multiplier() const { return m_.p; }
    bool has_rational_translation() const { return b_.x.is_rational() && b_.y.is_rational(); }
    double abs_a() const { return std::sqrt(degree_.get_d()); }

    /// Lift z -> M z + b without reduction.
    Vec2 lift(const Vec2& v) const { return m_.apply(v) + b_.vec(); }

private:
    Lattice lat_;
    ComplexQ a_;
    ComplexQ b_complex_;
    TorusPoint b_;
    IntMatrix2 m_;
    Integer degree_;
};

inline AffineTorusMap torus_map_new(const ComplexQ& a, const ComplexQ& b, const Lattice& lat) {
    return AffineTorusMap::create(a, b, lat);
}

inline MultiplierClass classify_multiplier(const AffineTorusMap& map) {
    if (map.a().im.sign() == 0) return IntegerDerivative{map.integer_multiplier()};
    const auto af = map.a().to_complex();
    return NonRealMultiplier{map.a(), std::atan2(af.imag(), af.real())};
}

inline TorusPoint apply(const AffineTorusMap& map, const TorusPoint& p) {
    try {
        const auto [x, y] = map.matrix().apply(p.x, p.y);
        return reduce_to_fundamental(x + map.b().x, y + map.b().y);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MixedRadicals)
            throw Error(ErrorCode::IncompatibleField, "point and translation use different radicands");
        throw;
    }
}

inline TorusPoint iterate(const AffineTorusMap& map, TorusPoint p, int n) {
    for (int i = 0; i < n; ++i) p = apply(map, p);
    return p;
}

/// Integer matrix of z -> zeta z for zeta = exp(2 pi i / nu), if Lambda admits it.
inline std::optional<IntMatrix2> rotation_matrix(const Lattice& lat, int nu) {
    const QN half = QN::ratio(1, 2);
    const QN root3_half = QN::make(0, 1, 2, 3);
    ComplexQ zeta;
    switch (nu) {
        case 1: zeta = {QN(1), QN(0)}; break;
        case 2: zeta = {QN(-1), QN(0)}; break;
        case 3: zeta = {-half, root3_half}; break;
        case 4: zeta = {QN(0), QN(1)}; break;
        case 6: zeta = {half, root3_half}; break;
        default: throw Error(ErrorCode::UsageError, "group order must be 2, 3, 4 or 6");
    }
    return detail::multiplication_matrix(zeta, lat);
}

}  // namespace lattes
