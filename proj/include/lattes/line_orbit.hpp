#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lattes/error.hpp"
#include "lattes/exact_real.hpp"
#include "lattes/lattice.hpp"
#include "lattes/numbers.hpp"
#include "lattes/torus_map.hpp"

namespace lattes {

/// Primitive integer direction (m, k) in lattice coordinates, normalized so
/// the first nonzero entry is positive.
struct RationalDirection {
    Integer m;
    Integer k;

    static RationalDirection primitive(Integer m, Integer k) {
        if (m == 0 && k == 0) throw Error(ErrorCode::DegenerateSegment, "zero direction vector");
        Integer g;
        mpz_gcd(g.get_mpz_t(), m.get_mpz_t(), k.get_mpz_t());
        m /= g;
        k /= g;
        if (m < 0 || (m == 0 && k < 0)) {
            m = -m;
            k = -k;
        }
        return {m, k};
    }
    friend bool operator==(const RationalDirection& a, const RationalDirection& b) { return a.m == b.m && a.k == b.k; }
};

/// Irrational slope dy/dx in lattice coordinates.
struct IrrationalSlope {
    QN s;
};

using SlopeSpec = std::variant<RationalDirection, IrrationalSlope>;

/// Rational slopes become primitive directions; irrational ones stay slopes.
inline SlopeSpec make_slope(const QN& s) {
    if (s.is_rational()) {
        const Rational q = s.to_rational();
        return RationalDirection::primitive(q.get_den(), q.get_num());
    }
    return IrrationalSlope{s};
}

/// Transverse state (alpha, beta) mod Z^2 of an irrational-slope line.
struct Transverse {
    QN alpha;
    QN beta;

    friend bool operator==(const Transverse& a, const Transverse& b) { return a.alpha == b.alpha && a.beta == b.beta; }
    friend bool operator<(const Transverse& a, const Transverse& b) {
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        return a.beta < b.beta;
    }
    /// The canonical point (beta, -alpha mod 1) on the line.
    TorusPoint base_point() const { return {beta, (-alpha).mod1()}; }
};

/// A flat line mod Lambda.
///
/// Irrational slope s: the line {s x - y = alpha + beta s mod (sZ + Z)},
/// identified by its transverse pair. Rational direction (m, k): the closed
/// geodesic {k x - m y = offset mod 1}, with a canonical anchor point.
struct TorusLine {
    SlopeSpec slope;
    Transverse transverse;  ///< irrational slope only
    QN offset;              ///< rational direction only
    TorusPoint anchor;      ///< rational direction only

    bool is_rational_direction() const { return std::holds_alternative<RationalDirection>(slope); }
    const RationalDirection& direction_vector() const { return std::get<RationalDirection>(slope); }
    const QN& irrational_slope() const { return std::get<IrrationalSlope>(slope).s; }

    /// Direction of the parameterization point(t) = base + t * direction.
    Vec2 direction() const {
        if (is_rational_direction()) return {ExactReal(direction_vector().m), ExactReal(direction_vector().k)};
        return {ExactReal(1), ExactReal(irrational_slope())};
    }

    TorusPoint base_point() const { return is_rational_direction() ? anchor : transverse.base_point(); }

    /// Whether the lifted point lies on this line (exact).
    bool contains(const QN& x, const QN& y) const {
        if (is_rational_direction()) {
            const auto& d = direction_vector();
            return (QN(d.k) * x - QN(d.m) * y - offset).mod1().is_zero();
        }
        return (x - transverse.beta).mod1().is_zero() && (y + transverse.alpha).mod1().is_zero();
    }

    friend bool operator==(const TorusLine& a, const TorusLine& b) {
        if (a.is_rational_direction() != b.is_rational_direction()) return false;
        if (a.is_rational_direction())
            return a.direction_vector() == b.direction_vector() && a.offset == b.offset;
        return a.irrational_slope() == b.irrational_slope() && a.transverse == b.transverse;
    }
};

namespace detail {

inline TorusLine closed_line(const RationalDirection& d, const QN& px, const QN& py) {
    TorusLine line;
    line.slope = d;
    line.offset = (QN(d.k) * px - QN(d.m) * py).mod1();
    // k u0 - m v0 = 1 gives a point offset * (u0, v0) on the line.
    Integer g, s, t;
    const Integer neg_m = -d.m;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), d.k.get_mpz_t(), neg_m.get_mpz_t());
    line.anchor = reduce_to_fundamental(line.offset * QN(s), line.offset * QN(t));
    return line;
}

inline long transverse_radicand(const QN& x, const QN& y) {
    if (!QN::compatible(x, y))
        throw Error(ErrorCode::IncompatibleField, "base point coordinates use two different radicands");
    return x.radicand() != 0 ? x.radicand() : y.radicand();
}

}  // namespace detail

/// The line of the given slope through a lifted point (x, y).
inline TorusLine line_from_point(const SlopeSpec& slope, const QN& x, const QN& y) {
    if (const auto* d = std::get_if<RationalDirection>(&slope)) return detail::closed_line(*d, x, y);
    const QN& s = std::get<IrrationalSlope>(slope).s;
    const long dt = detail::transverse_radicand(x, y);
    if (dt != 0 && dt == s.radicand())
        throw Error(ErrorCode::FieldClash, "base point shares the slope radicand sqrt(" + std::to_string(dt) + ")");
    TorusLine line;
    line.slope = slope;
    line.transverse = {(-y).mod1(), x.mod1()};
    return line;
}

inline TorusLine line_from_transverse(const QN& s, const QN& alpha, const QN& beta) {
    return line_from_point(IrrationalSlope{s}, beta, -alpha);
}

/// Transverse action of an integer multiplier a with translation b.
inline Transverse transverse_image(const Integer& a, const TorusPoint& b, const Transverse& t) {
    return {(QN(a) * t.alpha - b.y).mod1(), (QN(a) * t.beta + b.x).mod1()};
}

inline TorusLine line_image(const AffineTorusMap& map, const TorusLine& line) {
    if (line.is_rational_direction()) {
        const auto& d = line.direction_vector();
        const auto [m2, k2] = map.matrix().apply(d.m, d.k);
        const TorusPoint p = apply(map, line.anchor);
        return detail::closed_line(RationalDirection::primitive(m2, k2), p.x, p.y);
    }
    if (!map.has_integer_derivative())
        throw Error(ErrorCode::SlopeNotInvariant, "irrational slope under non-real multiplier " + map.a().str());
    TorusLine out = line;
    try {
        out.transverse = transverse_image(map.integer_multiplier(), map.b(), line.transverse);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MixedRadicals)
            throw Error(ErrorCode::IncompatibleField, "translation and transverse data use different radicands");
        throw;
    }
    return out;
}

struct JordanCurve {
    RationalDirection direction;
};

struct EventuallyPeriodic {
    int preperiod = 0;                ///< n0
    int period = 1;                   ///< p
    std::vector<Transverse> states;   ///< states 0 .. n0 + p - 1, pairwise distinct

    std::vector<Transverse> cycle() const { return {states.begin() + preperiod, states.end()}; }
    const Transverse& state(long n) const {
        if (n < preperiod) return states[static_cast<std::size_t>(n)];
        return states[static_cast<std::size_t>(preperiod + (n - preperiod) % period)];
    }
};

struct WanderingLine {
    std::string witness;  ///< "alpha" or "beta": the irrational transverse coordinate
};

using LineOrbitClass = std::variant<JordanCurve, EventuallyPeriodic, WanderingLine>;

namespace detail {

inline Integer lcm_of_denominators(std::initializer_list<QN> xs) {
    Integer l = 1;
    for (const auto& x : xs) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.w().get_mpz_t());
    return l;
}

inline void require_rational_translation(const AffineTorusMap& map) {
    if (!map.has_rational_translation())
        throw Error(ErrorCode::IncompatibleField, "line classification requires a rational translation b");
}

}  // namespace detail

/// Jordan curve, eventually periodic or wandering under an integer multiplier.
inline LineOrbitClass classify_line(const AffineTorusMap& map, const TorusLine& line) {
    if (line.is_rational_direction()) return JordanCurve{line.direction_vector()};
    if (!map.has_integer_derivative())
        throw Error(ErrorCode::SlopeNotInvariant, "irrational slope under non-real multiplier " + map.a().str());
    detail::require_rational_translation(map);

    const Transverse& t0 = line.transverse;
    if (!t0.alpha.is_rational()) return WanderingLine{"alpha"};
    if (!t0.beta.is_rational()) return WanderingLine{"beta"};

    // States stay on the grid (1/L) Z^2, so the orbit is finite.
    const Integer l = detail::lcm_of_denominators({t0.alpha, t0.beta, map.b().x, map.b().y});
    const Integer cap = l * l;
    const Integer a = map.integer_multiplier();

    std::map<Transverse, int> seen;
    std::vector<Transverse> states;
    Transverse cur = t0;
    for (int n = 0;; ++n) {
        if (auto it = seen.find(cur); it != seen.end()) {
            EventuallyPeriodic ep;
            ep.preperiod = it->second;
            ep.period = n - it->second;
            ep.states = std::move(states);
            return ep;
        }
        if (Integer(n) > cap) throw Error(ErrorCode::BudgetExceeded, "orbit exceeded its finite-grid bound");
        seen.emplace(cur, n);
        states.push_back(cur);
        cur = transverse_image(a, map.b(), cur);
    }
}

/// First point of Q lying on the line, if any.
inline std::optional<TorusPoint> passes_through_Q(const TorusLine& line, const std::array<TorusPoint, 4>& q) {
    for (const auto& pt : q) {
        if (!pt.x.is_rational() || !pt.y.is_rational())
            throw Error(ErrorCode::IncompatibleField, "Q points must be rational");
        if (!line.is_rational_direction()) {
            const auto& t = line.transverse;
            if (!t.alpha.is_rational() || !t.beta.is_rational()) continue;
        }
        if (line.contains(pt.x, pt.y)) return pt;
    }
    return std::nullopt;
}

}  // namespace lattes
