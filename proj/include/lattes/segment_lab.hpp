#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lattes/error.hpp"
#include "lattes/exact_real.hpp"
#include "lattes/lattice.hpp"
#include "lattes/line_orbit.hpp"
#include "lattes/numbers.hpp"
#include "lattes/torus_map.hpp"

namespace lattes {

/// Straight segment in the plane, in lattice coordinates.
struct SegmentLift {
    Vec2 start;
    Vec2 end;

    Vec2 direction() const { return end - start; }
    Vec2 midpoint() const {
        const ExactReal half(Rational(1, 2));
        return {half * (start.x + end.x), half * (start.y + end.y)};
    }
    SegmentLift translated(const Integer& n, const Integer& m) const {
        const Vec2 v{ExactReal(n), ExactReal(m)};
        return {start + v, end + v};
    }
};

/// Translates the lift so its midpoint lies in [0, 1)^2.
inline SegmentLift normalize_midpoint(const SegmentLift& s) {
    const Vec2 mid = s.midpoint();
    return s.translated(-mid.x.floor(), -mid.y.floor());
}

/// A segment of a torus line: point(t) = lift_base + t * direction, t in [t_lo, t_hi].
struct TorusSegment {
    TorusLine line;
    QN base_x;
    QN base_y;
    QN t_lo;
    QN t_hi;

    Vec2 base() const { return {base_x, base_y}; }
    Vec2 point(const QN& t) const { return base() + ExactReal(t) * line.direction(); }
    SegmentLift lift() const { return {point(t_lo), point(t_hi)}; }
    QN parameter_length() const { return t_hi - t_lo; }

    double euclidean_length(const Lattice& lat) const {
        const Vec2 d = line.direction();
        return (t_hi - t_lo).to_double() * std::abs(embed(lat, d.x.to_double(), d.y.to_double()));
    }
};

namespace detail {

template <class F>
auto field_guard(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MixedRadicals) throw Error(ErrorCode::IncompatibleField, e.message());
        throw;
    }
}

}  // namespace detail

/// Segment on `line` over [t_lo, t_hi], relative to `base` (default: the line's
/// canonical point), re-lifted so its midpoint lies in the closure of R.
inline TorusSegment segment_new(const TorusLine& line, const QN& t_lo, const QN& t_hi,
                                const std::optional<std::pair<QN, QN>>& base = std::nullopt) {
    return detail::field_guard([&] {
        if (!(t_lo < t_hi))
            throw Error(ErrorCode::DegenerateSegment, "need t_lo < t_hi, got [" + t_lo.str() + ", " + t_hi.str() + "]");
        QN bx, by;
        if (base) {
            if (!line.contains(base->first, base->second))
                throw Error(ErrorCode::IncompatibleField, "base point does not lie on the line");
            bx = base->first;
            by = base->second;
        } else {
            const TorusPoint p = line.base_point();
            bx = p.x;
            by = p.y;
        }
        TorusSegment seg{line, bx, by, t_lo, t_hi};
        const Vec2 mid = seg.point((t_lo + t_hi) * QN::ratio(1, 2));
        seg.base_x = bx - QN(mid.x.floor());
        seg.base_y = by - QN(mid.y.floor());
        return seg;
    });
}

/// Image segment A(S) for maps that keep the line family (integer multiplier,
/// or any multiplier on a rational direction).
inline TorusSegment segment_image(const AffineTorusMap& map, const TorusSegment& s) {
    return detail::field_guard([&] {
        const TorusLine image = line_image(map, s.line);
        const auto [mx, my] = map.matrix().apply(s.base_x, s.base_y);
        const QN bx = mx + map.b().x;
        const QN by = my + map.b().y;
        // M d = g d' with d' the primitive image direction; t scales by g.
        QN g;
        if (s.line.is_rational_direction()) {
            const auto& d = s.line.direction_vector();
            const auto [m2, k2] = map.matrix().apply(d.m, d.k);
            const auto& d2 = image.direction_vector();
            g = QN(d2.m != 0 ? Integer(m2 / d2.m) : Integer(k2 / d2.k));
        } else {
            g = QN(map.integer_multiplier());
        }
        QN lo = g * s.t_lo;
        QN hi = g * s.t_hi;
        if (hi < lo) std::swap(lo, hi);
        return segment_new(image, lo, hi, std::make_pair(bx, by));
    });
}

/// Exact plane intersection of two closed segments; returns a common point.
inline std::optional<Vec2> lifts_intersect(const SegmentLift& s1, const SegmentLift& s2) {
    const Vec2& a = s1.start;
    const Vec2& b = s1.end;
    const Vec2& c = s2.start;
    const Vec2& d = s2.end;
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);

    const auto within = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        // r collinear with pq: inside the bounding box of pq
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };

    if (o1 * o2 < 0 && o3 * o4 < 0) {
        const Vec2 e = b - a;
        const Vec2 f = d - c;
        const ExactReal t = cross(c - a, f) / cross(e, f);
        return a + t * e;
    }
    if (o1 == 0 && within(a, b, c)) return c;
    if (o2 == 0 && within(a, b, d)) return d;
    if (o3 == 0 && within(c, d, a)) return a;
    if (o4 == 0 && within(c, d, b)) return b;
    return std::nullopt;
}

/// A point of S1 that also lies on S2 + (n, m).
struct TorusWitness {
    Vec2 point;
    Integer n;
    Integer m;
};

namespace detail {

inline constexpr long kMaxSlices = 2'000'000;

// x-extent of a set of points.
inline std::pair<ExactReal, ExactReal> x_range(const std::array<Vec2, 4>& v) {
    ExactReal lo = v[0].x, hi = v[0].x;
    for (const auto& p : v) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    return {lo, hi};
}

inline std::pair<ExactReal, ExactReal> y_range(const std::array<Vec2, 4>& v) {
    ExactReal lo = v[0].y, hi = v[0].y;
    for (const auto& p : v) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
    }
    return {lo, hi};
}

inline TorusWitness overlap_witness(const SegmentLift& s1, const SegmentLift& s2, const Integer& n, const Integer& m) {
    const SegmentLift t = s2.translated(n, m);
    auto p = lifts_intersect(s1, t);
    if (!p) throw std::logic_error("translate solved but segments do not meet");
    return {*p, n, m};
}

// Translates v with cross(v, d) = gamma inside D = S1 - S2, for parallel S1, S2.
inline std::optional<TorusWitness> parallel_intersection(const SegmentLift& s1, const SegmentLift& s2,
                                                         const std::array<Vec2, 4>& diff) {
    const Vec2 d = s1.direction();
    const ExactReal gamma = cross(s1.start - s2.start, d);
    const auto [xlo, xhi] = x_range(diff);
    const auto [ylo, yhi] = y_range(diff);

    if (d.x.is_zero()) {
        // n d.y = gamma
        const ExactReal n = gamma / d.y;
        if (!n.is_integer()) return std::nullopt;
        const Integer m = ylo.ceil();
        if (ExactReal(m) > yhi) return std::nullopt;
        return overlap_witness(s1, s2, n.rational_value().get_num(), m);
    }

    // n e - m = g with e the slope of d.
    const ExactReal e = d.y / d.x;
    const ExactReal g = gamma / d.x;
    if (e.is_rational()) {
        if (!g.is_rational()) return std::nullopt;
        const Rational& er = e.rational_value();
        const Integer num = er.get_num();
        const Integer den = er.get_den();
        const Rational big = g.rational_value() * den;  // n num - m den = big
        if (big.get_den() != 1) return std::nullopt;
        const Integer rhs = big.get_num();
        Integer gg, u, w;
        mpz_gcdext(gg.get_mpz_t(), u.get_mpz_t(), w.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        if (gg != 1 && gg != -1) return std::nullopt;
        const Integer n0 = u * rhs * gg;
        const Integer m0 = -w * rhs * gg;
        // General solution (n0 + den j, m0 + num j); den > 0.
        const ExactReal jlo = (xlo - ExactReal(n0)) / ExactReal(den);
        const Integer j = jlo.ceil();
        const Integer n = n0 + den * j;
        if (ExactReal(n) > xhi) return std::nullopt;
        return overlap_witness(s1, s2, n, m0 + num * j);
    }

    // Irrational slope: match coefficients of the irrational basis elements.
    const auto [ec, gc] = ExactReal::in_common_field(e, g);
    std::optional<Rational> n;
    for (int i = 1; i < 4; ++i) {
        if (sgn(ec.coeff(i)) == 0) {
            if (sgn(gc.coeff(i)) != 0) return std::nullopt;
            continue;
        }
        const Rational cand = gc.coeff(i) / ec.coeff(i);
        if (n && *n != cand) return std::nullopt;
        n = cand;
    }
    if (!n || n->get_den() != 1) return std::nullopt;
    const Rational mr = *n * ec.coeff(0) - gc.coeff(0);
    if (mr.get_den() != 1) return std::nullopt;
    const ExactReal nx(*n);
    if (nx < xlo || nx > xhi) return std::nullopt;
    return overlap_witness(s1, s2, n->get_num(), mr.get_num());
}

}  // namespace detail

/// Whether the projections of two lifts to C/Lambda meet; exact.
///
/// Searches integer translates v with S1 meeting S2 + v, i.e. v in the
/// Minkowski difference S1 - S2.
inline std::optional<TorusWitness> torus_intersection(const SegmentLift& s1, const SegmentLift& s2) {
    return detail::field_guard([&]() -> std::optional<TorusWitness> {
        const std::array<Vec2, 4> diff = {s1.start - s2.start, s1.end - s2.start, s1.end - s2.end,
                                          s1.start - s2.end};
        if (cross(s1.direction(), s2.direction()).sign() == 0) return detail::parallel_intersection(s1, s2, diff);

        const auto [xlo, xhi] = detail::x_range(diff);
        const Integer n_lo = xlo.ceil();
        const Integer n_hi = xhi.floor();
        if (n_hi - n_lo > detail::kMaxSlices)
            throw Error(ErrorCode::BudgetExceeded, "segment pair spans too many lattice columns");
        for (Integer n = n_lo; n <= n_hi; ++n) {
            const ExactReal xn(n);
            std::optional<ExactReal> lo, hi;
            const auto take = [&](const ExactReal& y) {
                if (!lo || y < *lo) lo = y;
                if (!hi || y > *hi) hi = y;
            };
            for (std::size_t i = 0; i < 4; ++i) {
                const Vec2& p = diff[i];
                const Vec2& q = diff[(i + 1) % 4];
                if (xn < std::min(p.x, q.x) || xn > std::max(p.x, q.x)) continue;
                if (p.x == q.x) {
                    take(p.y);
                    take(q.y);
                } else {
                    take(p.y + (xn - p.x) * (q.y - p.y) / (q.x - p.x));
                }
            }
            if (!lo) continue;
            const Integer m = lo->ceil();
            if (ExactReal(m) <= *hi) return detail::overlap_witness(s1, s2, n, m);
        }
        return std::nullopt;
    });
}

struct IntersectionResult {
    bool intersects = false;
    std::optional<TorusWitness> witness;
};

inline IntersectionResult segments_intersect(const Lattice&, const TorusSegment& s1, const TorusSegment& s2) {
    auto w = torus_intersection(s1.lift(), s2.lift());
    return {w.has_value(), std::move(w)};
}

enum class FloatVerdict { Disjoint, Intersect, Uncertain };

inline std::string to_string(FloatVerdict v) {
    switch (v) {
        case FloatVerdict::Disjoint: return "disjoint";
        case FloatVerdict::Intersect: return "intersect";
        case FloatVerdict::Uncertain: return "uncertain";
    }
    return "uncertain";
}

namespace detail {

struct P2 {
    double x, y;
};

inline double fcross(P2 a, P2 b) { return a.x * b.y - a.y * b.x; }

inline double point_segment_distance(P2 p, P2 a, P2 b, const Lattice& lat) {
    const auto pa = embed(lat, p.x - a.x, p.y - a.y);
    const auto ba = embed(lat, b.x - a.x, b.y - a.y);
    const double len2 = std::norm(ba);
    double t = len2 > 0 ? (pa.real() * ba.real() + pa.imag() * ba.imag()) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(pa - t * ba);
}

}  // namespace detail

/// Float-mode intersection with an uncertainty band.
inline FloatVerdict segments_intersect_float(const Lattice& lat, const SegmentLift& s1, const SegmentLift& s2,
                                             double band = 1e-9) {
    using detail::P2;
    const P2 a{s1.start.x.to_double(), s1.start.y.to_double()};
    const P2 b{s1.end.x.to_double(), s1.end.y.to_double()};
    const P2 c{s2.start.x.to_double(), s2.start.y.to_double()};
    const P2 d{s2.end.x.to_double(), s2.end.y.to_double()};
    const double xs[] = {a.x - c.x, b.x - c.x, b.x - d.x, a.x - d.x};
    const double ys[] = {a.y - c.y, b.y - c.y, b.y - d.y, a.y - d.y};
    const long n_lo = static_cast<long>(std::floor(*std::min_element(xs, xs + 4))) - 1;
    const long n_hi = static_cast<long>(std::ceil(*std::max_element(xs, xs + 4))) + 1;
    const long m_lo = static_cast<long>(std::floor(*std::min_element(ys, ys + 4))) - 1;
    const long m_hi = static_cast<long>(std::ceil(*std::max_element(ys, ys + 4))) + 1;
    if (static_cast<double>(n_hi - n_lo + 1) * static_cast<double>(m_hi - m_lo + 1) > 4e6)
        return FloatVerdict::Uncertain;

    const auto orient = [](P2 p, P2 q, P2 r) {
        const P2 u{q.x - p.x, q.y - p.y};
        const P2 v{r.x - p.x, r.y - p.y};
        const double scale = std::max(1.0, std::hypot(u.x, u.y) * std::hypot(v.x, v.y));
        return detail::fcross(u, v) / scale;
    };

    bool uncertain = false;
    for (long n = n_lo; n <= n_hi; ++n) {
        for (long m = m_lo; m <= m_hi; ++m) {
            const P2 c2{c.x + n, c.y + m};
            const P2 d2{d.x + n, d.y + m};
            const double o1 = orient(a, b, c2), o2 = orient(a, b, d2);
            const double o3 = orient(c2, d2, a), o4 = orient(c2, d2, b);
            const bool robust = std::min({std::abs(o1), std::abs(o2), std::abs(o3), std::abs(o4)}) > band;
            if (robust && o1 * o2 < 0 && o3 * o4 < 0) return FloatVerdict::Intersect;
            const double dist = std::min({detail::point_segment_distance(a, c2, d2, lat),
                                          detail::point_segment_distance(b, c2, d2, lat),
                                          detail::point_segment_distance(c2, a, b, lat),
                                          detail::point_segment_distance(d2, a, b, lat)});
            const bool crossing = o1 * o2 < 0 && o3 * o4 < 0;
            if (crossing || dist <= band) uncertain = true;
        }
    }
    return uncertain ? FloatVerdict::Uncertain : FloatVerdict::Disjoint;
}

inline FloatVerdict segments_intersect_float(const Lattice& lat, const TorusSegment& s1, const TorusSegment& s2,
                                             double band = 1e-9) {
    return segments_intersect_float(lat, s1.lift(), s2.lift(), band);
}

// ---------------------------------------------------------------------------
// Wandering certificates

enum class CertificateMode { WholeSegment, Subsegment };

inline std::string to_string(CertificateMode m) {
    return m == CertificateMode::WholeSegment ? "whole_segment" : "subsegment";
}

/// t -> lambda t + t0 on the invariant line, with fixed point t*.
struct ReturnMap {
    int preperiod = 0;
    int period = 1;
    Integer lambda;
    QN t0;
    QN fixed_point;
};

struct WanderingCertificate {
    CertificateMode mode = CertificateMode::WholeSegment;
    TorusSegment segment;  ///< the certified segment
    std::optional<ReturnMap> return_map;
    Integer certified_ratio;  ///< lambda used in the expansion test (0 for wandering lines)
    std::optional<QN> slack;  ///< ratio * min|u| / max|u|, > 1
    int checked_iterates = 0;
};

struct NotWanderable {
    std::string reason;
};

using WanderingVerdict = std::variant<WanderingCertificate, NotWanderable>;

inline constexpr int kDefaultCheckIterates = 12;
inline constexpr int kMaxCheckIterates = 512;

/// z -> 2 z0 - z on transverse states.
inline Transverse rho_transverse(const TorusPoint& z0, const Transverse& t) {
    const QN two(2);
    return {(-t.alpha - two * z0.y).mod1(), (-t.beta + two * z0.x).mod1()};
}

namespace detail {

inline Integer ipow(const Integer& a, int n) {
    Integer r = 1;
    for (int i = 0; i < n; ++i) r *= a;
    return r;
}

inline bool intervals_disjoint(const QN& l1, const QN& h1, const QN& l2, const QN& h2) { return h1 < l2 || h2 < l1; }

}  // namespace detail

/// Iterates 0..K of the segment pairwise disjoint, exactly.
///
/// Distinct transverse states are distinct parallel lines. Equal states are
/// compared as parameter intervals relative to the canonical point. With
/// z0, a pair identified by z -> 2 z0 - z is compared against the reflected
/// interval as well.
inline bool iterates_pairwise_disjoint(const AffineTorusMap& map, const TorusSegment& seg, int K,
                                       const std::optional<TorusPoint>& z0 = std::nullopt) {
    if (K > kMaxCheckIterates) throw Error(ErrorCode::BudgetExceeded, "cross-check budget exceeds 512 iterates");
    if (seg.line.is_rational_direction()) throw std::logic_error("disjointness oracle needs an irrational slope");
    const Integer a = map.integer_multiplier();
    struct Item {
        Transverse state;
        QN lo, hi;
    };
    std::vector<Item> items;
    Transverse state = seg.line.transverse;
    Integer scale = 1;
    for (int i = 0; i <= K; ++i) {
        QN lo = QN(scale) * seg.t_lo;
        QN hi = QN(scale) * seg.t_hi;
        if (hi < lo) std::swap(lo, hi);
        items.push_back({state, lo, hi});
        state = transverse_image(a, map.b(), state);
        scale *= a;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const Item& x = items[i];
            const Item& y = items[j];
            if (x.state == y.state && !detail::intervals_disjoint(x.lo, x.hi, y.lo, y.hi)) return false;
            if (z0 && rho_transverse(*z0, x.state) == y.state &&
                !detail::intervals_disjoint(-x.hi, -x.lo, y.lo, y.hi))
                return false;
        }
    }
    return true;
}

namespace detail {

// The segment re-expressed on the canonical point of its line: the base is
// that point plus an integer vector, so parameters carry over unchanged.
inline void require_canonical_offset(const TorusSegment& seg) {
    const TorusPoint c = seg.line.base_point();
    if (!(seg.base_x - c.x).is_integer() || !(seg.base_y - c.y).is_integer())
        throw std::logic_error("segment base is not an integer translate of the canonical point");
}

inline std::pair<QN, QN> lift_point(const AffineTorusMap& map, const QN& x, const QN& y) {
    const auto [mx, my] = map.matrix().apply(x, y);
    return {mx + map.b().x, my + map.b().y};
}

}  // namespace detail

/// Certification on a periodic invariant line.
///
/// The state at index n0 returns to itself after p steps, composed with
/// z -> 2 z0 - z when `reflect` is set. With z0 the cross-check also
/// separates iterates identified by that reflection. Returns the certificate for the
/// original segment or a subsegment.
inline WanderingCertificate certify_periodic(const AffineTorusMap& map, const TorusSegment& seg, int n0, int p,
                                             bool reflect, const std::optional<TorusPoint>& z0, int K,
                                             bool folded = false) {
    detail::require_canonical_offset(seg);
    const Integer a = map.integer_multiplier();
    const Integer lambda = (reflect ? -1 : 1) * detail::ipow(a, p);

    // Return map at the canonical point of state n0: t -> lambda t + t0.
    const Transverse sn0 = [&] {
        Transverse t = seg.line.transverse;
        for (int i = 0; i < n0; ++i) t = transverse_image(a, map.b(), t);
        return t;
    }();
    const TorusPoint base_n0 = sn0.base_point();
    QN qx = base_n0.x, qy = base_n0.y;
    for (int i = 0; i < p; ++i) std::tie(qx, qy) = detail::lift_point(map, qx, qy);
    if (reflect) {
        qx = QN(2) * z0->x - qx;
        qy = QN(2) * z0->y - qy;
    }
    const QN dx = qx - base_n0.x;
    const QN dy = qy - base_n0.y;
    // dx = m + t0, dy = k + t0 s with the slope irrational and the base rational.
    if (!dx.is_integer() || !dy.is_integer()) throw std::logic_error("return shift is not a lattice vector");
    const QN t0 = dx - QN(dx.floor());
    const QN t_star = t0 / (QN(1) - QN(lambda));
    // t* back on the original parameterization (scale by a^{-n0}).
    const QN t_star0 = t_star / QN(detail::ipow(a, n0));

    ReturnMap rm{n0, p, lambda, t0, t_star0};

    // A folded line identifies t with -t, so |lambda| already separates both sides.
    const Integer ratio = folded ? Integer(abs(lambda)) : (lambda > 0 ? lambda : Integer(lambda * lambda));
    const QN lam(ratio);
    const QN ulo = seg.t_lo - t_star0;
    const QN uhi = seg.t_hi - t_star0;
    const QN alo = ulo.sign() < 0 ? -ulo : ulo;
    const QN ahi = uhi.sign() < 0 ? -uhi : uhi;
    const QN mn = std::min(alo, ahi);
    const QN mx = std::max(alo, ahi);

    WanderingCertificate cert;
    cert.return_map = rm;
    cert.certified_ratio = ratio;
    cert.checked_iterates = K;
    const bool one_side = ulo.sign() > 0 || uhi.sign() < 0;
    if (one_side && mx < lam * mn) {
        cert.mode = CertificateMode::WholeSegment;
        cert.segment = seg;
        cert.slack = lam * mn / mx;
    } else {
        // Far endpoint y; E0 = [2y / (1 + lambda), y] has ratio (1 + lambda) / 2.
        const QN y = ahi >= alo ? uhi : ulo;
        const QN inner = QN(2) * y / (QN(1) + lam);
        QN lo = inner, hi = y;
        if (hi < lo) std::swap(lo, hi);
        cert.mode = CertificateMode::Subsegment;
        cert.segment = segment_new(seg.line, lo + t_star0, hi + t_star0, std::make_pair(seg.base_x, seg.base_y));
        cert.slack = QN(2) * lam / (QN(1) + lam);
    }
    if (!iterates_pairwise_disjoint(map, cert.segment, K, z0))
        throw std::logic_error("certified segment failed the disjointness cross-check");
    return cert;
}

/// Whether the segment (or a subsegment) is wandering under an integer multiplier.
inline WanderingVerdict certify_wandering(const AffineTorusMap& map, const TorusSegment& seg,
                                          int K = kDefaultCheckIterates) {
    if (K > kMaxCheckIterates) throw Error(ErrorCode::BudgetExceeded, "cross-check budget exceeds 512 iterates");
    const LineOrbitClass cls = classify_line(map, seg.line);
    if (std::holds_alternative<JordanCurve>(cls)) return NotWanderable{"the line closes up into a Jordan curve"};
    if (std::holds_alternative<WanderingLine>(cls)) {
        WanderingCertificate cert;
        cert.mode = CertificateMode::WholeSegment;
        cert.segment = seg;
        cert.checked_iterates = K;
        if (!iterates_pairwise_disjoint(map, seg, K))
            throw std::logic_error("wandering line failed the disjointness cross-check");
        return cert;
    }
    const auto& ep = std::get<EventuallyPeriodic>(cls);
    return certify_periodic(map, seg, ep.preperiod, ep.period, false, std::nullopt, K);
}

// ---------------------------------------------------------------------------
// Collisions

/// 2 (1 + |omega|) / |sin theta|.
inline double collision_bound(const Lattice& lat, double theta) {
    return 2.0 * (1.0 + lat.omega_abs()) / std::abs(std::sin(theta));
}

/// The uniform bound for groups of order 3, 4, 6: 2 (1 + |omega|) / sin(pi / 3).
inline double collision_bound_group(const Lattice& lat, int nu) {
    if (nu != 3 && nu != 4 && nu != 6) throw Error(ErrorCode::UsageError, "group bound needs nu in {3, 4, 6}");
    return 2.0 * (1.0 + lat.omega_abs()) / std::sin(M_PI / 3.0);
}

/// Rotation z -> z0 + zeta (z - z0), zeta = exp(2 pi i / nu), as an integer matrix.
struct GroupAction {
    int nu = 1;
    TorusPoint z0;
    IntMatrix2 rotation;

    static GroupAction create(const Lattice& lat, int nu, const QN& z0x, const QN& z0y) {
        const auto r = rotation_matrix(lat, nu);
        if (!r)
            throw Error(ErrorCode::WrongLatticeForGroup,
                        "omega = " + lat.omega().str() + " admits no rotation of order " + std::to_string(nu));
        if (!z0x.is_rational() || !z0y.is_rational())
            throw Error(ErrorCode::IncompatibleField, "the basepoint z0 must be rational");
        return {nu, {z0x, z0y}, *r};
    }

    /// rho^k applied to a lift.
    SegmentLift rotate(const SegmentLift& s, int k) const {
        const IntMatrix2 rk = rotation.power(k);
        const Vec2 c = z0.vec();
        return {c + rk.apply(s.start - c), c + rk.apply(s.end - c)};
    }
};

struct CollisionCertificate {
    int n = 0;
    int m = 0;
    int k = 0;
    TorusWitness witness;  ///< point of B_m on rho^k(B_n) + (witness.n, witness.m)
    std::complex<double> witness_float;
    bool exact = true;
    double bound_used = 0.0;
    int budget = 0;
};

struct NoCollisionWithinBudget {
    int budget = 0;
    double bound_used = 0.0;
};

using CollisionResult = std::variant<CollisionCertificate, NoCollisionWithinBudget>;

inline constexpr int kFallbackCollisionBudget = 20;

/// B_0 = S, B_{n+1} = A(B_n), each re-lifted with midpoint in [0, 1)^2.
inline std::vector<SegmentLift> iterate_lifts(const AffineTorusMap& map, const TorusSegment& s, int count) {
    std::vector<SegmentLift> out;
    out.reserve(static_cast<std::size_t>(count) + 1);
    out.push_back(normalize_midpoint(s.lift()));
    for (int i = 0; i < count; ++i) {
        const SegmentLift& b = out.back();
        out.push_back(normalize_midpoint({map.lift(b.start), map.lift(b.end)}));
    }
    return out;
}

/// Length of a lift in C.
inline double lift_length(const Lattice& lat, const SegmentLift& s) {
    const Vec2 d = s.direction();
    return std::abs(embed(lat, d.x.to_double(), d.y.to_double()));
}

namespace detail {

inline int log_budget(double abs_a, double bound, double len) {
    if (len <= 0.0 || abs_a <= 1.0) return kFallbackCollisionBudget;
    const double steps = std::ceil(std::log(bound / len) / std::log(abs_a));
    return std::max(1, static_cast<int>(steps) + 2);
}

}  // namespace detail

/// Bound and default budget for a collision search.
inline std::pair<double, int> collision_budget(const AffineTorusMap& map, const TorusSegment& s,
                                               const std::optional<GroupAction>& group) {
    const Lattice& lat = map.lattice();
    double bound = std::numeric_limits<double>::quiet_NaN();
    if (group && group->nu > 2) {
        bound = collision_bound_group(lat, group->nu);
    } else {
        const MultiplierClass mc = classify_multiplier(map);
        if (const auto* nr = std::get_if<NonRealMultiplier>(&mc)) bound = collision_bound(lat, nr->theta);
    }
    if (std::isnan(bound)) return {bound, kFallbackCollisionBudget};
    return {bound, detail::log_budget(map.abs_a(), bound, s.euclidean_length(lat))};
}

/// Lexicographically first (m, n, k), n < m, with A^m(S) meeting rho^k(A^n(S)).
inline CollisionResult find_collision(const AffineTorusMap& map, const TorusSegment& s,
                                      const std::optional<GroupAction>& group = std::nullopt,
                                      std::optional<int> budget = std::nullopt) {
    const auto [bound, default_budget] = collision_budget(map, s, group);
    const int cap = budget.value_or(default_budget);
    if (cap < 1) throw Error(ErrorCode::UsageError, "budget must be positive");
    const int nu = group ? group->nu : 1;
    const Lattice& lat = map.lattice();

    std::vector<std::vector<SegmentLift>> copies;  // copies[n][k] = rho^k(B_n)
    SegmentLift current = normalize_midpoint(s.lift());
    for (int m = 0; m <= cap; ++m) {
        if (m > 0) {
            current = normalize_midpoint({map.lift(current.start), map.lift(current.end)});
            for (int n = 0; n < m; ++n) {
                for (int k = 0; k < nu; ++k) {
                    auto w = torus_intersection(current, copies[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]);
                    if (!w) continue;
                    CollisionCertificate c;
                    c.n = n;
                    c.m = m;
                    c.k = k;
                    c.witness_float = embed(w->point, lat);
                    c.witness = std::move(*w);
                    c.bound_used = bound;
                    c.budget = cap;
                    return c;
                }
            }
        }
        std::vector<SegmentLift> row{current};
        for (int k = 1; k < nu; ++k) row.push_back(group->rotate(current, k));
        copies.push_back(std::move(row));
    }
    return NoCollisionWithinBudget{cap, bound};
}

/// Re-verifies a collision certificate from scratch.
inline bool verify_collision(const AffineTorusMap& map, const TorusSegment& s, const std::optional<GroupAction>& group,
                             const CollisionCertificate& c) {
    const auto lifts = iterate_lifts(map, s, c.m);
    SegmentLift other = lifts[static_cast<std::size_t>(c.n)];
    if (c.k != 0) other = group->rotate(other, c.k);
    return lifts_intersect(lifts[static_cast<std::size_t>(c.m)], other.translated(c.witness.n, c.witness.m))
        .has_value();
}

}  // namespace lattes
