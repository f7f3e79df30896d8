#include <gtest/gtest.h>

#include <cmath>

#include "lattes/segment_lab.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lattes;
using lattes::testing::brute_force_disjoint;
using lattes::testing::c;
using lattes::testing::Gen;
using lattes::testing::q;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

const Lattice kSquare = lattice_new(c("i"));

SegmentLift lift(const char* x0, const char* y0, const char* x1, const char* y1) {
    return {{q(x0), q(y0)}, {q(x1), q(y1)}};
}

TorusSegment irrational_segment(const char* slope, const char* alpha, const char* beta, const char* lo,
                                const char* hi) {
    return segment_new(line_from_transverse(q(slope), q(alpha), q(beta)), q(lo), q(hi));
}

}  // namespace

TEST(Segment, Construction) {
    const TorusSegment s = irrational_segment("sqrt(2)", "sqrt(3)-1", "0", "0", "1/10");
    EXPECT_NEAR(s.euclidean_length(kSquare), std::sqrt(3.0) / 10.0, 1e-15);
    EXPECT_EQ(code_of([] { irrational_segment("sqrt(2)", "0", "0", "1/2", "1/2"); }), ErrorCode::DegenerateSegment);
    EXPECT_EQ(code_of([] { irrational_segment("sqrt(2)", "0", "0", "1/2", "1/3"); }), ErrorCode::DegenerateSegment);
}

TEST(Segment, MidpointNormalized) {
    Gen g(41);
    for (int i = 0; i < 200; ++i) {
        const TorusLine l = line_from_transverse(q("sqrt(2)"), g.unit_rational(), g.unit_rational());
        const QN lo = QN(Rational(g.integer(-400, 400), 7));
        const QN hi = lo + QN(Rational(g.integer(1, 50), 11));
        const TorusSegment s = segment_new(l, lo, hi);
        const Vec2 mid = s.lift().midpoint();
        ASSERT_EQ(mid.x.floor(), 0);
        ASSERT_EQ(mid.y.floor(), 0);
        ASSERT_TRUE(l.contains(s.base_x, s.base_y));
    }
}

TEST(Intersect, CrossingExample) {
    const auto w = torus_intersection(lift("0", "0", "1/2", "0"), lift("1/4", "-1/4", "1/4", "1/4"));
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(w->point, (Vec2{q("1/4"), QN(0)}));
}

TEST(Intersect, ThroughTranslate) {
    const auto w = torus_intersection(lift("0", "0", "1/2", "0"), lift("5/4", "-1/4", "5/4", "1/4"));
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(w->n, -1);
    EXPECT_FALSE(torus_intersection(lift("0", "0", "1/2", "0"), lift("3/4", "-1/4", "3/4", "1/4")).has_value());
}

TEST(Intersect, SelfAndParallel) {
    const TorusSegment s = irrational_segment("sqrt(2)", "sqrt(3)-1", "0", "0", "1/10");
    EXPECT_TRUE(segments_intersect(kSquare, s, s).intersects);
    const TorusSegment other = irrational_segment("sqrt(2)", "1/3", "0", "0", "1/10");
    EXPECT_FALSE(segments_intersect(kSquare, s, other).intersects);
}

TEST(Intersect, LongParallelSegmentsOnOneLine) {
    // On an irrational line only equal parameters project to the same point.
    const TorusLine l = line_from_transverse(q("sqrt(2)"), QN(0), QN(0));
    const TorusSegment s1 = segment_new(l, QN(0), q("1/10"));
    const TorusSegment s2 = segment_new(l, q("141/20"), q("36/5"));
    EXPECT_FALSE(segments_intersect(kSquare, s1, s2).intersects);
    const TorusSegment s3 = segment_new(l, q("1/20"), q("36/5"));
    EXPECT_TRUE(segments_intersect(kSquare, s1, s3).intersects);
}

TEST(Intersect, FloatPredicate) {
    EXPECT_EQ(segments_intersect_float(kSquare, lift("0", "0", "1/2", "0"), lift("1/4", "-1/4", "1/4", "1/4")),
              FloatVerdict::Intersect);
    EXPECT_EQ(segments_intersect_float(kSquare, lift("0", "0", "1/2", "0"), lift("1/4", "1/8", "1/4", "1/4")),
              FloatVerdict::Disjoint);
    EXPECT_EQ(segments_intersect_float(kSquare, lift("0", "0", "1/2", "0"), lift("1/4", "0", "1/4", "1/4")),
              FloatVerdict::Uncertain);
}

TEST(Property, FloatAgreesWithExactOffBand) {
    Gen g(42);
    int decided = 0;
    for (int i = 0; i < 400; ++i) {
        const auto r = [&] { return QN(Rational(g.integer(-40, 40), 20)); };
        const SegmentLift a{{r(), r()}, {r(), r()}}, b{{r(), r()}, {r(), r()}};
        if (a.start == a.end || b.start == b.end) continue;
        const FloatVerdict v = segments_intersect_float(kSquare, a, b);
        const bool exact = torus_intersection(a, b).has_value();
        if (v == FloatVerdict::Uncertain) continue;
        ++decided;
        ASSERT_EQ(v == FloatVerdict::Intersect, exact);
    }
    EXPECT_GT(decided, 100);
}

TEST(Wandering, WholeSegmentOnWanderingLine) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const TorusSegment s = irrational_segment("sqrt(2)", "sqrt(3)-1", "0", "0", "1/10");
    const auto v = certify_wandering(map, s);
    ASSERT_TRUE(std::holds_alternative<WanderingCertificate>(v));
    EXPECT_EQ(std::get<WanderingCertificate>(v).mode, CertificateMode::WholeSegment);
    EXPECT_TRUE(brute_force_disjoint(map, s, 12));
}

TEST(Wandering, JordanCurveNotWanderable) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const TorusSegment s = segment_new(line_from_point(make_slope(QN(1)), QN(0), QN(0)), QN(0), q("1/10"));
    EXPECT_TRUE(std::holds_alternative<NotWanderable>(certify_wandering(map, s)));
}

TEST(Wandering, PeriodicLineSubsegment) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const TorusSegment s = irrational_segment("sqrt(2)", "1/3", "0", "0", "1/10");
    const auto v = certify_wandering(map, s);
    ASSERT_TRUE(std::holds_alternative<WanderingCertificate>(v));
    const auto& cert = std::get<WanderingCertificate>(v);
    EXPECT_EQ(cert.mode, CertificateMode::Subsegment);
    EXPECT_EQ(cert.certified_ratio, 4);
    EXPECT_EQ(cert.segment.t_lo, q("1/25"));
    EXPECT_EQ(cert.segment.t_hi, q("1/10"));
    EXPECT_EQ(cert.return_map->period, 2);
    EXPECT_EQ(cert.return_map->fixed_point, QN(0));
    EXPECT_TRUE(brute_force_disjoint(map, cert.segment, 12));
    // The full segment contains the fixed point, so it is not wandering.
    EXPECT_FALSE(brute_force_disjoint(map, s, 12));
}

TEST(Wandering, OneSidedPeriodicWholeSegment) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const TorusSegment s = irrational_segment("sqrt(2)", "1/3", "0", "1/20", "1/10");
    const auto v = certify_wandering(map, s);
    ASSERT_TRUE(std::holds_alternative<WanderingCertificate>(v));
    EXPECT_EQ(std::get<WanderingCertificate>(v).mode, CertificateMode::WholeSegment);
    EXPECT_EQ(*std::get<WanderingCertificate>(v).slack, QN(2));
}

TEST(Wandering, NegativeMultiplierUsesSquare) {
    const auto map = torus_map_new(c("-2"), c("0"), kSquare);
    const TorusSegment s = irrational_segment("sqrt(2)", "1/3", "0", "1/20", "1/10");
    const auto v = certify_wandering(map, s);
    ASSERT_TRUE(std::holds_alternative<WanderingCertificate>(v));
    const auto& cert = std::get<WanderingCertificate>(v);
    EXPECT_EQ(cert.return_map->lambda, -2);
    EXPECT_EQ(cert.certified_ratio, 4);
    EXPECT_TRUE(brute_force_disjoint(map, cert.segment, 12));
}

TEST(Wandering, CheckBudgetCap) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const TorusSegment s = irrational_segment("sqrt(2)", "sqrt(3)-1", "0", "0", "1/10");
    EXPECT_EQ(code_of([&] { certify_wandering(map, s, 513); }), ErrorCode::BudgetExceeded);
}

TEST(Property, ReturnMapAgreesWithIteration) {
    Gen g(43);
    const auto map = torus_map_new(c("2"), c("1/2"), kSquare);
    for (const char* alpha : {"1/3", "1/5", "1/7", "2/9"}) {
        const TorusSegment s = irrational_segment("sqrt(2)", alpha, "0", "1/100", "1/10");
        const auto cls = classify_line(map, s.line);
        ASSERT_TRUE(std::holds_alternative<EventuallyPeriodic>(cls));
        if (std::get<EventuallyPeriodic>(cls).preperiod != 0) continue;
        const auto v = certify_wandering(map, s);
        const auto& rm = *std::get<WanderingCertificate>(v).return_map;
        for (int i = 0; i < 100; ++i) {
            const QN t = QN(Rational(g.integer(-1000, 1000), g.integer(1, 97)));
            ASSERT_TRUE(lattes::testing::return_map_holds(map, s, rm.period, rm.lambda, rm.t0, t)) << alpha;
            // Monotone escape: distance to the fixed point scales by |a|^p.
            const QN u = QN(rm.lambda) * t + rm.t0 - rm.fixed_point;
            const QN u0 = t - rm.fixed_point;
            ASSERT_EQ(u, QN(rm.lambda) * u0);
        }
    }
}

TEST(Property, CertificatesPassBruteForce) {
    Gen g(44);
    for (int i = 0; i < 40; ++i) {
        const long a = g.pick(std::vector<long>{2, -2, 3});
        const auto map = torus_map_new(ComplexQ{QN(a), QN(0)}, ComplexQ{g.unit_rational(4), g.unit_rational(4)}, kSquare);
        const QN alpha = g.coin() ? g.unit_rational(15) : QN::make(g.integer(0, 3), 1, 5, 3);
        const TorusSegment s = segment_new(line_from_transverse(q("sqrt(2)"), alpha, g.unit_rational(15)),
                                           QN(Rational(g.integer(-20, 20), 40)), QN(Rational(g.integer(21, 40), 40)));
        const auto v = certify_wandering(map, s, 8);
        ASSERT_TRUE(std::holds_alternative<WanderingCertificate>(v));
        ASSERT_TRUE(brute_force_disjoint(map, std::get<WanderingCertificate>(v).segment, 8));
    }
}

TEST(Collision, Bounds) {
    EXPECT_NEAR(collision_bound(kSquare, M_PI / 4), 4 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(collision_bound_group(kSquare, 4), 8 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(collision_bound(lattice_new(c("2i")), M_PI / 2), 6.0, 1e-12);
}

TEST(Collision, GaussianExample) {
    const auto map = torus_map_new(c("1+i"), c("0"), kSquare);
    const TorusSegment s = segment_new(line_from_point(make_slope(QN(0)), q("1/10"), q("1/5")), QN(0), q("1/20"),
                                       std::make_pair(q("1/10"), q("1/5")));
    const auto r = find_collision(map, s);
    ASSERT_TRUE(std::holds_alternative<CollisionCertificate>(r));
    const auto& cert = std::get<CollisionCertificate>(r);
    EXPECT_LE(cert.m, 15);
    EXPECT_LT(cert.n, cert.m);
    EXPECT_NEAR(cert.bound_used, 4 * std::sqrt(2.0), 1e-12);
    EXPECT_TRUE(verify_collision(map, s, std::nullopt, cert));
}

TEST(Collision, IntegerMultiplierWanderingLine) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const TorusSegment s = irrational_segment("sqrt(2)", "sqrt(3)-1", "0", "0", "1/10");
    const auto r = find_collision(map, s, std::nullopt, 20);
    ASSERT_TRUE(std::holds_alternative<NoCollisionWithinBudget>(r));
    EXPECT_EQ(std::get<NoCollisionWithinBudget>(r).budget, 20);
}

TEST(Collision, GroupMode) {
    const auto map = torus_map_new(c("2"), c("0"), kSquare);
    const GroupAction group = GroupAction::create(kSquare, 4, QN(0), QN(0));
    const TorusSegment s = irrational_segment("sqrt(2)", "sqrt(3)-1", "0", "0", "1/17");
    const auto r = find_collision(map, s, group);
    ASSERT_TRUE(std::holds_alternative<CollisionCertificate>(r));
    const auto& cert = std::get<CollisionCertificate>(r);
    EXPECT_LE(cert.m, 7);
    EXPECT_TRUE(verify_collision(map, s, group, cert));
    EXPECT_EQ(code_of([] { GroupAction::create(kSquare, 3, QN(0), QN(0)); }), ErrorCode::WrongLatticeForGroup);
}

TEST(Collision, LexicographicallyMinimal) {
    const auto map = torus_map_new(c("1+i"), c("0"), kSquare);
    const TorusSegment s = segment_new(line_from_point(make_slope(QN(0)), q("1/10"), q("1/5")), QN(0), q("1/20"),
                                       std::make_pair(q("1/10"), q("1/5")));
    const auto cert = std::get<CollisionCertificate>(find_collision(map, s));
    const auto lifts = iterate_lifts(map, s, cert.m);
    for (int m = 1; m <= cert.m; ++m)
        for (int n = 0; n < m; ++n) {
            if (m == cert.m && n >= cert.n) break;
            ASSERT_FALSE(torus_intersection(lifts[static_cast<std::size_t>(m)], lifts[static_cast<std::size_t>(n)]))
                << n << " " << m;
        }
}

TEST(Property, LengthBoundWhileDisjoint) {
    Gen g(45);
    const auto map = torus_map_new(c("1+i"), c("0"), kSquare);
    const double bound = collision_bound(kSquare, M_PI / 4);
    for (int i = 0; i < 30; ++i) {
        const auto dir = RationalDirection::primitive(g.integer(-3, 3), g.integer(1, 3));
        const QN x = g.unit_rational(20), y = g.unit_rational(20);
        const TorusSegment s = segment_new(line_from_point(dir, x, y), QN(0), QN(Rational(1, g.integer(10, 80))),
                                           std::make_pair(x, y));
        const auto lifts = iterate_lifts(map, s, 14);
        for (std::size_t n = 0; n + 1 < lifts.size(); ++n) {
            if (torus_intersection(lifts[n], lifts[n + 1])) continue;
            ASSERT_LE(lift_length(kSquare, lifts[n]), bound + 1e-9);
        }
    }
}
