#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "lattes/error.hpp"
#include "lattes/lattice.hpp"
#include "lattes/line_orbit.hpp"
#include "lattes/numbers.hpp"
#include "lattes/segment_lab.hpp"
#include "lattes/torus_map.hpp"
#include "lattes/weierstrass.hpp"

namespace lattes {

/// Lattes data: A on C/Lambda descending through the quotient by
/// z -> z0 + zeta (z - z0), zeta = exp(2 pi i / nu).
struct LattesModel {
    AffineTorusMap map;
    int nu = 2;
    TorusPoint z0;
    GroupAction group;
    std::vector<int> signature;

    const Lattice& lattice() const { return map.lattice(); }
    bool flexible() const { return nu == 2 && map.has_integer_derivative(); }
    std::string signature_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < signature.size(); ++i) s += (i ? "," : "") + std::to_string(signature[i]);
        return s + ")";
    }
};

inline std::vector<int> orbifold_signature(int nu) {
    switch (nu) {
        case 2: return {2, 2, 2, 2};
        case 3: return {3, 3, 3};
        case 4: return {2, 4, 4};
        case 6: return {2, 3, 6};
        default: throw Error(ErrorCode::UsageError, "group order must be 2, 3, 4 or 6");
    }
}

inline LattesModel lattes_model_new(const AffineTorusMap& map, int nu, const QN& z0x = QN(0), const QN& z0y = QN(0)) {
    const std::vector<int> sig = orbifold_signature(nu);
    const GroupAction g = GroupAction::create(map.lattice(), nu, z0x, z0y);
    const IntMatrix2& m = map.matrix();
    const IntMatrix2& r = g.rotation;
    if (!(m * r == r * m))
        throw Error(ErrorCode::NotLattesCompatible, "the linear part does not commute with the rotation");

    // A(rho z) - rho(A z) = (I - R)(A(z0) - z0) must lie in Lambda.
    const TorusPoint z0 = reduce_to_fundamental(z0x, z0y);
    const auto [ax, ay] = detail::lift_point(map, z0.x, z0.y);
    const QN dx = ax - z0.x;
    const QN dy = ay - z0.y;
    const QN ex = dx - (QN(r.p) * dx + QN(r.r) * dy);
    const QN ey = dy - (QN(r.q) * dx + QN(r.s) * dy);
    if (!ex.is_integer() || !ey.is_integer())
        throw Error(ErrorCode::NotLattesCompatible, "A does not commute with the rotation about z0 mod Lambda");
    if (nu == 2) {
        const auto q = half_lattice_Q(map.lattice(), z0.x, z0.y);
        for (const auto& pt : q) {
            const TorusPoint img = apply(map, pt);
            if (std::find(q.begin(), q.end(), img) == q.end())
                throw Error(ErrorCode::NotLattesCompatible, "A(Q) is not contained in Q");
        }
    }
    return {map, nu, z0, g, sig};
}

struct InjectiveGeodesicImage {};
struct FoldedRay {
    TorusPoint fold_point;
};
struct ClosedCurveImage {};

using ThetaLineType = std::variant<InjectiveGeodesicImage, FoldedRay, ClosedCurveImage>;

inline void require_nu2(const LattesModel& model) {
    if (model.nu != 2) throw Error(ErrorCode::UsageError, "operation needs a model with nu = 2");
}

inline ThetaLineType theta_line_type(const LattesModel& model, const TorusLine& line) {
    require_nu2(model);
    if (line.is_rational_direction()) return ClosedCurveImage{};
    const auto q = half_lattice_Q(model.lattice(), model.z0.x, model.z0.y);
    if (auto hit = passes_through_Q(line, q)) return FoldedRay{*hit};
    return InjectiveGeodesicImage{};
}

enum class PairingKind { Unpaired, Paired, Folded };

inline std::string to_string(PairingKind k) {
    switch (k) {
        case PairingKind::Unpaired: return "unpaired";
        case PairingKind::Paired: return "paired";
        case PairingKind::Folded: return "folded";
    }
    return "unpaired";
}

/// How z -> 2 z0 - z acts on a cycle of transverse states.
///
/// Folded: every state is fixed (the lines pass through Q).
struct RhoPairing {
    PairingKind kind = PairingKind::Unpaired;
    int period = 1;            ///< p, or p / 2 when paired
    std::vector<int> pairing;  ///< index j -> index of rho(state j); empty when unpaired
};

inline RhoPairing rho_pairing(const LattesModel& model, const std::vector<Transverse>& cycle) {
    require_nu2(model);
    const int p = static_cast<int>(cycle.size());
    if (p == 0) throw Error(ErrorCode::UsageError, "empty cycle");
    const Transverse r0 = rho_transverse(model.z0, cycle[0]);
    int shift = -1;
    for (int h = 0; h < p; ++h) {
        if (cycle[static_cast<std::size_t>(h)] == r0) shift = h;
    }
    if (shift < 0) return {PairingKind::Unpaired, p, {}};
    std::vector<int> pairing(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        const int target = (j + shift) % p;
        if (!(rho_transverse(model.z0, cycle[static_cast<std::size_t>(j)]) == cycle[static_cast<std::size_t>(target)]))
            throw Error(ErrorCode::OddPeriodPairing, "rho maps part of the cycle outside it");
        pairing[static_cast<std::size_t>(j)] = target;
    }
    if (shift == 0) return {PairingKind::Folded, p, pairing};
    if (p % 2 != 0 || 2 * shift != p)
        throw Error(ErrorCode::OddPeriodPairing, "rho pairing with shift " + std::to_string(shift) + " in a cycle of period " +
                                                     std::to_string(p));
    return {PairingKind::Paired, p / 2, pairing};
}

/// Sphere-level certificate: the torus certificate plus its pairing data.
struct SphereCertificate {
    WanderingCertificate certificate;
    std::optional<RhoPairing> pairing;  ///< eventually periodic lines only
    bool avoids_Q = true;               ///< iterates 0..K of the line miss Q
};

struct NotFlexible {
    std::string reason;
    std::optional<CollisionCertificate> witness;
};

using SphereVerdict = std::variant<SphereCertificate, NotWanderable, NotFlexible>;

namespace detail {

inline Transverse rho_class(const TorusPoint& z0, const Transverse& t) {
    const Transverse r = rho_transverse(z0, t);
    return r < t ? r : t;
}

}  // namespace detail

/// Wandering certificate for Theta(S) under the induced map on the sphere.
inline SphereVerdict certify_sphere_wandering(const LattesModel& model, const TorusSegment& seg,
                                              int K = kDefaultCheckIterates,
                                              std::optional<int> collision_budget = std::nullopt) {
    if (K > kMaxCheckIterates) throw Error(ErrorCode::BudgetExceeded, "cross-check budget exceeds 512 iterates");
    const AffineTorusMap& map = model.map;
    if (!model.flexible()) {
        NotFlexible nf;
        nf.reason = model.nu > 2 ? "rotation group of order " + std::to_string(model.nu) + " (signature " +
                                       model.signature_str() + ")"
                                 : "multiplier " + map.a().str() + " is not an integer";
        std::optional<GroupAction> group;
        if (model.nu > 2) group = model.group;
        const CollisionResult r = find_collision(map, seg, group, collision_budget);
        if (const auto* c = std::get_if<CollisionCertificate>(&r)) nf.witness = *c;
        return nf;
    }

    const LineOrbitClass cls = classify_line(map, seg.line);
    if (std::holds_alternative<JordanCurve>(cls)) return NotWanderable{"the line closes up into a Jordan curve"};

    const auto q = half_lattice_Q(model.lattice(), model.z0.x, model.z0.y);
    const Integer a = map.integer_multiplier();
    SphereCertificate out;
    {
        Transverse t = seg.line.transverse;
        for (int i = 0; i <= K && out.avoids_Q; ++i) {
            TorusLine li = seg.line;
            li.transverse = t;
            if (!t.alpha.is_rational() || !t.beta.is_rational()) break;  // irrational lines miss rational Q
            out.avoids_Q = !passes_through_Q(li, q).has_value();
            t = transverse_image(a, map.b(), t);
        }
    }

    if (std::holds_alternative<WanderingLine>(cls)) {
        if (!iterates_pairwise_disjoint(map, seg, K, model.z0))
            throw std::logic_error("wandering line failed the sphere-level cross-check");
        WanderingCertificate cert;
        cert.mode = CertificateMode::WholeSegment;
        cert.segment = seg;
        cert.checked_iterates = K;
        out.certificate = cert;
        return out;
    }

    const auto& ep = std::get<EventuallyPeriodic>(cls);
    out.pairing = rho_pairing(model, ep.cycle());

    // Cycle of rho-classes: first n with class(n) seen before.
    std::vector<Transverse> classes;
    std::vector<Transverse> states;
    Transverse t = seg.line.transverse;
    int n0 = -1, period = 0;
    for (int n = 0; n0 < 0; ++n) {
        const Transverse c = detail::rho_class(model.z0, t);
        for (std::size_t j = 0; j < classes.size(); ++j) {
            if (classes[j] == c) {
                n0 = static_cast<int>(j);
                period = n - n0;
                break;
            }
        }
        classes.push_back(c);
        states.push_back(t);
        t = transverse_image(a, map.b(), t);
    }
    const bool reflect = !(states[static_cast<std::size_t>(n0 + period)] == states[static_cast<std::size_t>(n0)]);
    const bool folded = out.pairing->kind == PairingKind::Folded;
    out.certificate = certify_periodic(map, seg, n0, period, reflect, model.z0, K, folded);
    return out;
}

// ---------------------------------------------------------------------------
// Semiconjugacy

/// f(x) = scale * P(x) / Q(x), with P and Q written in a basis of
/// polynomials orthonormal over the training abscissae (Arnoldi recurrence).
struct RationalFit {
    int degree = 0;
    double scale = 1.0;
    Eigen::MatrixXcd hess;  ///< (degree + 1) x degree recurrence coefficients
    double phi0 = 1.0;      ///< constant value of the first basis polynomial
    std::vector<cd> num;    ///< coefficients of P in the basis
    std::vector<cd> den;
    double singular_gap = 0.0;  ///< second-smallest over largest singular value

    std::vector<cd> basis_at(cd x) const {
        std::vector<cd> phi(static_cast<std::size_t>(degree) + 1);
        phi[0] = phi0;
        for (int k = 1; k <= degree; ++k) {
            cd w = x * phi[static_cast<std::size_t>(k - 1)];
            for (int j = 0; j < k; ++j) w -= hess(j, k - 1) * phi[static_cast<std::size_t>(j)];
            phi[static_cast<std::size_t>(k)] = w / hess(k, k - 1);
        }
        return phi;
    }

    cd operator()(cd x) const {
        const auto phi = basis_at(x);
        cd p = 0.0, q = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            p += num[k] * phi[k];
            q += den[k] * phi[k];
        }
        return scale * p / q;
    }

    /// Coefficients in powers of x (low order first), both divided by the
    /// leading numerator coefficient.
    std::pair<std::vector<cd>, std::vector<cd>> monic_coefficients() const {
        const auto n = static_cast<std::size_t>(degree) + 1;
        std::vector<std::vector<cd>> phi(n, std::vector<cd>(n, 0.0));
        phi[0][0] = phi0;
        for (std::size_t k = 1; k < n; ++k) {
            for (std::size_t i = 0; i + 1 < n; ++i) phi[k][i + 1] += phi[k - 1][i];
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < n; ++i) phi[k][i] -= hess(long(j), long(k - 1)) * phi[j][i];
            for (auto& c : phi[k]) c /= hess(long(k), long(k - 1));
        }
        std::vector<cd> p(n, 0.0), q(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                p[i] += scale * num[k] * phi[k][i];
                q[i] += den[k] * phi[k][i];
            }
        }
        const cd lead = p.back();
        for (auto& c : p) c /= lead;
        for (auto& c : q) c /= lead;
        return {p, q};
    }
};

/// Least-squares rational function of the given degree through (x_i, y_i):
/// the null vector of [B | -diag(y) B] with B the basis matrix.
inline RationalFit fit_rational_map(const std::vector<cd>& xs, const std::vector<cd>& ys, int degree) {
    const int cols = degree + 1;
    const auto rows = static_cast<Eigen::Index>(xs.size());
    if (rows < 2 * cols) throw Error(ErrorCode::FitIllConditioned, "too few samples for the fit");
    RationalFit fit;
    fit.degree = degree;
    std::vector<double> mags;
    for (const auto& y : ys) mags.push_back(std::abs(y));
    std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2), mags.end());
    fit.scale = std::max(1.0, mags[mags.size() / 2]);

    Eigen::VectorXcd x(rows);
    for (Eigen::Index i = 0; i < rows; ++i) x(i) = xs[static_cast<std::size_t>(i)];
    Eigen::MatrixXcd basis(rows, cols);
    fit.hess = Eigen::MatrixXcd::Zero(cols, std::max(degree, 1));
    fit.phi0 = 1.0;
    basis.col(0).setOnes();
    for (int k = 1; k < cols; ++k) {
        Eigen::VectorXcd v = x.cwiseProduct(basis.col(k - 1));
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k; ++j) {
                const cd h = basis.col(j).dot(v) / double(rows);
                fit.hess(j, k - 1) += h;
                v -= h * basis.col(j);
            }
        }
        const double nrm = v.norm() / std::sqrt(double(rows));
        if (nrm == 0.0) throw Error(ErrorCode::FitIllConditioned, "sample abscissae are too few or repeated");
        fit.hess(k, k - 1) = nrm;
        basis.col(k) = v / nrm;
    }

    Eigen::MatrixXcd a(rows, 2 * cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const cd eta = ys[static_cast<std::size_t>(i)] / fit.scale;
        a.block(i, 0, 1, cols) = basis.row(i);
        a.block(i, cols, 1, cols) = -eta * basis.row(i);
        a.row(i) /= a.row(i).norm();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const Eigen::Index last = sv.size() - 1;
    fit.singular_gap = sv(last - 1) / sv(0);
    if (fit.singular_gap < 1e-13)
        throw Error(ErrorCode::FitIllConditioned, "null space of the fit has dimension above one");
    const Eigen::VectorXcd v = svd.matrixV().col(last);
    for (int k = 0; k < cols; ++k) {
        fit.num.push_back(v(k));
        fit.den.push_back(v(cols + k));
    }
    return fit;
}

struct SemiconjugacySample {
    cd z;
    cd theta;  ///< Theta(z)
    double residual;
};

struct SemiconjugacyReport {
    std::string path;  ///< "analytic" or "fitted"
    double max_residual = 0.0;
    int fitted_degree = 0;
    double duplication_check = 0.0;  ///< validation residual of the duplication formula (analytic path)
    std::optional<RationalFit> fit;
    std::vector<SemiconjugacySample> samples;
};

inline constexpr double kSampleClearance = 0.15;
inline constexpr double kDuplicationCheckTol = 1e-8;

namespace detail {

// Points z with z - z0 and A(z) - z0 both at least kSampleClearance from Lambda.
inline std::vector<cd> semiconjugacy_points(const LattesModel& model, int count, std::uint64_t seed) {
    const Lattice& lat = model.lattice();
    const cd tau = lat.omega_float();
    const cd z0 = embed(model.z0, lat);
    const cd a = model.map.a().to_complex();
    const cd b = model.map.b_complex().to_complex();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<cd> out;
    while (static_cast<int>(out.size()) < count) {
        const cd z = z0 + u(rng) + u(rng) * tau;
        if (reduce(lat, z - z0).dist < kSampleClearance) continue;
        if (reduce(lat, a * z + b - z0).dist < kSampleClearance) continue;
        out.push_back(z);
    }
    return out;
}

// Relative residual of the duplication formula on a grid in R.
inline double duplication_validation(const Lattice& lat, cd g2, cd g3) {
    const cd tau = lat.omega_float();
    double worst = 0.0;
    for (int i = 1; i < 16; ++i) {
        for (int j = 1; j < 16; ++j) {
            const cd z = i / 16.0 + (j / 16.0) * tau;
            if (reduce(lat, z).dist < kSampleClearance || reduce(lat, 2.0 * z).dist < kSampleClearance) continue;
            const cd lhs = wp(lat, 2.0 * z);
            const cd rhs = duplication(wp(lat, z), g2, g3);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    return worst;
}

}  // namespace detail

/// Checks Theta(A z) = f(Theta z), Theta(z) = p(z - z0), numerically.
///
/// a = +-2, b = 0, z0 = 0 uses the duplication formula; anything else fits
/// f from samples, trying degrees 1 .. |a|^2.
inline SemiconjugacyReport verify_semiconjugacy(const LattesModel& model, int samples, double tol,
                                                std::uint64_t seed = 1, bool force_fit = false) {
    require_nu2(model);
    if (samples < 1) throw Error(ErrorCode::UsageError, "need at least one sample");
    const Lattice& lat = model.lattice();
    const cd z0 = embed(model.z0, lat);
    const cd a = model.map.a().to_complex();
    const cd b = model.map.b_complex().to_complex();
    const auto theta = [&](cd z) { return wp(lat, z - z0); };
    const auto target = [&](cd z) { return wp(lat, a * z + b - z0); };

    SemiconjugacyReport rep;
    const bool analytic = !force_fit && model.map.has_integer_derivative() &&
                          abs(model.map.integer_multiplier()) == 2 && model.map.b() == TorusPoint{QN(0), QN(0)} &&
                          model.z0 == TorusPoint{QN(0), QN(0)};
    std::function<cd(cd)> f;
    if (analytic) {
        rep.path = "analytic";
        const auto [g2, g3] = g_invariants(lat);
        rep.duplication_check = detail::duplication_validation(lat, g2, g3);
        if (rep.duplication_check > kDuplicationCheckTol)
            throw Error(ErrorCode::ResidualExceedsTol, "duplication formula failed validation");
        rep.fitted_degree = 4;
        f = [g2 = g2, g3 = g3](cd x) { return duplication(x, g2, g3); };
    } else {
        rep.path = "fitted";
        const int max_degree = static_cast<int>(model.map.degree().get_si());
        const auto train = detail::semiconjugacy_points(model, 32 * (max_degree + 1), seed ^ 0x5eedULL);
        const auto check = detail::semiconjugacy_points(model, 64, seed ^ 0xc0ffeeULL);
        std::vector<cd> xs, ys;
        for (const cd z : train) {
            xs.push_back(theta(z));
            ys.push_back(target(z));
        }
        for (int d = 1; d <= max_degree && !rep.fit; ++d) {
            RationalFit fit = fit_rational_map(xs, ys, d);
            double worst = 0.0;
            for (const cd z : check) worst = std::max(worst, std::abs(fit(theta(z)) - target(z)));
            if (worst < tol) rep.fit = std::move(fit);
        }
        if (!rep.fit) throw Error(ErrorCode::ResidualExceedsTol, "no rational map of degree <= |a|^2 fits");
        rep.fitted_degree = rep.fit->degree;
        f = *rep.fit;
    }

    for (const cd z : detail::semiconjugacy_points(model, samples, seed)) {
        const cd th = theta(z);
        const double r = std::abs(f(th) - target(z));
        rep.max_residual = std::max(rep.max_residual, r);
        rep.samples.push_back({z, th, r});
    }
    if (rep.max_residual >= tol)
        throw Error(ErrorCode::ResidualExceedsTol, "max residual " + std::to_string(rep.max_residual) + " >= tol");
    return rep;
}

}  // namespace lattes
