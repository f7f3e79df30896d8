#pragma once

#include <array>
#include <complex>
#include <string>

#include "lattes/error.hpp"
#include "lattes/exact_real.hpp"
#include "lattes/numbers.hpp"

namespace lattes {

/// Point of C/Lambda in lattice coordinates, both reduced into [0, 1).
struct TorusPoint {
    QN x;
    QN y;

    friend bool operator==(const TorusPoint& a, const TorusPoint& b) { return a.x == b.x && a.y == b.y; }
    Vec2 vec() const { return {x, y}; }
};

/// Lambda = {n + m omega}, Im omega > 0.
class Lattice {
public:
    static Lattice create(const ComplexQ& omega) {
        if (omega.im.sign() <= 0)
            throw Error(ErrorCode::LowerHalfPlane, "Im omega must be positive, got omega = " + omega.str());
        Lattice lat;
        lat.omega_ = omega;
        return lat;
    }

    const ComplexQ& omega() const { return omega_; }
    std::complex<double> omega_float() const { return omega_.to_complex(); }
    double omega_abs() const { return std::abs(omega_float()); }

private:
    ComplexQ omega_{QN(0), QN(1)};
};

inline Lattice lattice_new(const ComplexQ& omega) { return Lattice::create(omega); }

inline TorusPoint reduce_to_fundamental(const QN& x, const QN& y) { return {x.mod1(), y.mod1()}; }

/// The four fixed points of z -> 2 z0 - z, i.e. the half-lattice grid
/// shifted by z0, in the order z0, z0 + 1/2, z0 + omega/2, z0 + (1 + omega)/2.
inline std::array<TorusPoint, 4> half_lattice_Q(const Lattice&, const QN& z0x, const QN& z0y) {
    if (!z0x.is_rational() || !z0y.is_rational())
        throw Error(ErrorCode::IncompatibleField, "the basepoint z0 must be rational");
    const QN half = QN::ratio(1, 2);
    return {reduce_to_fundamental(z0x, z0y), reduce_to_fundamental(z0x + half, z0y),
            reduce_to_fundamental(z0x, z0y + half), reduce_to_fundamental(z0x + half, z0y + half)};
}

inline std::complex<double> embed(const Lattice& lat, double x, double y) { return x + y * lat.omega_float(); }

inline std::complex<double> embed(const TorusPoint& p, const Lattice& lat) {
    return embed(lat, p.x.to_double(), p.y.to_double());
}

inline std::complex<double> embed(const Vec2& p, const Lattice& lat) {
    return embed(lat, p.x.to_double(), p.y.to_double());
}

/// Lattice coordinates of a complex scalar: c = x + y omega.
inline std::pair<QN, QN> lattice_coordinates(const ComplexQ& c, const Lattice& lat) {
    const QN y = c.im / lat.omega().im;
    const QN x = c.re - y * lat.omega().re;
    return {x, y};
}

}  // namespace lattes
