#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lattes/error.hpp"
#include "lattes/lattice.hpp"
#include "lattes/segment_lab.hpp"

namespace lattes {

inline constexpr std::size_t kMaxSvgSegments = 10000;

namespace detail {

inline std::string fmt(double v) {
    if (std::abs(v) < 5e-4) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Golden-angle hues, fixed saturation and lightness.
inline std::string iterate_color(std::size_t i) {
    const double h = std::fmod(static_cast<double>(i) * 137.508, 360.0) / 60.0;
    const double c = 0.65, x = c * (1 - std::abs(std::fmod(h, 2.0) - 1)), m = 0.2;
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>((r + m) * 255), static_cast<int>((g + m) * 255),
                  static_cast<int>((b + m) * 255));
    return buf;
}

struct FloatPiece {
    double x0, y0, x1, y1;
};

// Splits a lift at the integer grid and moves each piece into [0, 1]^2.
inline std::vector<FloatPiece> wrap_pieces(const SegmentLift& s) {
    const double ax = s.start.x.to_double(), ay = s.start.y.to_double();
    const double dx = s.end.x.to_double() - ax, dy = s.end.y.to_double() - ay;
    std::vector<double> cuts{0.0, 1.0};
    const auto add_cuts = [&](double p, double d) {
        if (d == 0.0) return;
        const double lo = std::min(p, p + d), hi = std::max(p, p + d);
        for (double k = std::ceil(lo); k <= hi; k += 1.0) {
            const double t = (k - p) / d;
            if (t > 0.0 && t < 1.0) cuts.push_back(t);
        }
    };
    add_cuts(ax, dx);
    add_cuts(ay, dy);
    std::sort(cuts.begin(), cuts.end());
    std::vector<FloatPiece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double t0 = cuts[i], t1 = cuts[i + 1];
        if (t1 - t0 < 1e-12) continue;
        const double mx = ax + 0.5 * (t0 + t1) * dx, my = ay + 0.5 * (t0 + t1) * dy;
        const double fx = std::floor(mx), fy = std::floor(my);
        out.push_back({ax + t0 * dx - fx, ay + t0 * dy - fy, ax + t1 * dx - fx, ay + t1 * dy - fy});
    }
    return out;
}

}  // namespace detail

/// Iterates of a segment drawn in the fundamental parallelogram.
///
/// `iterates[i]` is the lift of the i-th iterate; `witness` marks a collision point.
inline std::string orbit_svg(const Lattice& lat, const std::vector<SegmentLift>& iterates,
                             const std::optional<std::complex<double>>& witness = std::nullopt) {
    if (iterates.size() > kMaxSvgSegments) throw Error(ErrorCode::UsageError, "at most 10000 segments per plot");
    const std::complex<double> w = lat.omega_float();
    const double unit = 400.0, pad = 20.0, legend = 110.0;
    const double xmin = std::min({0.0, w.real()}), xmax = std::max({1.0, 1.0 + w.real()});
    const double width = (xmax - xmin) * unit + 2 * pad + legend;
    const double height = w.imag() * unit + 2 * pad;
    const auto px = [&](double x, double y) {
        const auto z = embed(lat, x, y);
        return std::make_pair((z.real() - xmin) * unit + pad, height - pad - z.imag() * unit);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(width) + "\" height=\"" +
           detail::fmt(height) + "\" viewBox=\"0 0 " + detail::fmt(width) + " " + detail::fmt(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    {
        std::string pts;
        for (const auto& [x, y] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}) {
            const auto [u, v] = px(x, y);
            pts += (pts.empty() ? "" : " ") + detail::fmt(u) + "," + detail::fmt(v);
        }
        out += "<polygon class=\"fundamental\" points=\"" + pts + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
    for (std::size_t i = 0; i < iterates.size(); ++i) {
        const std::string color = detail::iterate_color(i);
        out += "<g class=\"iterate\" data-n=\"" + std::to_string(i) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\" fill=\"none\">\n";
        for (const auto& p : detail::wrap_pieces(iterates[i])) {
            const auto [u0, v0] = px(p.x0, p.y0);
            const auto [u1, v1] = px(p.x1, p.y1);
            out += "<polyline points=\"" + detail::fmt(u0) + "," + detail::fmt(v0) + " " + detail::fmt(u1) + "," +
                   detail::fmt(v1) + "\"/>\n";
        }
        out += "</g>\n";
    }
    if (witness) {
        const double y = witness->imag() / w.imag();
        const double x = witness->real() - y * w.real();
        const auto [u, v] = px(x - std::floor(x), y - std::floor(y));
        out += "<circle class=\"witness\" cx=\"" + detail::fmt(u) + "\" cy=\"" + detail::fmt(v) +
               "\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    const double lx = width - legend + 10;
    for (std::size_t i = 0; i < iterates.size() && i < 40; ++i) {
        const double ly = pad + 14.0 * static_cast<double>(i);
        out += "<rect x=\"" + detail::fmt(lx) + "\" y=\"" + detail::fmt(ly) + "\" width=\"10\" height=\"10\" fill=\"" +
               detail::iterate_color(i) + "\"/>";
        out += "<text x=\"" + detail::fmt(lx + 14) + "\" y=\"" + detail::fmt(ly + 9) +
               "\" font-size=\"10\" font-family=\"monospace\">n=" + std::to_string(i) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void emit_orbit_svg(const Lattice& lat, const std::vector<SegmentLift>& iterates, const std::string& path,
                           const std::optional<std::complex<double>>& witness = std::nullopt) {
    const std::string doc = orbit_svg(lat, iterates, witness);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    f << doc;
    if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace lattes
