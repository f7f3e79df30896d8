#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lattes/error.hpp"
#include "lattes/lattes.hpp"
#include "lattes/lattice.hpp"
#include "lattes/line_orbit.hpp"
#include "lattes/numbers.hpp"
#include "lattes/segment_lab.hpp"
#include "lattes/svg.hpp"
#include "lattes/torus_map.hpp"
#include "lattes/weierstrass.hpp"

namespace lattes::cli {

using json = nlohmann::ordered_json;

struct RunConfig {
    std::string command;
    std::string a = "2";
    std::string b = "0";
    std::string omega = "i";
    std::string seg;
    std::string slope;
    std::string point;
    std::string transverse;
    std::string z0 = "0,0";
    int nu = 0;  // 0: plain torus (find-collision) or 2 (certify-sphere)
    std::optional<int> budget;
    std::optional<double> tol;
    int check_iterates = kDefaultCheckIterates;
    int samples = 500;
    int iterates = 8;
    std::uint64_t seed = 1;
    bool fit = false;
    bool pretty = false;
    std::string out;
    std::string csv;
};

inline constexpr double kDefaultSemiconjugacyTol = 1e-6;

inline int exit_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::BudgetExceeded:
        case ErrorCode::ResidualExceedsTol:
        case ErrorCode::FitIllConditioned:
        case ErrorCode::UncertainAtTolerance: return 3;
        default: return 2;
    }
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::pair<QN, QN> parse_pair(const std::string& s, const std::string& what) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw Error(ErrorCode::UsageError, what + " must be \"x,y\", got \"" + s + "\"");
    return {qnum_parse(parts[0]), qnum_parse(parts[1])};
}

inline json pair_json(const QN& x, const QN& y) { return json::array({x.str(), y.str()}); }

inline json complex_json(cd z) { return json::array({z.real(), z.imag()}); }

inline json line_json(const TorusLine& line) {
    json j;
    if (line.is_rational_direction()) {
        const auto& d = line.direction_vector();
        j["direction"] = json::array({d.m.get_str(), d.k.get_str()});
        j["offset"] = line.offset.str();
    } else {
        j["slope"] = line.irrational_slope().str();
        j["transverse"] = pair_json(line.transverse.alpha, line.transverse.beta);
    }
    return j;
}

inline json segment_json(const Lattice& lat, const TorusSegment& s) {
    json j;
    j["line"] = line_json(s.line);
    j["base"] = pair_json(s.base_x, s.base_y);
    j["t_lo"] = s.t_lo.str();
    j["t_hi"] = s.t_hi.str();
    j["length"] = s.euclidean_length(lat);
    return j;
}

inline json certificate_json(const Lattice& lat, const WanderingCertificate& c) {
    json j;
    j["mode"] = to_string(c.mode);
    j["segment"] = segment_json(lat, c.segment);
    if (c.return_map) {
        const auto& r = *c.return_map;
        j["preperiod"] = r.preperiod;
        j["period"] = r.period;
        j["return_map"] = {{"multiplier", r.lambda.get_str()}, {"offset", r.t0.str()}, {"fixed_point", r.fixed_point.str()}};
        j["certified_ratio"] = c.certified_ratio.get_str();
    }
    if (c.slack) j["slack"] = c.slack->str();
    j["checked_iterates"] = c.checked_iterates;
    return j;
}

inline json collision_json(const CollisionCertificate& c) {
    json j;
    j["verdict"] = "collision";
    j["n"] = c.n;
    j["m"] = c.m;
    j["k"] = c.k;
    j["witness"] = {{"point", json::array({c.witness.point.x.str(), c.witness.point.y.str()})},
                    {"translate", json::array({c.witness.n.get_str(), c.witness.m.get_str()})},
                    {"float", complex_json(c.witness_float)},
                    {"exact", c.exact}};
    j["bound_used"] = c.bound_used;
    j["budget"] = c.budget;
    return j;
}

struct Problem {
    Lattice lat;
    AffineTorusMap map;
};

inline Problem load_map(const RunConfig& cfg) {
    const Lattice lat = lattice_new(parse_complex(cfg.omega));
    return {lat, torus_map_new(parse_complex(cfg.a), parse_complex(cfg.b), lat)};
}

// "x,y,h|v|s:<slope>,len": anchor, direction, parameter length.
inline TorusSegment parse_segment(const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.size() != 4)
        throw Error(ErrorCode::UsageError, "segment must be \"x,y,h|v|s:<slope>,len\", got \"" + text + "\"");
    const QN x = qnum_parse(parts[0]);
    const QN y = qnum_parse(parts[1]);
    QN len = qnum_parse(parts[3]);
    SlopeSpec slope;
    if (parts[2] == "h") {
        slope = RationalDirection{1, 0};
    } else if (parts[2] == "v") {
        slope = RationalDirection{0, 1};
    } else if (parts[2].rfind("s:", 0) == 0) {
        slope = make_slope(qnum_parse(parts[2].substr(2)));
        // len is the x-extent; t runs along the primitive vector (m, k).
        if (const auto* d = std::get_if<RationalDirection>(&slope)) len = len / QN(d->m);
    } else {
        throw Error(ErrorCode::UsageError, "segment direction must be h, v or s:<slope>");
    }
    const TorusLine line = line_from_point(slope, x, y);
    return segment_new(line, QN(0), len, std::make_pair(x, y));
}

inline TorusLine parse_line(const RunConfig& cfg) {
    if (!cfg.seg.empty()) return parse_segment(cfg.seg).line;
    if (cfg.slope.empty()) throw Error(ErrorCode::UsageError, "give --seg or --slope with --point or --transverse");
    const SlopeSpec slope = make_slope(qnum_parse(cfg.slope));
    if (!cfg.transverse.empty()) {
        if (std::holds_alternative<RationalDirection>(slope))
            throw Error(ErrorCode::UsageError, "--transverse needs an irrational slope");
        const auto [al, be] = parse_pair(cfg.transverse, "--transverse");
        return line_from_transverse(std::get<IrrationalSlope>(slope).s, al, be);
    }
    if (cfg.point.empty()) throw Error(ErrorCode::UsageError, "give --point or --transverse with --slope");
    const auto [x, y] = parse_pair(cfg.point, "--point");
    return line_from_point(slope, x, y);
}

inline TorusSegment require_segment(const RunConfig& cfg) {
    if (cfg.seg.empty()) throw Error(ErrorCode::UsageError, "--seg is required");
    return parse_segment(cfg.seg);
}

inline json classify_map(const RunConfig& cfg) {
    const auto [lat, map] = load_map(cfg);
    const IntMatrix2& m = map.matrix();
    json j;
    j["a"] = map.a().str();
    j["b"] = pair_json(map.b().x, map.b().y);
    j["omega"] = lat.omega().str();
    j["p"] = m.p.get_str();
    j["q"] = m.q.get_str();
    j["r"] = m.r.get_str();
    j["s"] = m.s.get_str();
    j["degree"] = map.degree().get_si();
    const MultiplierClass mc = classify_multiplier(map);
    if (const auto* nr = std::get_if<NonRealMultiplier>(&mc)) {
        j["multiplier"] = "non_real";
        j["multiplier_class"] = "NonRealMultiplier";
        j["theta"] = nr->theta;
    } else {
        j["multiplier"] = "integer";
        j["multiplier_class"] = "IntegerDerivative";
        j["integer_multiplier"] = map.integer_multiplier().get_str();
    }
    return j;
}

inline json classify_line_cmd(const RunConfig& cfg) {
    const auto [lat, map] = load_map(cfg);
    const TorusLine line = parse_line(cfg);
    json j;
    j["line"] = line_json(line);
    const LineOrbitClass cls = classify_line(map, line);
    if (const auto* jc = std::get_if<JordanCurve>(&cls)) {
        j["verdict"] = "jordan_curve";
        j["direction"] = json::array({jc->direction.m.get_str(), jc->direction.k.get_str()});
    } else if (const auto* ep = std::get_if<EventuallyPeriodic>(&cls)) {
        j["verdict"] = "eventually_periodic";
        j["preperiod"] = ep->preperiod;
        j["period"] = ep->period;
        json cyc = json::array();
        for (const auto& t : ep->cycle()) cyc.push_back(pair_json(t.alpha, t.beta));
        j["cycle"] = cyc;
    } else {
        j["verdict"] = "wandering";
        j["irrational_coordinate"] = std::get<WanderingLine>(cls).witness;
    }
    return j;
}

inline json certify_segment(const RunConfig& cfg) {
    const auto [lat, map] = load_map(cfg);
    const TorusSegment seg = require_segment(cfg);
    const WanderingVerdict v = certify_wandering(map, seg, cfg.check_iterates);
    json j;
    if (const auto* nw = std::get_if<NotWanderable>(&v)) {
        j["verdict"] = "not_wanderable";
        j["reason"] = nw->reason;
        return j;
    }
    j["verdict"] = "wandering";
    j["certificate"] = certificate_json(lat, std::get<WanderingCertificate>(v));
    return j;
}

inline std::optional<GroupAction> group_of(const RunConfig& cfg, const Lattice& lat, int nu) {
    if (nu <= 1) return std::nullopt;
    const auto [zx, zy] = parse_pair(cfg.z0, "--z0");
    return GroupAction::create(lat, nu, zx, zy);
}

inline json find_collision_cmd(const RunConfig& cfg) {
    const auto [lat, map] = load_map(cfg);
    const TorusSegment seg = require_segment(cfg);
    const auto group = group_of(cfg, lat, cfg.nu);
    const CollisionResult r = find_collision(map, seg, group, cfg.budget);
    if (const auto* c = std::get_if<CollisionCertificate>(&r)) {
        if (!verify_collision(map, seg, group, *c)) throw std::logic_error("collision certificate failed re-verification");
        return collision_json(*c);
    }
    const auto& nc = std::get<NoCollisionWithinBudget>(r);
    json j;
    j["verdict"] = "no_collision_within_budget";
    j["budget"] = nc.budget;
    if (std::isnan(nc.bound_used)) j["bound_used"] = nullptr;
    else j["bound_used"] = nc.bound_used;
    return j;
}

inline LattesModel load_model(const RunConfig& cfg, const AffineTorusMap& map) {
    const auto [zx, zy] = parse_pair(cfg.z0, "--z0");
    return lattes_model_new(map, cfg.nu == 0 ? 2 : cfg.nu, zx, zy);
}

inline json certify_sphere(const RunConfig& cfg) {
    const auto [lat, map] = load_map(cfg);
    const TorusSegment seg = require_segment(cfg);
    const LattesModel model = load_model(cfg, map);
    json j;
    j["signature"] = model.signature_str();
    j["flexible"] = model.flexible();
    const SphereVerdict v = certify_sphere_wandering(model, seg, cfg.check_iterates, cfg.budget);
    if (const auto* nf = std::get_if<NotFlexible>(&v)) {
        j["verdict"] = "not_flexible";
        j["reason"] = nf->reason;
        if (nf->witness) j["witness"] = collision_json(*nf->witness);
        return j;
    }
    if (const auto* nw = std::get_if<NotWanderable>(&v)) {
        j["verdict"] = "not_wanderable";
        j["reason"] = nw->reason;
        return j;
    }
    const auto& sc = std::get<SphereCertificate>(v);
    j["verdict"] = "wandering";
    j["avoids_Q"] = sc.avoids_Q;
    if (sc.pairing) {
        j["pairing"] = to_string(sc.pairing->kind);
        j["pairing_period"] = sc.pairing->period;
    }
    j["certificate"] = certificate_json(lat, sc.certificate);
    return j;
}

inline json verify_semiconjugacy_cmd(const RunConfig& cfg) {
    const auto [lat, map] = load_map(cfg);
    const LattesModel model = load_model(cfg, map);
    const double tol = cfg.tol.value_or(kDefaultSemiconjugacyTol);
    const SemiconjugacyReport rep = verify_semiconjugacy(model, cfg.samples, tol, cfg.seed, cfg.fit);
    json j;
    j["path"] = rep.path;
    j["samples"] = rep.samples.size();
    j["max_residual"] = rep.max_residual;
    j["tol"] = tol;
    j["degree"] = rep.fitted_degree;
    if (rep.path == "analytic") j["duplication_check"] = rep.duplication_check;
    if (rep.fit) {
        const auto [num, den] = rep.fit->monic_coefficients();
        json jn = json::array(), jd = json::array();
        for (const cd c : num) jn.push_back(complex_json(c));
        for (const cd c : den) jd.push_back(complex_json(c));
        j["numerator"] = jn;
        j["denominator"] = jd;
    }
    if (!cfg.csv.empty()) {
        std::ofstream f(cfg.csv, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoError, "cannot open " + cfg.csv);
        f << "z_re,z_im,wp_re,wp_im,residual\n";
        f.precision(17);
        for (const auto& s : rep.samples)
            f << s.z.real() << ',' << s.z.imag() << ',' << s.theta.real() << ',' << s.theta.imag() << ',' << s.residual
              << '\n';
        if (!f) throw Error(ErrorCode::IoError, "failed writing " + cfg.csv);
        j["csv"] = cfg.csv;
    }
    return j;
}

inline std::string plot_orbit(const RunConfig& cfg, json& summary) {
    const auto [lat, map] = load_map(cfg);
    const TorusSegment seg = require_segment(cfg);
    if (cfg.iterates < 0) throw Error(ErrorCode::UsageError, "--iterates must be non-negative");
    std::vector<SegmentLift> lifts = iterate_lifts(map, seg, cfg.iterates);
    std::optional<cd> witness;
    const auto group = group_of(cfg, lat, cfg.nu);
    if (group || !map.has_integer_derivative()) {
        const CollisionResult r = find_collision(map, seg, group, cfg.budget.value_or(std::max(1, cfg.iterates)));
        if (const auto* c = std::get_if<CollisionCertificate>(&r)) {
            witness = c->witness_float;
            summary["witness"] = collision_json(*c);
        }
    }
    summary["iterates"] = lifts.size();
    return orbit_svg(lat, lifts, witness);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

inline std::string dump(const json& j, bool pretty) { return (pretty ? j.dump(2) : j.dump()) + "\n"; }

// Adds options from a JSON config file that were not given on the command line.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    if (path.empty()) return args;
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open config " + path);
    json cfg;
    try {
        cfg = json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::UsageError, std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw Error(ErrorCode::UsageError, "config must be a JSON object");
    std::vector<std::string> out = args;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (given) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_string()) {
            out.push_back(flag);
            out.push_back(value.get<std::string>());
        } else if (value.is_number()) {
            out.push_back(flag);
            out.push_back(value.dump());
        } else {
            throw Error(ErrorCode::UsageError, "config value for \"" + key + "\" must be a string, number or boolean");
        }
    }
    return out;
}

}  // namespace detail

inline json error_json(ErrorCode code, const std::string& message) {
    return {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

/// Runs one subcommand; args exclude the program name.
inline int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"Wandering continua of flexible Lattes maps: certificates on tori and spheres"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default option values");
    app.add_flag("--json", cfg.pretty, "indented JSON output");
    app.add_option("--out", cfg.out, "write the result to this file");
    app.add_option("--budget", cfg.budget, "collision search iterate cap")->check(CLI::PositiveNumber);
    app.add_option("--tol", cfg.tol, "numerical tolerance")->check(CLI::Range(0.0, 1.0));
    app.add_option("--a", cfg.a, "multiplier a");
    app.add_option("--b", cfg.b, "translation b");
    app.add_option("--omega", cfg.omega, "lattice generator omega");
    app.add_option("--seg", cfg.seg, "segment \"x,y,h|v|s:<slope>,len\"");
    app.add_option("--slope", cfg.slope, "line slope dy/dx in lattice coordinates");
    app.add_option("--point", cfg.point, "point \"x,y\" on the line");
    app.add_option("--transverse", cfg.transverse, "transverse pair \"alpha,beta\"");
    app.add_option("--nu", cfg.nu, "rotation group order")->check(CLI::IsMember({1, 2, 3, 4, 6}));
    app.add_option("--z0", cfg.z0, "rotation centre \"x,y\" in lattice coordinates");
    app.add_option("--check-iterates", cfg.check_iterates, "iterates in the disjointness cross-check")
        ->check(CLI::Range(1, kMaxCheckIterates));
    app.add_option("--samples", cfg.samples, "semiconjugacy sample count")->check(CLI::PositiveNumber);
    app.add_option("--iterates", cfg.iterates, "iterates to plot")->check(CLI::Range(0, 9999));
    app.add_option("--seed", cfg.seed, "sampling seed");
    app.add_flag("--fit", cfg.fit, "force the fitted path");
    app.add_option("--csv", cfg.csv, "sample dump for verify-semiconjugacy");
    const std::pair<const char*, const char*> commands[] = {
        {"classify-map", "multiplier class and linear part"},
        {"classify-line", "orbit type of a line"},
        {"certify-segment", "wandering certificate on the torus"},
        {"find-collision", "first meeting of two iterates"},
        {"certify-sphere", "wandering certificate on the sphere"},
        {"verify-semiconjugacy", "numerical check of the induced rational map"},
        {"plot-orbit", "SVG of segment iterates"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    const auto fail = [&](ErrorCode code, const std::string& message) {
        const std::string text = detail::dump(error_json(code, message), cfg.pretty);
        out << text;
        return exit_code(code);
    };

    try {
        std::vector<std::string> args = detail::merge_config(raw_args);
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::ParseError& e) {
            return fail(ErrorCode::UsageError, e.what());
        }
        cfg.command = app.get_subcommands().front()->get_name();

        json result;
        std::string text;
        if (cfg.command == "classify-map") result = detail::classify_map(cfg);
        else if (cfg.command == "classify-line") result = detail::classify_line_cmd(cfg);
        else if (cfg.command == "certify-segment") result = detail::certify_segment(cfg);
        else if (cfg.command == "find-collision") result = detail::find_collision_cmd(cfg);
        else if (cfg.command == "certify-sphere") result = detail::certify_sphere(cfg);
        else if (cfg.command == "verify-semiconjugacy") result = detail::verify_semiconjugacy_cmd(cfg);
        else if (cfg.command == "plot-orbit") {
            const std::string svg = detail::plot_orbit(cfg, result);
            if (cfg.out.empty()) {
                out << svg;
                return 0;
            }
            detail::write_text(cfg.out, svg);
            result["svg"] = cfg.out;
            out << detail::dump(result, cfg.pretty);
            return 0;
        }
        text = detail::dump(result, cfg.pretty);
        if (cfg.out.empty()) out << text;
        else detail::write_text(cfg.out, text);
        return 0;
    } catch (const Error& e) {
        return fail(e.code(), e.message());
    } catch (const std::logic_error& e) {
        err << "internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace lattes::cli
