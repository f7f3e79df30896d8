#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "lattes/cli.hpp"
#include "support.hpp"

using namespace lattes;
using json = nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    json j() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str()};
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lattes_cli_test_" + std::to_string(::getpid()) + "_" + name);
}

// Every string value that parses as a scalar must print back identically.
void check_round_trip(const json& j, int& checked) {
    if (j.is_object() || j.is_array()) {
        for (const auto& v : j) check_round_trip(v, checked);
        return;
    }
    if (!j.is_string()) return;
    const std::string s = j.get<std::string>();
    QN x;
    try {
        x = qnum_parse(s);
    } catch (const Error&) {
        return;
    }
    ++checked;
    EXPECT_EQ(qnum_parse(x.str()), x) << s;
    EXPECT_EQ(x.str(), s);
}

}  // namespace

TEST(Cli, ClassifyMap) {
    const auto r = run({"classify-map", "--a", "2", "--b", "0", "--omega", "i"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.j()["degree"], 4);
    EXPECT_EQ(r.j()["multiplier"], "integer");
    const auto g = run({"classify-map", "--a", "1+1i", "--omega", "i"});
    EXPECT_EQ(g.j()["multiplier"], "non_real");
    EXPECT_NEAR(g.j()["theta"].get<double>(), M_PI / 4, 1e-15);
}

TEST(Cli, InputErrorsExitTwo) {
    const auto r = run({"classify-map", "--a", "sqrt(2)", "--b", "0", "--omega", "i"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.j()["error"]["code"], "NotACovering");
    EXPECT_EQ(run({"classify-map", "--bogus", "1"}).code, 2);
    EXPECT_EQ(run({"classify-map", "--a", "2+"}).j()["error"]["code"], "SyntaxError");
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"find-collision", "--a", "1+1i", "--seg", "0.1,0.2,h,0.05", "--budget", "0"}).code, 2);
    EXPECT_EQ(run({"verify-semiconjugacy", "--tol", "2"}).code, 2);
    EXPECT_EQ(run({"certify-segment", "--a", "2", "--seg", "0,0,q,1"}).j()["error"]["code"], "UsageError");
    EXPECT_EQ(run({"classify-map", "--omega", "-i"}).j()["error"]["code"], "LowerHalfPlane");
}

TEST(Cli, ToleranceFailureExitsThree) {
    const auto r = run({"verify-semiconjugacy", "--a", "3", "--samples", "20", "--tol", "1e-15"});
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(r.j()["error"]["code"], "ResidualExceedsTol");
}

TEST(Cli, FindCollisionExample) {
    const auto r = run({"find-collision", "--a", "1+1i", "--b", "0", "--omega", "i", "--seg", "0.1,0.2,h,0.05"});
    ASSERT_EQ(r.code, 0);
    const json j = r.j();
    EXPECT_EQ(j["verdict"], "collision");
    EXPECT_LE(j["m"].get<int>(), 15);
    EXPECT_TRUE(j["witness"]["exact"].get<bool>());

    // Re-verify the witness independently of the search.
    const auto lat = lattice_new(parse_complex("i"));
    const auto map = torus_map_new(parse_complex("1+i"), parse_complex("0"), lat);
    const TorusSegment s = cli::detail::parse_segment("0.1,0.2,h,0.05");
    CollisionCertificate c;
    c.n = j["n"];
    c.m = j["m"];
    c.k = j["k"];
    c.witness.n = Integer(j["witness"]["translate"][0].get<std::string>());
    c.witness.m = Integer(j["witness"]["translate"][1].get<std::string>());
    EXPECT_TRUE(verify_collision(map, s, std::nullopt, c));
}

TEST(Cli, NoCollisionIsDefinite) {
    const auto r = run({"find-collision", "--a", "2", "--seg", "sqrt(3)/7,0,s:sqrt(2)+1/3,1/20", "--budget", "20"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.j()["verdict"], "no_collision_within_budget");
}

TEST(Cli, CertifySegmentAndSphere) {
    const auto w = run({"certify-segment", "--a", "2", "--slope", "sqrt(2)", "--transverse", "sqrt(3)-1,0", "--seg",
                        "0,1-sqrt(3),s:sqrt(2),1/10"});
    ASSERT_EQ(w.code, 0) << w.out;
    EXPECT_EQ(w.j()["verdict"], "wandering");
    EXPECT_EQ(w.j()["certificate"]["mode"], "whole_segment");
    const auto jordan = run({"certify-segment", "--a", "2", "--seg", "0,0,s:1,1/10"});
    EXPECT_EQ(jordan.code, 0);
    EXPECT_EQ(jordan.j()["verdict"], "not_wanderable");
    const auto sphere = run({"certify-sphere", "--a", "2", "--nu", "4", "--seg", "0.1,0.2,s:sqrt(2),0.1"});
    ASSERT_EQ(sphere.code, 0);
    EXPECT_EQ(sphere.j()["verdict"], "not_flexible");
    EXPECT_LE(sphere.j()["witness"]["m"].get<int>(), 7);
    const auto nine = run({"certify-sphere", "--a", "2", "--nu", "3", "--seg", "0.1,0.2,h,0.1"});
    EXPECT_EQ(nine.j()["error"]["code"], "WrongLatticeForGroup");
}

TEST(Cli, ClassifyLine) {
    const auto r = run({"classify-line", "--a", "2", "--slope", "sqrt(2)", "--transverse", "1/3,0"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.j()["verdict"], "eventually_periodic");
    EXPECT_EQ(r.j()["preperiod"], 0);
    EXPECT_EQ(r.j()["period"], 2);
    const auto clash = run({"classify-line", "--a", "2", "--slope", "sqrt(2)", "--point", "0,sqrt(2)/2"});
    EXPECT_EQ(clash.code, 2);
    EXPECT_EQ(clash.j()["error"]["code"], "FieldClash");
}

TEST(Cli, Deterministic) {
    const std::vector<std::vector<std::string>> cases{
        {"classify-map", "--a", "1+1i"},
        {"find-collision", "--a", "1+1i", "--seg", "0.1,0.2,h,0.05"},
        {"certify-sphere", "--a", "2", "--seg", "0.1,0.2,s:sqrt(2),1/10"},
        {"verify-semiconjugacy", "--a", "2", "--samples", "40"},
        {"plot-orbit", "--a", "1+1i", "--seg", "0.1,0.2,h,0.05", "--iterates", "6"},
    };
    for (const auto& args : cases) {
        const auto a = run(args), b = run(args);
        EXPECT_EQ(a.code, 0) << a.out;
        EXPECT_EQ(a.out, b.out);
    }
}

TEST(Cli, ExactScalarsRoundTrip) {
    int checked = 0;
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"certify-segment", "--a", "2", "--seg", "1/7,sqrt(3)/5,s:(1+sqrt(5))/2,1/9"},
             {"certify-sphere", "--a", "-2", "--b", "1/2", "--seg", "1/5,0,s:sqrt(5),1/10"},
             {"classify-line", "--a", "3", "--slope", "2-sqrt(7)", "--transverse", "2/9,5/6"},
             {"find-collision", "--a", "1+1i", "--seg", "1/3,1/7,s:2/3,1/8"}}) {
        const auto r = run(args);
        ASSERT_EQ(r.code, 0) << r.out;
        check_round_trip(r.j(), checked);
    }
    EXPECT_GT(checked, 20);
}

TEST(Cli, PrettyOutFileAndConfig) {
    const auto compact = run({"classify-map", "--a", "3"});
    const auto pretty = run({"classify-map", "--a", "3", "--json"});
    EXPECT_EQ(compact.j(), pretty.j());
    EXPECT_NE(pretty.out.find("\n  "), std::string::npos);

    const auto out = temp_path("out.json");
    EXPECT_EQ(run({"classify-map", "--a", "3", "--out", out.string()}).out, "");
    std::ifstream f(out);
    EXPECT_EQ(json::parse(f), compact.j());
    std::filesystem::remove(out);

    const auto cfg = temp_path("cfg.json");
    std::ofstream(cfg) << R"({"a": "1+1i", "omega": "i", "seg": "0.1,0.2,h,0.05", "budget": 3})";
    const auto viaconfig = run({"find-collision", "--config", cfg.string(), "--budget", "16"});
    EXPECT_EQ(viaconfig.out, run({"find-collision", "--a", "1+1i", "--seg", "0.1,0.2,h,0.05", "--budget", "16"}).out);
    std::filesystem::remove(cfg);

    EXPECT_EQ(run({"classify-map", "--out", "/nonexistent-dir/x.json"}).j()["error"]["code"], "IoError");
}

TEST(Cli, PlotOrbit) {
    const auto empty = run({"plot-orbit", "--a", "2", "--seg", "0.1,0.2,h,0.05", "--iterates", "0"});
    ASSERT_EQ(empty.code, 0);
    EXPECT_NE(empty.out.find("class=\"fundamental\""), std::string::npos);
    EXPECT_EQ(empty.out.find("data-n=\"1\""), std::string::npos);

    const auto wander = run({"plot-orbit", "--a", "2", "--seg", "0,1-sqrt(3),s:sqrt(2),1/10", "--iterates", "11"});
    std::size_t groups = 0;
    for (std::size_t pos = 0; (pos = wander.out.find("class=\"iterate\"", pos)) != std::string::npos; ++pos) ++groups;
    EXPECT_EQ(groups, 12u);
    EXPECT_EQ(wander.out.find("class=\"witness\""), std::string::npos);

    const auto collide = run({"plot-orbit", "--a", "1+1i", "--seg", "0.1,0.2,h,0.05", "--iterates", "6"});
    EXPECT_NE(collide.out.find("class=\"witness\""), std::string::npos);

    const auto svg = temp_path("orbit.svg");
    const auto r = run({"plot-orbit", "--a", "1+1i", "--seg", "0.1,0.2,h,0.05", "--iterates", "6", "--out", svg.string()});
    EXPECT_EQ(r.j()["svg"], svg.string());
    std::ifstream f(svg);
    std::stringstream ss;
    ss << f.rdbuf();
    EXPECT_EQ(ss.str(), collide.out);
    std::filesystem::remove(svg);
}

TEST(Cli, SemiconjugacyCsv) {
    const auto csv = temp_path("samples.csv");
    const auto r = run({"verify-semiconjugacy", "--a", "2", "--samples", "30", "--csv", csv.string()});
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.j()["path"], "analytic");
    std::ifstream f(csv);
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line, "z_re,z_im,wp_re,wp_im,residual");
    int rows = 0;
    while (std::getline(f, line)) ++rows;
    EXPECT_EQ(rows, 30);
    std::filesystem::remove(csv);
}

TEST(Cli, BinaryExitCodes) {
    const auto call = [](const std::string& args) {
        const std::string cmd = std::string(LATTES_CLI_PATH) + " " + args + " 2>/dev/null";
        FILE* p = ::popen(cmd.c_str(), "r");
        std::string text;
        std::array<char, 256> buf{};
        while (std::fgets(buf.data(), buf.size(), p)) text += buf.data();
        const int status = ::pclose(p);
        return std::make_pair(WEXITSTATUS(status), text);
    };
    const auto ok = call("classify-map --a 2 --b 0 --omega i");
    EXPECT_EQ(ok.first, 0);
    EXPECT_EQ(json::parse(ok.second)["degree"], 4);
    EXPECT_EQ(call("classify-map --a 'sqrt(2)' --b 0 --omega i").first, 2);
    EXPECT_EQ(call("verify-semiconjugacy --a 3 --samples 10 --tol 1e-15").first, 3);
    EXPECT_EQ(call("--help").first, 0);
}
