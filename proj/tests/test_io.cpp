#include <catch2/catch.hpp>

#include <cstdlib>
#include <fstream>
#include <string>

#include "conjkit/config.hpp"
#include "conjkit/harness.hpp"
#include "conjkit/io.hpp"
#include "conjkit/worked_examples.hpp"

using namespace conjkit;

namespace {

std::string fixture(const std::string& name) {
    return std::string(CONJKIT_FIXTURE_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(CONJKIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parses the bundled fixtures") {
    for (const char* name :
         {"example1.json", "example2.json", "example3.json", "minkowski.json",
          "lebesgue.json"}) {
        auto cfg = load_config(fixture(name));
        CHECK(cfg.g.N() >= 2);
        CHECK(cfg.g.N() == cfg.f.N());
        CHECK(validate_compatible_system(cfg.g).d_system);
        CHECK(validate_compatible_system(cfg.f).d_system);
    }
}

TEST_CASE("fixtures match the built-in worked systems") {
    auto cfg = load_config(fixture("example1.json"));
    auto builtin = worked::example1_g();
    for (int i = 0; i < 2; ++i) {
        MobiusMap a = cfg.g.mobius_at(i), b = builtin.mobius_at(i);
        CHECK(a.a == b.a);
        CHECK(a.b == b.b);
        CHECK(a.c == b.c);
        CHECK(a.d == b.d);
    }
}

TEST_CASE("config round trip is exact on rational fields") {
    auto cfg = load_config(fixture("example2.json"));
    auto again = parse_config(config_to_json(cfg));
    REQUIRE(again.g.N() == cfg.g.N());
    for (int i = 0; i < cfg.g.N(); ++i) {
        MobiusMap a = cfg.g.mobius_at(i), b = again.g.mobius_at(i);
        CHECK(a.a == b.a);
        CHECK(a.b == b.b);
        CHECK(a.c == b.c);
        CHECK(a.d == b.d);
    }
    CHECK(again.tol == cfg.tol);
    CHECK(again.seed == cfg.seed);
    CHECK(again.eps == cfg.eps);

    auto leb = load_config(fixture("lebesgue.json"));
    auto leb2 = parse_config(config_to_json(leb));
    CHECK(std::get<AffineMap>(leb2.g.maps[0]).slope == Rat(3, 10));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{\"name\":\"x\"}"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"g": [{"type":"mobius","a":"x","b":"0","c":"0","d":"1"},
                       {"type":"affine","slope":"1/2","intercept":"1/2"}]})"),
        ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("csv schema and precision") {
    PhiSample s;
    s.pts.push_back({0.0, 0.0, 0.0, std::nullopt, std::nullopt});
    s.pts.push_back({1.0 / 3.0, 0.25, 1e-10, std::nullopt, std::nullopt});
    std::string csv = phi_sample_csv(s, 12);
    CHECK(csv.rfind("x,phi,err\n", 0) == 0);
    CHECK(csv.find("0.333333333333,0.25,1e-10") != std::string::npos);
    std::string csv4 = phi_sample_csv(s, 4);
    CHECK(csv4.find("0.3333,0.25,1e-10") != std::string::npos);
}

TEST_CASE("svg output is deterministic with flipped y") {
    ConjugacyPair identity{worked::dyadic(), worked::lebesgue_g(Rat(1, 2))};
    auto sample = sample_phi(identity, 2, 1e-12);
    std::string svg = phi_sample_svg(sample);
    CHECK(svg.find("viewBox=\"0 0 1000 1000\"") != std::string::npos);
    CHECK(svg.find("0.0000,1000.0000 500.0000,500.0000 1000.0000,0.0000") !=
          std::string::npos);
    CHECK(svg == phi_sample_svg(sample));  // byte-identical

    ConjugacyPair mk{worked::minkowski_f(), worked::dyadic()};
    auto ms = sample_phi(mk, 1024, 1e-12, /*exact_mode=*/true);
    std::string msvg = phi_sample_svg(ms);
    // contains the scaled (1/3, 1/4) point
    CHECK(msvg.find("333.3333,750.0000") != std::string::npos);
    for (std::size_t k = 1; k < ms.pts.size(); ++k)
        CHECK(ms.pts[k].phi >= ms.pts[k - 1].phi);

    PhiSample bad;
    bad.pts.push_back({0.0, 0.5, 0, std::nullopt, std::nullopt});
    bad.pts.push_back({1.0, 0.2, 0, std::nullopt, std::nullopt});
    CHECK_THROWS_AS(phi_sample_svg(bad), std::invalid_argument);
}

TEST_CASE("path stats csv has one row per chain plus aggregate") {
    auto s = analyze_lf_system(worked::example3_g());
    SimConfig cfg;
    cfg.seed = 3;
    cfg.steps = 50;
    cfg.chains = 2;
    cfg.q = {0.25, 0.25, 0.25, 0.25};
    auto stats = sample_path(s, cfg);
    std::string csv = path_stats_csv(stats);
    CHECK(csv.find("chain,steps,minus_log_ratio_over_n,birkhoff_mean,freq_0") == 0);
    int rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 4);  // header + 2 chains + aggregate
    CHECK(csv.find("aggregate,") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    // 0: success
    CHECK(run_cli("validate " + fixture("example1.json")) == 0);
    CHECK(run_cli("analyze " + fixture("example2.json")) == 0);

    // 1: validation failure (broken joint)
    std::string bad = "/tmp/conjkit_bad_joint.json";
    {
        std::ofstream out(bad);
        out << R"({"g": [
            {"type":"affine","slope":"1/2","intercept":"0"},
            {"type":"affine","slope":"1/3","intercept":"2/3"}]})";
    }
    CHECK(run_cli("validate " + bad) == 1);

    // 2: certificate hypothesis failure
    CHECK(run_cli("bound " + fixture("example1.json") +
                  " --eps 0.1 --r 0.9,0.6 --region 0:0.8:1.0 --eps2 0.83 "
                  "--delta 0.2") == 2);

    // 3: malformed input
    std::string garbage = "/tmp/conjkit_garbage.json";
    {
        std::ofstream out(garbage);
        out << "{this is not json";
    }
    CHECK(run_cli("analyze " + garbage) == 3);
    CHECK(run_cli("measure " + fixture("example1.json") + " --interval 0.2") == 3);
    CHECK(run_cli("frobnicate") == 3);
}

TEST_CASE("cli bound and examples succeed end to end") {
    CHECK(run_cli("bound " + fixture("example3.json") +
                  " --eps 0.1 --r 0.12,0.45,0.45,0.12 --region "
                  "0:0:0.125,3:0:0.125 --eps2 0.38 --delta 0.2") == 0);
    CHECK(run_cli("examples --which 1 --quiet") == 0);
}
