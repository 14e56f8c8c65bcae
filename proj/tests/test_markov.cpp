#include <catch2/catch.hpp>

#include <cmath>

#include "conjkit/markov.hpp"
#include "fixtures.hpp"

using namespace conjkit;

namespace {

SimConfig cfg_of(std::uint64_t seed, std::int64_t steps, int chains,
                 std::vector<double> q) {
    SimConfig c;
    c.seed = seed;
    c.steps = steps;
    c.chains = chains;
    c.q = std::move(q);
    return c;
}

}  // namespace

TEST_CASE("counter rng streams are deterministic and distinct") {
    CounterRng a(42, 0), b(42, 0), c(42, 1);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    CounterRng u(7, 3);
    for (int i = 0; i < 1000; ++i) {
        double v = u.unit();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("iid sampling on the degenerate-Y system") {
    auto s = analyze_lf_system(fixtures::example3_g());
    auto stats = sample_path(s, cfg_of(2024, 100000, 4, {0.25, 0.25, 0.25, 0.25}));

    // frequencies approach G(0) = (1/3, 1/6, 1/6, 1/3) within 3 sigma
    double n = static_cast<double>(stats.total_steps);
    std::vector<double> expect{1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3};
    for (int i = 0; i < 4; ++i) {
        double sigma = std::sqrt(expect[static_cast<std::size_t>(i)] *
                                 (1 - expect[static_cast<std::size_t>(i)]) / n);
        CHECK(std::abs(stats.frequencies[static_cast<std::size_t>(i)] -
                       expect[static_cast<std::size_t>(i)]) <= 3 * sigma);
    }
}

TEST_CASE("single step law") {
    auto s = analyze_lf_system(fixtures::example1_g());
    auto one = sample_path(s, cfg_of(1, 1, 2000, {0.5, 0.5}));
    // each chain draws one symbol with law G(0) = (1/5, 4/5)
    CHECK(one.frequencies[0] == Approx(0.2).margin(0.03));
    CHECK(one.frequencies[1] == Approx(0.8).margin(0.03));
}

TEST_CASE("visited states stay inside Y") {
    auto s = analyze_lf_system(fixtures::example1_g());
    SimConfig cfg = cfg_of(5, 3000, 1, {0.5, 0.5});
    cfg.record_trace = true;
    auto stats = sample_path(s, cfg);
    REQUIRE(stats.trace.size() == 3000);
    for (const auto& [t, sym] : stats.trace) {
        CHECK(t >= s.Y.t_lo - 1e-12);
        CHECK(t <= s.Y.t_hi + 1e-12);
        CHECK((sym == 0 || sym == 1));
    }
}

TEST_CASE("log ratio statistics on the iid system") {
    auto s = analyze_lf_system(fixtures::example3_g());

    // q = G(0): R_n is identically 1
    auto match = sample_path(s, cfg_of(9, 20000, 2,
                                       {1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3}));
    auto lr = log_ratio_stats(match);
    CHECK(lr.minus_log_ratio_over_n == Approx(0.0).margin(1e-12));
    CHECK(lr.birkhoff_mean == Approx(0.0).margin(1e-12));

    // q uniform: the Birkhoff mean is the constant s_4(G(0)|q)
    double expect = std::log(3.0) - 5.0 / 3.0 * std::log(2.0);
    auto unif = sample_path(s, cfg_of(11, 50000, 8, {0.25, 0.25, 0.25, 0.25}));
    auto lu = log_ratio_stats(unif);
    CHECK(lu.birkhoff_mean == Approx(expect).margin(1e-12));
    // and -log R_n / n concentrates around the same value
    CHECK(std::abs(lu.minus_log_ratio_over_n - lu.birkhoff_mean) <=
          2 * std::max(lu.log_ratio_agg.ci95, 1e-4));
}

TEST_CASE("worked-system Birkhoff mean obeys the entropy bound") {
    auto s = analyze_lf_system(fixtures::example1_g());
    auto stats = sample_path(s, cfg_of(13, 100000, 4, {0.8, 0.2}));
    auto lr = log_ratio_stats(stats);
    // s_2(G(y)|q) <= -(6/5) log 2 pointwise on Y for q = (4/5, 1/5)
    CHECK(lr.birkhoff_mean <= -0.83 + 1e-9);
    CHECK(lr.minus_log_ratio_over_n <= -0.83 + 3 * lr.log_ratio_agg.ci95);
}

TEST_CASE("frequency lower law") {
    auto s1 = analyze_lf_system(fixtures::example1_g());
    auto st1 = sample_path(s1, cfg_of(17, 50000, 4, {0.5, 0.5}));
    auto full = frequency_check(st1, {0, 1}, 1.0);
    CHECK(full.holds);
    CHECK(full.frequency == Approx(1.0));

    // Case 2.2: inf G_1 = 4/5 over Y
    auto fr1 = frequency_check(st1, {1}, 0.8);
    CHECK(fr1.holds);

    auto s3 = analyze_lf_system(fixtures::example3_g());
    auto st3 = sample_path(s3, cfg_of(19, 50000, 4, {0.25, 0.25, 0.25, 0.25}));
    auto fr3 = frequency_check(st3, {0}, 1.0 / 3.0);
    CHECK(fr3.holds);
}

TEST_CASE("martingale consistency at a frozen state") {
    auto s = analyze_lf_system(fixtures::example2_g());
    double t = 0.5 * (s.Y.t_lo + s.Y.t_hi);
    ProbVec G = s.G_at_chart(t);
    std::vector<double> q{0.5, 0.3, 0.2};

    CounterRng rng(101, 0);
    const int draws = 100000;
    double sum = 0, sumsq = 0;
    for (int it = 0; it < draws; ++it) {
        double u = rng.unit();
        int sym = 2;
        double acc = 0;
        for (int i = 0; i < 3; ++i) {
            acc += G.v[static_cast<std::size_t>(i)];
            if (u < acc) { sym = i; break; }
        }
        double x = std::log(G.v[static_cast<std::size_t>(sym)]) -
                   std::log(q[static_cast<std::size_t>(sym)]);
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / draws;
    double se = std::sqrt((sumsq / draws - mean * mean) / draws);
    CHECK(mean == Approx(-rel_entropy(G.v, q)).margin(4 * se));
}

TEST_CASE("azuma concentration over repeated runs") {
    auto s = analyze_lf_system(fixtures::example3_g());
    const std::int64_t n = 10000;
    int violations = 0;
    for (int run = 0; run < 50; ++run) {
        auto stats = sample_path(
            s, cfg_of(3000 + static_cast<std::uint64_t>(run), n, 1,
                      {0.25, 0.25, 0.25, 0.25}));
        double dev = std::abs(stats.frequencies[0] - 1.0 / 3.0);
        if (dev > 3.0 * std::sqrt(1.0 / (2.0 * static_cast<double>(n)))) ++violations;
    }
    CHECK(violations <= 2);
}

TEST_CASE("determinism across worker counts") {
    auto s = analyze_lf_system(fixtures::example2_g());
    auto cfg1 = cfg_of(77, 20000, 8, {0.4, 0.35, 0.25});
    cfg1.threads = 1;
    auto cfg4 = cfg1;
    cfg4.threads = 4;
    auto a = sample_path(s, cfg1);
    auto b = sample_path(s, cfg4);
    REQUIRE(a.per_chain.size() == b.per_chain.size());
    for (std::size_t c = 0; c < a.per_chain.size(); ++c) {
        CHECK(a.per_chain[c].sum_log_G == b.per_chain[c].sum_log_G);
        CHECK(a.per_chain[c].sum_sN == b.per_chain[c].sum_sN);
        CHECK(a.per_chain[c].counts == b.per_chain[c].counts);
    }
    CHECK(a.log_ratio.mean == b.log_ratio.mean);
}

TEST_CASE("two-step inequality along sampled paths") {
    auto s = analyze_lf_system(fixtures::example1_g());
    Coloring col(s);
    std::vector<double> q{0.45, 0.55};  // interior, away from both p_i
    int i1 = col(q);
    auto wi = inf_W(s, i1, q);
    REQUIRE(wi.certified > 0.0);
    double vq = V_of(q, wi.certified);

    SimConfig cfg = cfg_of(23, 4000, 1, q);
    cfg.record_trace = true;
    auto stats = sample_path(s, cfg);
    REQUIRE(stats.trace.size() == 4000);
    int checked = 0;
    for (std::size_t j = 0; j + 1 < stats.trace.size(); ++j) {
        if (stats.trace[j].second != i1) continue;
        double sj = rel_entropy(s.G_at_chart(stats.trace[j].first).v, q);
        double sj1 = rel_entropy(s.G_at_chart(stats.trace[j + 1].first).v, q);
        CHECK(sj + sj1 <= vq + 1e-9);
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("thread cap from the environment") {
    auto s = analyze_lf_system(fixtures::example3_g());
    auto cfg = cfg_of(55, 5000, 6, {0.25, 0.25, 0.25, 0.25});
    cfg.threads = 1;
    auto serial = sample_path(s, cfg);

    setenv("CONJKIT_THREADS", "2", 1);
    cfg.threads = 0;  // auto: capped by the environment
    auto capped = sample_path(s, cfg);
    unsetenv("CONJKIT_THREADS");

    REQUIRE(capped.per_chain.size() == serial.per_chain.size());
    for (std::size_t c = 0; c < serial.per_chain.size(); ++c)
        CHECK(capped.per_chain[c].counts == serial.per_chain[c].counts);
}

TEST_CASE("empirical dimension of the classical solutions") {
    auto s_half = analyze_lf_system(fixtures::lebesgue_g(Rat(1, 2)));
    ConjugacyPair lp_half{fixtures::dyadic(), fixtures::lebesgue_g(Rat(1, 2))};
    auto d_half = empirical_dimension(lp_half, s_half, cfg_of(31, 20000, 8, {0.5, 0.5}));
    CHECK(d_half.estimate == Approx(1.0).margin(0.01));

    auto s_03 = analyze_lf_system(fixtures::lebesgue_g(Rat(3, 10)));
    ConjugacyPair lp{fixtures::dyadic(), fixtures::lebesgue_g(Rat(3, 10))};
    auto d = empirical_dimension(lp, s_03, cfg_of(37, 50000, 8, {0.5, 0.5}));
    CHECK(d.estimate == Approx(0.8813).margin(0.02));
}
