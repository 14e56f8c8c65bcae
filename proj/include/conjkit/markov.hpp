#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "conjkit/conjugacy.hpp"
#include "conjkit/entropy.hpp"
#include "conjkit/spectral.hpp"

namespace conjkit {

/// Counter-based generator: one independent stream per (seed, stream) key.
/// The contract is reproducibility of (seed, chain) -> draws, independent of
/// worker scheduling.
struct CounterRng {
    std::uint64_t state;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state(mix(seed ^ mix(stream))) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::int64_t steps = 1000;
    int chains = 1;
    std::vector<double> q;  // must be strictly positive
    int threads = 0;        // 0 = auto (capped by CONJKIT_THREADS)
    bool record_trace = false;
};

struct ChainStats {
    std::int64_t steps = 0;
    double sum_log_G = 0;   // sum of log G_{xi_j}(y_{j-1})
    double sum_log_q = 0;
    double sum_sN = 0;      // sum of s_N(G(y_j) | q), j = 0..n-1
    std::vector<std::int64_t> counts;

    double minus_log_ratio_over_n() const {
        return (sum_log_q - sum_log_G) / static_cast<double>(steps);
    }
    double birkhoff_mean() const { return sum_sN / static_cast<double>(steps); }
};

struct Aggregate {
    double mean = 0, stddev = 0, ci95 = 0;
};

struct PathStats {
    std::vector<ChainStats> per_chain;
    Aggregate log_ratio;   // of -log R_n / n
    Aggregate birkhoff;    // of the s_N Birkhoff means
    std::vector<double> frequencies;  // pooled symbol frequencies
    std::int64_t total_steps = 0;
    // trace of chain 0 when requested: (t_before, symbol) per step
    std::vector<std::pair<double, int>> trace;
};

namespace detail {

inline int max_threads_from_env() {
    if (const char* env = std::getenv("CONJKIT_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return static_cast<int>(std::thread::hardware_concurrency());
}

inline Aggregate aggregate_of(const std::vector<double>& xs) {
    Aggregate a;
    const double n = static_cast<double>(xs.size());
    if (xs.empty()) return a;
    for (double x : xs) a.mean += x;
    a.mean /= n;
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.stddev = std::sqrt(ss / (n - 1.0));
        a.ci95 = 1.96 * a.stddev / std::sqrt(n);
    }
    return a;
}

}  // namespace detail

/**
 * Simulates the place-dependent chain from y_0 = 0: draw xi with law G(y),
 * then move y along H_xi. Chains use independent counter-based streams and
 * merge in chain order, so results are bit-identical for a fixed (seed, cfg)
 * regardless of the worker count.
 */
inline PathStats sample_path(const SpectralData& s, const SimConfig& cfg) {
    const int n = s.N;
    if (cfg.steps < 1 || cfg.chains < 1)
        throw std::invalid_argument("sample_path: steps and chains must be >= 1");
    if (static_cast<int>(cfg.q.size()) != n)
        throw std::invalid_argument("sample_path: q has wrong dimension");
    for (double qi : cfg.q)
        if (qi <= 0.0)
            throw std::invalid_argument("sample_path: q must be strictly positive");

    const double t0 = chart_of_y(0.0);
    std::vector<double> logq(cfg.q.size());
    for (std::size_t i = 0; i < cfg.q.size(); ++i) logq[i] = std::log(cfg.q[i]);

    PathStats out;
    out.per_chain.resize(static_cast<std::size_t>(cfg.chains));

    auto run_chain = [&](int chain) {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(chain));
        ChainStats st;
        st.steps = cfg.steps;
        st.counts.assign(static_cast<std::size_t>(n), 0);
        bool trace_me = cfg.record_trace && chain == 0;

        double t = t0;
        std::vector<double> G(static_cast<std::size_t>(n));
        for (std::int64_t j = 0; j < cfg.steps; ++j) {
            double total = 0;
            for (int i = 0; i < n; ++i) {
                double gi = s.G[static_cast<std::size_t>(i)].eval_chart(t);
                if (gi < -1e-14)
                    throw std::runtime_error("sample_path: negative transition weight");
                G[static_cast<std::size_t>(i)] = std::max(gi, 0.0);
                total += G[static_cast<std::size_t>(i)];
            }
            // Birkhoff term at the current state
            double sN = 0;
            for (int i = 0; i < n; ++i) {
                double p = G[static_cast<std::size_t>(i)] / total;
                if (p > 0) sN += p * (logq[static_cast<std::size_t>(i)] - std::log(p));
            }
            st.sum_sN += std::min(sN, 0.0);

            double u = rng.unit() * total;
            int sym = n - 1;
            double acc = 0;
            for (int i = 0; i < n; ++i) {
                acc += G[static_cast<std::size_t>(i)];
                if (u < acc) { sym = i; break; }
            }
            if (trace_me) out.trace.emplace_back(t, sym);
            st.counts[static_cast<std::size_t>(sym)] += 1;
            st.sum_log_G += std::log(G[static_cast<std::size_t>(sym)] / total);
            st.sum_log_q += logq[static_cast<std::size_t>(sym)];
            t = s.H_apply_chart(sym, t);
        }
        out.per_chain[static_cast<std::size_t>(chain)] = std::move(st);
    };

    int workers = cfg.threads > 0 ? cfg.threads : detail::max_threads_from_env();
    workers = std::clamp(workers, 1, cfg.chains);
    if (workers == 1 || cfg.record_trace) {
        for (int c = 0; c < cfg.chains; ++c) run_chain(c);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int c = w; c < cfg.chains; c += workers) run_chain(c);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<double> ratios, birk;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (const auto& st : out.per_chain) {
        ratios.push_back(st.minus_log_ratio_over_n());
        birk.push_back(st.birkhoff_mean());
        for (int i = 0; i < n; ++i)
            counts[static_cast<std::size_t>(i)] += st.counts[static_cast<std::size_t>(i)];
        out.total_steps += st.steps;
    }
    out.log_ratio = detail::aggregate_of(ratios);
    out.birkhoff = detail::aggregate_of(birk);
    for (int i = 0; i < n; ++i)
        out.frequencies.push_back(static_cast<double>(counts[static_cast<std::size_t>(i)]) /
                                  static_cast<double>(out.total_steps));
    return out;
}

struct LogRatioStats {
    double minus_log_ratio_over_n;
    double birkhoff_mean;
    Aggregate log_ratio_agg, birkhoff_agg;
};

/// The two long-run statistics whose almost-sure equality the martingale
/// argument asserts; returned together so agreement can be checked.
inline LogRatioStats log_ratio_stats(const PathStats& path) {
    return {path.log_ratio.mean, path.birkhoff.mean, path.log_ratio, path.birkhoff};
}

struct FrequencyReport {
    double frequency = 0;
    double c_I = 0;
    double slack = 0;
    double margin = 0;  // frequency - (c_I - slack)
    bool holds = false;
};

/// Empirical counterpart of the lower frequency law: at n steps the pooled
/// frequency of I must be at least c_I minus an Azuma-style slack.
inline FrequencyReport frequency_check(const PathStats& path,
                                       const std::vector<int>& I, double c_I) {
    FrequencyReport rep;
    rep.c_I = c_I;
    for (int i : I) rep.frequency += path.frequencies.at(static_cast<std::size_t>(i));
    double n = static_cast<double>(path.total_steps);
    rep.slack = 3.0 * std::sqrt(std::log(std::max(n, 2.0)) / n);
    rep.margin = rep.frequency - (c_I - rep.slack);
    rep.holds = rep.margin >= 0.0;
    return rep;
}

struct DimEstimate {
    double estimate = 0;
    double ci95 = 0;
    std::vector<double> per_chain;
};

/**
 * Local-dimension diagnostic of mu_phi: along nu_0-sampled words, the ratio
 * log(g-cylinder mass) / log(f-cylinder length) at depth cfg.steps. Widths
 * are tracked in log space through chord-slope factors, so no underflow
 * occurs at any depth.
 */
inline DimEstimate empirical_dimension(const ConjugacyPair& pair,
                                       const SpectralData& s, const SimConfig& cfg) {
    const int n = s.N;
    if (pair.N() != n) throw std::invalid_argument("empirical_dimension: N mismatch");

    auto log_ratio_of = [](const IntervalMap& m, double u, double v) -> double {
        if (auto* mo = std::get_if<MobiusMap>(&m)) {
            double c = mo->c.to_double(), d = mo->d.to_double();
            return std::log(mo->det().to_double()) - std::log(c * u + d) -
                   std::log(c * v + d);
        }
        if (auto* af = std::get_if<AffineMap>(&m))
            return std::log(af->slope.to_double());
        return std::log(std::get<QuadMap>(m).chord_slope(u, v));
    };

    std::vector<double> per_chain;
    const double t0 = chart_of_y(0.0);
    std::vector<int> word(static_cast<std::size_t>(cfg.steps));
    std::vector<double> G(static_cast<std::size_t>(n));
    for (int chain = 0; chain < cfg.chains; ++chain) {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(chain));
        double t = t0;
        for (std::int64_t j = 0; j < cfg.steps; ++j) {
            double total = 0;
            for (int i = 0; i < n; ++i) {
                G[static_cast<std::size_t>(i)] =
                    std::max(s.G[static_cast<std::size_t>(i)].eval_chart(t), 0.0);
                total += G[static_cast<std::size_t>(i)];
            }
            double u = rng.unit() * total;
            int sym = n - 1;
            double acc = 0;
            for (int i = 0; i < n; ++i) {
                acc += G[static_cast<std::size_t>(i)];
                if (u < acc) { sym = i; break; }
            }
            word[static_cast<std::size_t>(j)] = sym;
            t = s.H_apply_chart(sym, t);
        }
        // Widths of the word cylinder, innermost map first: prepending a map
        // multiplies the width by its chord slope over the current interval.
        double fu = 0.0, fv = 1.0, gu = 0.0, gv = 1.0;
        double log_flen = 0.0, log_gmass = 0.0;
        for (std::int64_t j = cfg.steps - 1; j >= 0; --j) {
            int sym = word[static_cast<std::size_t>(j)];
            log_flen += log_ratio_of(pair.f.at(sym), fu, fv);
            log_gmass += log_ratio_of(pair.g.at(sym), gu, gv);
            fu = map_eval(pair.f.at(sym), fu);
            fv = map_eval(pair.f.at(sym), fv);
            gu = map_eval(pair.g.at(sym), gu);
            gv = map_eval(pair.g.at(sym), gv);
        }
        per_chain.push_back(log_gmass / log_flen);
    }
    Aggregate a = detail::aggregate_of(per_chain);
    return {a.mean, a.ci95, std::move(per_chain)};
}

}  // namespace conjkit
