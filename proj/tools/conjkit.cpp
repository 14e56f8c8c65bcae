// conjkit: construct the increasing solution of the conjugate equation
// g_i . phi = phi . f_i for LF-driven systems, and certify upper bounds on
// the Hausdorff dimension of its distribution measure.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conjkit/certificate.hpp"
#include "conjkit/config.hpp"
#include "conjkit/conjugacy.hpp"
#include "conjkit/harness.hpp"
#include "conjkit/io.hpp"
#include "conjkit/markov.hpp"
#include "conjkit/spectral.hpp"

namespace {

using namespace conjkit;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitBadInput = 3;

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

Word parse_word(const std::string& csv) {
    Word out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

// region format: "i:lo:hi[,j:lo:hi...]" on top of the full simplex
RegionSpec parse_region(int n, const std::string& text) {
    RegionSpec region = RegionSpec::full(n);
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::stringstream es(item);
        std::string idx, lo, hi;
        if (!std::getline(es, idx, ':') || !std::getline(es, lo, ':') ||
            !std::getline(es, hi, ':'))
            throw ConfigError("bad region entry: " + item);
        region.with_bounds(std::stoi(idx), std::stod(lo), std::stod(hi));
    }
    return region;
}

std::string ypoint_str(const YPoint& y) {
    if (y.is_pos_inf) return "+inf";
    if (y.exact()) return y.exact_value().str();
    std::ostringstream os;
    os.precision(12);
    os << y.to_double();
    return os.str();
}

std::string pvec_str(const ProbVec& p) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < p.N(); ++i) {
        if (i) os << ", ";
        if (p.exact)
            os << (*p.exact)[static_cast<std::size_t>(i)].str();
        else {
            os.precision(12);
            os << p.v[static_cast<std::size_t>(i)];
        }
    }
    os << ")";
    return os.str();
}

int cmd_validate(const Config& cfg) {
    bool ok = true;
    for (const char* which : {"g", "f"}) {
        const MapSystem& sys = *which == 'g' ? cfg.g : cfg.f;
        auto rep = validate_compatible_system(sys);
        std::printf("%s: compatible=%s weakly_contractive=%s d_system=%s\n", which,
                    rep.compatible ? "yes" : "no",
                    rep.weakly_contractive ? "yes" : "no",
                    rep.d_system ? "yes" : "no");
        for (int j : rep.failed_joints)
            std::printf("  joint mismatch at index %d\n", j);
        ok = ok && rep.d_system;
    }
    if (cfg.g.all_mobius_or_affine()) {
        std::vector<std::array<Rat, 4>> coeffs;
        for (int i = 0; i < cfg.g.N(); ++i) {
            MobiusMap m = cfg.g.mobius_at(i);
            coeffs.push_back({m.a, m.b, m.c, m.d});
        }
        auto lf = validate_lf_system(coeffs);
        std::printf("g as LF system: %s\n", lf.valid ? "valid" : "invalid");
        for (std::size_t i = 0; i < lf.per_map.size(); ++i)
            std::printf("  map %zu: well_defined=%s weak=%s strict=%s\n", i,
                        lf.per_map[i].well_defined ? "yes" : "no",
                        lf.per_map[i].weak_contractive ? "yes" : "no",
                        lf.per_map[i].strictly_contractive ? "yes" : "no");
        if (!lf.valid) std::printf("  first violation: %s\n", lf.first_violation.c_str());
        ok = ok && lf.valid;
    }
    return ok ? kExitOk : kExitValidation;
}

int cmd_analyze(const Config& cfg) {
    auto s = analyze_lf_system(cfg.g);
    std::printf("system: %s (N = %d)\n", cfg.name.c_str(), s.N);
    std::printf("alpha = %s\n", ypoint_str(s.Y.alpha).c_str());
    std::printf("beta  = %s\n", ypoint_str(s.Y.beta).c_str());
    std::printf("case  = %s\n", to_string(s.tag).c_str());
    for (int i = 0; i < s.N; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        std::printf("G_%d(y) = %s (y+1) / ((%s y+1)(%s y+1))\n", i,
                    s.G[iu].coef.str().c_str(), s.G[iu].b_hi.str().c_str(),
                    s.G[iu].b_lo.str().c_str());
        std::printf("H_%d(y) = (%s y + %s) / (%s y + 1)\n", i,
                    s.H[iu].a.str().c_str(), s.H[iu].c.str().c_str(),
                    s.H[iu].b.str().c_str());
        std::printf("Fix(H_%d) = %s,  p_%d = %s\n", i,
                    ypoint_str(s.fixH[iu]).c_str(), i, pvec_str(s.pvec[iu]).c_str());
    }
    std::printf("distinct p vectors: %d\n", s.distinct_pvec_count());
    return kExitOk;
}

int cmd_phi(const Config& cfg, const std::string& x_text, double tol, bool inverse) {
    ConjugacyPair pair{cfg.f, cfg.g};
    pair.validate();
    Rat x = Rat::parse(x_text);
    PhiResult r = inverse ? phi_inverse_eval(pair, x, tol) : phi_eval(pair, x, tol);
    const char* label = inverse ? "phi^-1" : "phi";
    if (r.exact)
        std::printf("%s(%s) = %s (exact) = %.17g\n", label, x_text.c_str(),
                    r.exact->str().c_str(), r.value);
    else
        std::printf("%s(%s) = %.17g +- %.3g (depth %lld%s)\n", label, x_text.c_str(),
                    r.value, r.err, static_cast<long long>(r.depth),
                    r.guard_hit ? ", depth guard hit" : "");
    return kExitOk;
}

int cmd_measure(const Config& cfg, const std::string& word_text,
                const std::string& interval_text, double tol) {
    ConjugacyPair pair{cfg.f, cfg.g};
    pair.validate();
    if (!word_text.empty()) {
        Word w = parse_word(word_text);
        Rat mass = mu_mass(pair, w);
        std::printf("mu_phi(cylinder) = %s = %.17g\n", mass.str().c_str(),
                    mass.to_double());
        return kExitOk;
    }
    auto uv = parse_doubles(interval_text);
    if (uv.size() != 2) throw ConfigError("--interval expects u,v");
    auto m = mu_mass_interval(pair, uv[0], uv[1], tol);
    if (m.exact)
        std::printf("mu_phi([%g, %g]) = %s (exact)\n", uv[0], uv[1],
                    m.exact->str().c_str());
    else
        std::printf("mu_phi([%g, %g]) = %.15g +- %.3g\n", uv[0], uv[1], m.value, m.err);
    return kExitOk;
}

int cmd_simulate(const Config& cfg, std::int64_t steps, int chains,
                 std::uint64_t seed, const std::string& q_text) {
    auto s = analyze_lf_system(cfg.g);
    SimConfig sim;
    sim.seed = seed;
    sim.steps = steps;
    sim.chains = chains;
    sim.q = q_text.empty()
                ? std::vector<double>(static_cast<std::size_t>(s.N), 1.0 / s.N)
                : parse_doubles(q_text);
    auto stats = sample_path(s, sim);
    std::fputs(path_stats_csv(stats).c_str(), stdout);
    return kExitOk;
}

int cmd_bound(const Config& cfg, const std::string& r_text, double eps,
              const std::string& region_text, double eps2, double delta) {
    auto s = analyze_lf_system(cfg.g);
    LipProfile prof;
    prof.eps = eps > 0 ? eps : cfg.eps;
    if (!r_text.empty()) {
        prof.r = parse_doubles(r_text);
    } else {
        for (const auto& m : cfg.f.maps)
            prof.r.push_back(lipschitz_and_modulus(m).lip);
    }
    CertificateOptions opt;
    if (!region_text.empty()) opt.region = parse_region(s.N, region_text);
    if (eps2 > 0) opt.eps2_override = eps2;
    if (delta > 0) opt.delta = delta;

    auto cert = make_certificate(prof, s, opt);
    std::printf("theorem: %s  route: %s\n", cert.theorem.c_str(), cert.route.c_str());
    std::printf("r = (");
    for (std::size_t i = 0; i < cert.r.size(); ++i)
        std::printf("%s%.6g", i ? ", " : "", cert.r[i]);
    std::printf("), sum = %.6g, eps = %.6g\n", cert.sum_r, cert.eps);
    if (!cert.applicable) {
        std::printf("verdict: %s\n", cert.verdict().c_str());
        return kExitNumeric;
    }
    std::printf("s = %.12g  (uniform bound via delta: %.12g)\n", cert.s, cert.s_bound);
    std::printf("eps2 = %.12g  delta = %.6g (max %.6g)\n", cert.eps2, cert.delta,
                cert.deltas.final_delta_max);
    std::printf("q~ = (");
    for (std::size_t i = 0; i < cert.q_tilde.size(); ++i)
        std::printf("%s%.9g", i ? ", " : "", cert.q_tilde[i]);
    std::printf(")\n");
    for (const auto& note : cert.notes) std::printf("note: %s\n", note.c_str());
    std::printf("dim_H bound = %.12g  (sharper via exact s: %.12g)\n", cert.bound,
                cert.bound_sharp);
    std::printf("verdict: %s\n", cert.verdict().c_str());
    return cert.certified() ? kExitOk : kExitNumeric;
}

int cmd_examples(const std::string& which, bool verbose) {
    auto results = reproduce_examples(which);
    std::fputs(example_report(results, verbose).c_str(), stdout);
    for (const auto& r : results)
        if (!r.all_pass()) return kExitNumeric;
    return kExitOk;
}

int cmd_plot(const Config& cfg, int samples, double tol, const std::string& out) {
    ConjugacyPair pair{cfg.f, cfg.g};
    pair.validate();
    auto sample = sample_phi(pair, samples, tol);
    write_file(out, phi_sample_svg(sample));
    std::printf("wrote %s (%zu points)\n", out.c_str(), sample.pts.size());
    return kExitOk;
}

int cmd_export(const Config& cfg, int samples, double tol, int precision,
               const std::string& out) {
    ConjugacyPair pair{cfg.f, cfg.g};
    pair.validate();
    auto sample = sample_phi(pair, samples, tol);
    std::string csv = phi_sample_csv(sample, precision);
    if (out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_file(out, csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conjugate-equation solver and singularity certificates"};
    app.require_subcommand(1);

    std::string cfg_path, x_text, word_text, interval_text, q_text, r_text;
    std::string region_text, which = "all", out_path;
    double tol = 1e-9, eps = 0, eps2 = 0, delta = 0;
    std::int64_t steps = 100000;
    int chains = 8, samples = 256, precision = 12;
    std::uint64_t seed = 1;
    bool inverse = false, quiet = false;

    auto* validate = app.add_subcommand("validate", "check LF and compatibility conditions");
    validate->add_option("config", cfg_path)->required();

    auto* analyze = app.add_subcommand("analyze", "Y, G, H, fixed points, p vectors, case tag");
    analyze->add_option("config", cfg_path)->required();

    auto* phi = app.add_subcommand("phi", "evaluate the solution at a point");
    phi->add_option("config", cfg_path)->required();
    phi->add_option("--x", x_text)->required();
    phi->add_option("--tol", tol);
    phi->add_flag("--inverse", inverse);

    auto* measure = app.add_subcommand("measure", "mu_phi of a cylinder word or interval");
    measure->add_option("config", cfg_path)->required();
    measure->add_option("--word", word_text);
    measure->add_option("--interval", interval_text);
    measure->add_option("--tol", tol);

    auto* simulate = app.add_subcommand("simulate", "sample the place-dependent chain");
    simulate->add_option("config", cfg_path)->required();
    simulate->add_option("--steps", steps);
    simulate->add_option("--chains", chains);
    simulate->add_option("--seed", seed);
    simulate->add_option("--q", q_text);

    auto* bound = app.add_subcommand("bound", "dimension certificate for a Lipschitz profile");
    bound->add_option("config", cfg_path)->required();
    bound->add_option("--eps", eps);
    bound->add_option("--r", r_text);
    bound->add_option("--region", region_text);
    bound->add_option("--eps2", eps2);
    bound->add_option("--delta", delta);

    auto* examples = app.add_subcommand("examples", "reproduce the bundled worked examples");
    examples->add_option("--which", which)->check(CLI::IsMember({"1", "2", "3", "all"}));
    examples->add_flag("--quiet", quiet);

    auto* plot = app.add_subcommand("plot", "emit a deterministic SVG of the solution curve");
    plot->add_option("config", cfg_path)->required();
    plot->add_option("--samples", samples);
    plot->add_option("--tol", tol);
    plot->add_option("--out", out_path)->required();

    auto* exportc = app.add_subcommand("export", "emit x,phi,err CSV samples");
    exportc->add_option("config", cfg_path)->required();
    exportc->add_option("--samples", samples);
    exportc->add_option("--tol", tol);
    exportc->add_option("--precision", precision);
    exportc->add_option("--csv", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (examples->parsed()) return cmd_examples(which, !quiet);
        Config cfg = load_config(cfg_path);
        if (validate->parsed()) return cmd_validate(cfg);
        if (analyze->parsed()) return cmd_analyze(cfg);
        if (phi->parsed()) return cmd_phi(cfg, x_text, tol, inverse);
        if (measure->parsed()) return cmd_measure(cfg, word_text, interval_text, tol);
        if (simulate->parsed()) return cmd_simulate(cfg, steps, chains, seed, q_text);
        if (bound->parsed()) return cmd_bound(cfg, r_text, eps, region_text, eps2, delta);
        if (plot->parsed()) return cmd_plot(cfg, samples, tol, out_path);
        if (exportc->parsed()) return cmd_export(cfg, samples, tol, precision, out_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitOk;
}
