#pragma once

// Reproduction harness for the three bundled worked examples: recomputes
// every displayed quantity (domains, transition data, fixed points,
// probability vectors, entropy constants, delta checks, final bounds) and
// compares against the expected values.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "conjkit/certificate.hpp"
#include "conjkit/entropy.hpp"
#include "conjkit/spectral.hpp"
#include "conjkit/worked_examples.hpp"

namespace conjkit {

struct ExampleCheck {
    std::string quantity;
    std::string expected, computed;
    bool pass = false;
};

struct ExampleResult {
    int id = 0;
    std::vector<ExampleCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline std::string num_str(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

class CheckList {
public:
    explicit CheckList(ExampleResult& out) : out_(&out) {}

    void rat(const std::string& name, const Rat& expected, const Rat& computed) {
        out_->checks.push_back(
            {name, expected.str(), computed.str(), expected == computed});
    }
    void yval(const std::string& name, const Rat& expected, const YPoint& computed) {
        std::string got = computed.is_pos_inf
                              ? "+inf"
                              : (computed.exact() ? computed.exact_value().str()
                                                  : num_str(computed.to_double()));
        bool ok = !computed.is_pos_inf && computed.exact() &&
                  computed.exact_value() == expected;
        out_->checks.push_back({name, expected.str(), got, ok});
    }
    void pvec(const std::string& name, const std::vector<Rat>& expected,
              const ProbVec& computed) {
        std::string want, got;
        bool ok = computed.exact.has_value() &&
                  computed.exact->size() == expected.size();
        for (std::size_t i = 0; i < expected.size(); ++i) {
            want += (i ? "," : "(") + expected[i].str();
            if (computed.exact && i < computed.exact->size()) {
                got += (i ? "," : "(") + (*computed.exact)[i].str();
                ok = ok && (*computed.exact)[i] == expected[i];
            }
        }
        out_->checks.push_back({name, want + ")", got + ")", ok});
    }
    void num(const std::string& name, double expected, double computed, double tol) {
        out_->checks.push_back({name, num_str(expected) + " (tol " + num_str(tol) + ")",
                                num_str(computed),
                                std::abs(expected - computed) <= tol});
    }
    void le(const std::string& name, double value, double bound) {
        out_->checks.push_back({name, "<= " + num_str(bound), num_str(value),
                                value <= bound + 1e-12});
    }
    void truth(const std::string& name, bool ok, const std::string& detail = "") {
        out_->checks.push_back({name, "true", detail.empty() ? (ok ? "true" : "false")
                                                             : detail, ok});
    }

private:
    ExampleResult* out_;
};

inline Certificate worked_certificate(const worked::ExampleSetup& ex,
                                      const SpectralData& s) {
    LipProfile prof{ex.r, ex.eps};
    CertificateOptions opt;
    opt.region = ex.region;
    opt.eps2_override = ex.eps2_rounded;
    opt.delta = ex.delta;
    return make_certificate(prof, s, opt);
}

inline void delta_tuple_check(CheckList& ck, const worked::ExampleSetup& ex, int N) {
    auto d = delta_bounds(N, ex.eps, ex.eps2_rounded);
    std::ostringstream os;
    os << "(" << N << ", " << ex.eps << ", " << ex.eps2_rounded << ", " << ex.delta
       << ")";
    ck.truth("final-delta holds for " + os.str(), d.satisfies_final(ex.delta));
}

inline void certificate_checks(CheckList& ck, const worked::ExampleSetup& ex,
                               const SpectralData& s, double closed_bound) {
    auto cert = worked_certificate(ex, s);
    ck.truth("certificate applicable", cert.applicable, cert.verdict());
    if (!cert.applicable) return;
    ck.num("certificate bound (uniform in the delta budget)", closed_bound,
           cert.bound, 1e-9);
    ck.truth("verdict certified < 1", cert.certified(),
             cert.verdict() + " at " + num_str(cert.bound));
    ck.le("sharper bound from the exact similarity exponent", cert.bound_sharp,
          cert.bound);
}

inline ExampleResult reproduce_example1() {
    ExampleResult out;
    out.id = 1;
    CheckList ck(out);
    auto ex = worked::setup(1);

    auto rep = validate_lf_system({{Rat(1), Rat(0), Rat(-1), Rat(6)},
                                   {Rat(3), Rat(1), Rat(-1), Rat(5)}});
    ck.truth("LF conditions (1)-(3) hold", rep.valid);
    ck.truth("g_1 weakly but not strictly contractive",
             rep.per_map[1].weak_contractive && !rep.per_map[1].strictly_contractive);

    auto s = analyze_lf_system(ex.g);
    ck.yval("alpha", Rat(-1), s.Y.alpha);
    ck.yval("beta", Rat(0), s.Y.beta);
    ck.rat("G_0(-1/2)", Rat(1, 9), s.G[0].eval_exact(Rat(-1, 2)));
    ck.rat("H_0(-1/2)", Rat(-1, 4), s.H[0].eval_exact(Rat(-1, 2)));
    ck.rat("H_1(-1/2)", Rat(-5, 9), s.H[1].eval_exact(Rat(-1, 2)));
    ck.yval("Fix(H_0)", Rat(-1, 5), s.fixH[0]);
    ck.yval("Fix(H_1)", Rat(-1), s.fixH[1]);
    ck.pvec("p_0 = G(Fix(H_0))", {Rat(1, 6), Rat(5, 6)}, s.pvec[0]);
    ck.pvec("p_1 = G(Fix(H_1))", {Rat(0), Rat(1)}, s.pvec[1]);
    ck.truth("case tag = Case 2.2", s.tag == CaseTag::case22, to_string(s.tag));

    auto r0 = g_range(s, 0);
    auto r1 = g_range(s, 1);
    ck.truth("sup G_0 = 1/5 (exact)", r0.sup_exact && *r0.sup_exact == Rat(1, 5));
    ck.truth("inf G_1 = 4/5 (exact)", r1.inf_exact && *r1.inf_exact == Rat(4, 5));

    // entropy constant: the displayed chain evaluates s_2((1/5,4/5)|(4/5,1/5))
    double closed = -1.2 * std::log(2.0);
    double chain = rel_entropy({0.2, 0.8}, {0.8, 0.2});
    ck.num("entropy constant -(6/5) log 2", closed, chain, 1e-12);
    ck.le("entropy constant below the rounded -0.83", chain, -0.83);
    auto sup = sup_entropy_region(s, ex.region);
    ck.num("grid supremum attains the constant", closed, sup.sup, 1e-6);
    ck.truth("grid maximizer at q_0 = 4/5, y = 0",
             std::abs(sup.arg_q[0] - 0.8) < 1e-6 &&
                 std::abs(sup.arg_t - s.Y.t_hi) < 1e-9);

    delta_tuple_check(ck, ex, 2);
    double bound = std::log(2.0) / std::log(2.0 / 1.2) - 0.83 / std::log(10.0);
    certificate_checks(ck, ex, s, bound);
    return out;
}

inline ExampleResult reproduce_example2() {
    ExampleResult out;
    out.id = 2;
    CheckList ck(out);
    auto ex = worked::setup(2);

    auto s = analyze_lf_system(ex.g);
    ck.yval("alpha", Rat(-1, 6), s.Y.alpha);
    ck.yval("beta", Rat(0), s.Y.beta);
    ck.rat("H_1(-1/12)", Rat(-5, 83), s.H[1].eval_exact(Rat(-1, 12)));
    ck.yval("Fix(H_0)", Rat(-1, 7), s.fixH[0]);
    ck.yval("Fix(H_1)", Rat(0), s.fixH[1]);
    ck.yval("Fix(H_2)", Rat(-1, 6), s.fixH[2]);
    ck.pvec("p_0", {Rat(1, 8), Rat(245, 344), Rat(7, 43)}, s.pvec[0]);
    ck.pvec("p_1", {Rat(1, 7), Rat(5, 7), Rat(1, 7)}, s.pvec[1]);
    ck.pvec("p_2", {Rat(5, 41), Rat(175, 246), Rat(1, 6)}, s.pvec[2]);

    // premises of the displayed bound chain, exactly
    auto r0 = g_range(s, 0);
    auto r1 = g_range(s, 1);
    auto r2 = g_range(s, 2);
    ck.truth("sup G_0 = 1/7 <= 1/6",
             r0.sup_exact && *r0.sup_exact == Rat(1, 7) && *r0.sup_exact <= Rat(1, 6));
    ck.truth("inf G_1 = 175/246 >= 2/3",
             r1.inf_exact && *r1.inf_exact == Rat(175, 246) &&
                 *r1.inf_exact >= Rat(2, 3));
    ck.truth("sup G_2 = 1/6 (exact)", r2.sup_exact && *r2.sup_exact == Rat(1, 6));
    ck.truth("1/6 below the turning point of x log(1/(2x))",
             1.0 / 6.0 <= 0.5 / std::exp(1.0));
    ck.truth("2/3 above the turning point of x log(1/(8x))",
             2.0 / 3.0 >= 0.125 / std::exp(1.0));

    // the chain value 2 f_{1/2}(1/6) + f_{1/8}(2/3) = log 3 - (8/3) log 2
    double closed = std::log(3.0) - 8.0 / 3.0 * std::log(2.0);
    double chain = 2.0 * entropy_term(1.0 / 6.0, 0.5) + entropy_term(2.0 / 3.0, 0.125);
    ck.num("entropy chain log 3 - (8/3) log 2", closed, chain, 1e-12);
    ck.le("entropy chain below the rounded -0.74", chain, -0.74);
    auto sup = sup_entropy_region(s, ex.region);
    ck.le("grid supremum bounded by the chain value", sup.sup, chain);

    delta_tuple_check(ck, ex, 3);
    double bound = std::log(3.0) / std::log(3.0 / 1.1) - 0.74 / std::log(20.0);
    certificate_checks(ck, ex, s, bound);
    return out;
}

inline ExampleResult reproduce_example3() {
    ExampleResult out;
    out.id = 3;
    CheckList ck(out);
    auto ex = worked::setup(3);

    auto s = analyze_lf_system(ex.g);
    ck.yval("alpha", Rat(0), s.Y.alpha);
    ck.yval("beta", Rat(0), s.Y.beta);
    ck.pvec("G(0)", {Rat(1, 3), Rat(1, 6), Rat(1, 6), Rat(1, 3)}, s.G_at_exact(Rat(0)));
    ck.truth("all p_i coincide", s.distinct_pvec_count() == 1,
             "distinct count = " + std::to_string(s.distinct_pvec_count()));

    double closed = 4.0 / 3.0 * std::log(0.75);
    double direct = rel_entropy({1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3},
                                {0.125, 0.375, 0.375, 0.125});
    ck.num("entropy constant (4/3) log(3/4)", closed, direct, 1e-12);
    ck.le("entropy constant below the rounded -0.38", direct, -0.38);
    auto sup = sup_entropy_region(s, ex.region);
    ck.num("region supremum attains the constant", closed, sup.sup, 1e-9);
    ck.truth("region maximizer is (1/8, 3/8, 3/8, 1/8)",
             std::abs(sup.arg_q[0] - 0.125) < 1e-9 &&
                 std::abs(sup.arg_q[1] - 0.375) < 1e-9);

    // theorem-2 side condition for the bundled profile
    double sep = 0;
    std::vector<double> p0{1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3};
    for (std::size_t i = 0; i < ex.r.size(); ++i) sep += std::abs(ex.r[i] - p0[i]);
    ck.truth("|r - p_0| >= eps", sep >= ex.eps, num_str(sep));

    delta_tuple_check(ck, ex, 4);
    double bound = std::log(4.0) / std::log(4.0 / 1.2) - 0.38 / std::log(10.0);
    certificate_checks(ck, ex, s, bound);
    return out;
}

}  // namespace detail

inline std::vector<ExampleResult> reproduce_examples(const std::string& which) {
    std::vector<ExampleResult> out;
    if (which == "1" || which == "all") out.push_back(detail::reproduce_example1());
    if (which == "2" || which == "all") out.push_back(detail::reproduce_example2());
    if (which == "3" || which == "all") out.push_back(detail::reproduce_example3());
    if (out.empty())
        throw std::invalid_argument("reproduce_examples: which must be 1, 2, 3 or all");
    return out;
}

inline std::string example_report(const std::vector<ExampleResult>& results,
                                  bool verbose = true) {
    std::ostringstream os;
    for (const auto& res : results) {
        for (const auto& c : res.checks) {
            if (!verbose && c.pass) continue;
            os << (c.pass ? "  ok   " : "  FAIL ") << "example " << res.id << ": "
               << c.quantity << ": expected " << c.expected << ", computed "
               << c.computed << "\n";
        }
        os << (res.all_pass() ? "PASS" : "FAIL") << " example " << res.id << " ("
           << res.checks.size() << " checks)\n";
    }
    return os.str();
}

}  // namespace conjkit
