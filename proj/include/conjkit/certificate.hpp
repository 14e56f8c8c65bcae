#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "conjkit/entropy.hpp"
#include "conjkit/spectral.hpp"

namespace conjkit {

/// The unique s >= 1 with sum r_i^s = 1, by bisection. Requires r_i in (0,1)
/// and sum r_i >= 1.
inline double similarity_exponent(const std::vector<double>& r,
                                  double tol = 1e-13) {
    if (r.size() < 2) throw std::invalid_argument("similarity_exponent: need N >= 2");
    double sum1 = 0;
    for (double ri : r) {
        if (!(ri > 0.0 && ri < 1.0))
            throw std::domain_error("similarity_exponent: r_i must lie in (0,1)");
        sum1 += ri;
    }
    if (sum1 < 1.0)
        throw std::domain_error("similarity_exponent: sum r_i < 1, no s >= 1");

    auto f = [&](double s) {
        double acc = 0;
        for (double ri : r) acc += std::pow(ri, s);
        return acc - 1.0;
    };
    double lo = 1.0, hi = 2.0;
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("similarity_exponent: no bracket");
    }
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Largest delta with log N / log(N/(1+delta)) = rhs, i.e. N^(1-1/rhs) - 1.
inline double delta_for_rhs(int N, double rhs) {
    if (rhs <= 1.0) return 0.0;
    return std::pow(static_cast<double>(N), 1.0 - 1.0 / rhs) - 1.0;
}

struct DeltaBounds {
    int N = 0;
    double eps = 0, eps2 = 0;
    double final_delta_max = 0;    // from 1 + eps2 / log(1/eps)
    double delta2_max = 0;         // from 1 + log(1 + eps/2) / log(1/eps)
    double qtilde_interior_max = 0;  // from 1 + log 2 / log(1/eps)

    // valid budgets keep 1 + delta < N, where the s bound is finite and >= 1
    bool in_range(double delta) const {
        return delta > 0.0 && 1.0 + delta < static_cast<double>(N);
    }
    double s_bound(double delta) const {
        return std::log(static_cast<double>(N)) /
               std::log(static_cast<double>(N) / (1.0 + delta));
    }
    bool satisfies_final(double delta) const {
        return in_range(delta) && s_bound(delta) < 1.0 + eps2 / std::log(1.0 / eps);
    }
    bool satisfies_delta2(double delta) const {
        return in_range(delta) &&
               s_bound(delta) <= 1.0 + std::log(1.0 + eps / 2.0) / std::log(1.0 / eps);
    }
    bool satisfies_qtilde_interior(double delta) const {
        return in_range(delta) &&
               s_bound(delta) <= 1.0 + std::log(2.0) / std::log(1.0 / eps);
    }
};

inline DeltaBounds delta_bounds(int N, double eps, double eps2) {
    if (!(eps > 0.0 && eps < 0.5))
        throw std::invalid_argument("delta_bounds: eps must lie in (0, 1/2)");
    if (!(eps2 > 0.0)) throw std::invalid_argument("delta_bounds: eps2 must be positive");
    DeltaBounds d;
    d.N = N;
    d.eps = eps;
    d.eps2 = eps2;
    double L = std::log(1.0 / eps);
    d.final_delta_max = delta_for_rhs(N, 1.0 + eps2 / L);
    d.delta2_max = delta_for_rhs(N, 1.0 + std::log(1.0 + eps / 2.0) / L);
    d.qtilde_interior_max = delta_for_rhs(N, 1.0 + std::log(2.0) / L);
    return d;
}

struct LipProfile {
    std::vector<double> r;  // Lipschitz upper bounds of the f_i
    double eps = 0.1;       // the box parameter: eps <= r_i <= 1 - eps
};

struct CertificateOptions {
    std::optional<RegionSpec> region;     // switches to the region-direct route
    std::optional<double> eps2_override;  // claimed entropy constant, re-verified
    std::optional<double> delta;          // user delta, re-verified
};

struct Certificate {
    std::string theorem;  // "T1" / "T2"
    std::string route;    // "structural" / "region-direct"
    bool applicable = false;
    std::string failure;  // first failed hypothesis when not applicable
    int N = 0;
    double eps = 0;
    std::vector<double> r;
    double sum_r = 0;
    double s = 0;        // exact similarity exponent of r
    double s_bound = 0;  // log N / log(N/(1+delta))
    double eps2 = 0;
    double delta = 0;
    DeltaBounds deltas;
    std::vector<double> q_tilde;
    double bound = 0;        // s_bound - eps2/log(1/eps); the reported bound
    double bound_sharp = 0;  // s       - eps2/log(1/eps)
    std::vector<std::string> notes;

    bool certified() const { return applicable && bound < 1.0; }
    std::string verdict() const {
        if (!applicable) return "not applicable: " + failure;
        return bound < 1.0 ? "certified < 1" : "not certified";
    }
};

namespace detail {

// inf over q in the region (grid plus local refinement) and y in Y of
// W_i(q, y); i < 0 means the infimum also runs over all symbols.
inline double inf_W_region(const SpectralData& s, int which_i,
                           const RegionSpec& region, int q_steps, int y_grid) {
    auto eval_q = [&](const std::vector<double>& q) {
        if (which_i >= 0) return inf_W(s, which_i, q, y_grid).value;
        double w = std::numeric_limits<double>::infinity();
        for (int i = 0; i < s.N; ++i) w = std::min(w, inf_W(s, i, q, y_grid).value);
        return w;
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> argq;
    simplex_grid(s.N, q_steps, [&](const std::vector<double>& q) {
        if (!region.contains(q, 1e-12)) return;
        double w = eval_q(q);
        if (w < best) {
            best = w;
            argq = q;
        }
    });
    if (argq.empty()) return best;

    double step = 1.0 / q_steps;
    for (int round = 0; round < 30 && step > 1e-9; ++round) {
        bool improved = false;
        for (std::size_t i = 0; i < argq.size(); ++i) {
            for (std::size_t j = 0; j < argq.size(); ++j) {
                if (i == j) continue;
                std::vector<double> q2 = argq;
                q2[i] += step;
                q2[j] -= step;
                if (!region.contains(q2, 1e-12)) continue;
                double w = eval_q(q2);
                if (w < best - 1e-15) {
                    best = w;
                    argq = q2;
                    improved = true;
                }
            }
        }
        if (!improved) step /= 2.0;
    }
    return best;
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// Shared tail: choose/verify delta, assemble bounds.
inline void finish_certificate(Certificate& cert, const CertificateOptions& opt,
                               bool need_delta2, bool need_qtilde_interior) {
    cert.deltas = delta_bounds(cert.N, cert.eps, cert.eps2);
    double cap = cert.deltas.final_delta_max;
    if (need_delta2) cap = std::min(cap, cert.deltas.delta2_max);
    if (need_qtilde_interior) cap = std::min(cap, cert.deltas.qtilde_interior_max);

    double delta;
    if (opt.delta) {
        delta = *opt.delta;
        if (!cert.deltas.satisfies_final(delta)) {
            cert.failure = "delta violates the final-delta inequality";
            return;
        }
        if (need_delta2 && !cert.deltas.satisfies_delta2(delta)) {
            cert.failure = "delta violates the delta-2 inequality";
            return;
        }
        if (need_qtilde_interior && !cert.deltas.satisfies_qtilde_interior(delta)) {
            cert.failure = "delta violates the interior condition for q~";
            return;
        }
    } else {
        // largest workable budget: halfway between the profile's excess and
        // the cap, so the final inequality holds strictly
        double excess = cert.sum_r - 1.0;
        if (excess >= cap) {
            cert.failure = "sum of Lipschitz bounds exceeds every admissible 1+delta";
            return;
        }
        delta = 0.5 * (std::max(excess, 0.0) + cap);
    }
    if (!(cert.sum_r < 1.0 + delta)) {
        cert.failure = "sum r_i < 1 + delta fails";
        return;
    }
    cert.delta = delta;
    cert.s_bound = cert.deltas.s_bound(delta);
    double L = std::log(1.0 / cert.eps);
    cert.bound = cert.s_bound - cert.eps2 / L;
    cert.bound_sharp = cert.s - cert.eps2 / L;
    cert.applicable = true;
    cert.notes.push_back("delta=" + fmt(delta) + " (final-delta max " +
                         fmt(cert.deltas.final_delta_max) + ")");
}

// Hypotheses shared by both theorems; fills s, q~ or sets failure.
inline bool profile_checks(Certificate& cert, const LipProfile& profile) {
    cert.eps = profile.eps;
    cert.r = profile.r;
    if (!(cert.eps > 0.0 && cert.eps < 0.5)) {
        cert.failure = "eps must lie in (0, 1/2)";
        return false;
    }
    if (static_cast<int>(profile.r.size()) != cert.N) {
        cert.failure = "profile dimension mismatch";
        return false;
    }
    cert.sum_r = 0;
    for (double ri : profile.r) {
        if (ri < cert.eps - 1e-12 || ri > 1.0 - cert.eps + 1e-12) {
            cert.failure = "some r_i leaves [eps, 1-eps]";
            return false;
        }
        cert.sum_r += ri;
    }
    if (cert.sum_r < 1.0) {
        cert.failure = "sum r_i < 1: no similarity exponent s >= 1";
        return false;
    }
    cert.s = similarity_exponent(profile.r);
    cert.q_tilde.clear();
    for (double ri : profile.r) cert.q_tilde.push_back(std::pow(ri, cert.s));
    return true;
}

// Region-direct route: verify that the supremum of s_N(G(y)|q) over
// Y x region is at most -eps2 and that q~ lies in the region.
inline bool region_direct_eps2(Certificate& cert, const SpectralData& s,
                               const CertificateOptions& opt) {
    const RegionSpec& region = *opt.region;
    auto sup = sup_entropy_region(s, region);
    double eps2 = opt.eps2_override ? *opt.eps2_override : -sup.sup;
    if (!(eps2 > 0.0)) {
        cert.failure = "region entropy supremum is not negative";
        return false;
    }
    if (sup.sup > -eps2 + 1e-9) {
        cert.failure = "claimed entropy constant is not a valid bound over the region";
        return false;
    }
    if (!region.contains(cert.q_tilde, 1e-9)) {
        cert.failure = "q~ = (r_i^s) leaves the region";
        return false;
    }
    cert.eps2 = eps2;
    cert.route = "region-direct";
    cert.notes.push_back("region sup of s_N = " + fmt(sup.sup) +
                         " <= -eps2 = " + fmt(-eps2));
    return true;
}

}  // namespace detail

/**
 * Distinct-p_i pipeline. Structural route: classify the boundary case, build
 * eps2 = c_I |V| / 2 from the two-step entropy machinery; or, with a region
 * supplied, re-verify the sharper region bound and use it directly.
 */
inline Certificate theorem1_certificate(const LipProfile& profile,
                                        const SpectralData& s,
                                        const CertificateOptions& opt = {}) {
    Certificate cert;
    cert.theorem = "T1";
    cert.N = s.N;
    if (s.distinct_pvec_count() < 2) {
        cert.failure = "all p_i coincide (theorem-2 regime)";
        return cert;
    }
    if (!detail::profile_checks(cert, profile)) return cert;
    if (opt.delta && !(cert.sum_r < 1.0 + *opt.delta)) {
        cert.failure = "sum r_i < 1 + delta fails";
        return cert;
    }

    if (opt.region) {
        if (!detail::region_direct_eps2(cert, s, opt)) return cert;
        detail::finish_certificate(cert, opt, /*need_delta2=*/false,
                                   /*need_qtilde_interior=*/false);
        return cert;
    }

    cert.route = "structural";
    const double half_eps = cert.eps / 2.0;
    bool need_interior = false;
    switch (s.tag) {
        case CaseTag::case1: {
            auto e1 = eps1_tilde(s);
            double ctilde = std::numeric_limits<double>::infinity();
            for (int i = 0; i < s.N; ++i) ctilde = std::min(ctilde, g_range(s, i).inf);
            if (!(e1.certified > 0.0) || !(ctilde > 0.0)) {
                cert.failure = "positive eps1~ / c~ could not be certified";
                return cert;
            }
            auto vg = V_global(s.N, e1.certified, RegionSpec::full(s.N));
            if (!(vg.value < 0.0)) {
                cert.failure = "V(eps1~) not negative";
                return cert;
            }
            cert.eps2 = ctilde * std::abs(vg.value) / 2.0;
            cert.notes.push_back("case 1: eps1~=" + detail::fmt(e1.certified) +
                                 " c~=" + detail::fmt(ctilde) +
                                 " V=" + detail::fmt(vg.value));
            break;
        }
        case CaseTag::case21:
        case CaseTag::case22:
        case CaseTag::case23: {
            need_interior = true;
            std::vector<int> I;
            if (s.tag == CaseTag::case21) I = {0};
            else if (s.tag == CaseTag::case22) I = {s.N - 1};
            else I = {0, s.N - 1};

            RegionSpec interior = RegionSpec::interior_floor(s.N, half_eps);
            double w = std::numeric_limits<double>::infinity();
            int q_steps = s.N == 2 ? 120 : (s.N == 3 ? 30 : 14);
            for (int i : I)
                w = std::min(w, detail::inf_W_region(s, i, interior, q_steps, 192));
            if (!(w > 0.0)) {
                cert.failure = "inf W over the interior region not positive";
                return cert;
            }
            auto cI = inf_sum_G(s, I);
            if (!(cI.value > 0.0)) {
                cert.failure = "c_I not positive";
                return cert;
            }
            auto vg = V_global(s.N, w, interior);
            if (!(vg.value < 0.0)) {
                cert.failure = "V over the interior region not negative";
                return cert;
            }
            cert.eps2 = cI.value * std::abs(vg.value) / 2.0;
            cert.notes.push_back(to_string(s.tag) + ": inf W=" + detail::fmt(w) +
                                 " c_I=" + detail::fmt(cI.value) +
                                 " V=" + detail::fmt(vg.value));
            break;
        }
    }
    cert.notes.push_back("structural eps2 = " + detail::fmt(cert.eps2) +
                         " (numerically certified)");
    detail::finish_certificate(cert, opt, /*need_delta2=*/false, need_interior);
    if (cert.applicable && need_interior) {
        for (double qi : cert.q_tilde)
            if (qi < half_eps - 1e-12) {
                cert.applicable = false;
                cert.failure = "q~ leaves the eps/2 interior";
                return cert;
            }
    }
    return cert;
}

/**
 * Coinciding-p_i pipeline: requires the profile to sit away from p_0 in
 * total distance; eps2 = |V_eps(eps3)| / 2 with eps3 the W-infimum over the
 * separated interior region.
 */
inline Certificate theorem2_certificate(const LipProfile& profile,
                                        const SpectralData& s,
                                        const CertificateOptions& opt = {}) {
    Certificate cert;
    cert.theorem = "T2";
    cert.N = s.N;
    if (s.distinct_pvec_count() != 1) {
        cert.failure = "p_i are not all equal (theorem-1 regime)";
        return cert;
    }
    if (!detail::profile_checks(cert, profile)) return cert;
    if (opt.delta && !(cert.sum_r < 1.0 + *opt.delta)) {
        cert.failure = "sum r_i < 1 + delta fails";
        return cert;
    }

    const ProbVec& p0 = s.pvec[0];
    double sep = 0;
    for (std::size_t i = 0; i < profile.r.size(); ++i)
        sep += std::abs(profile.r[i] - p0.v[i]);
    if (sep < cert.eps - 1e-12) {
        cert.failure = "|r - p_0| < eps (possibly smooth solution)";
        return cert;
    }
    cert.notes.push_back("|r - p_0|_1 = " + detail::fmt(sep));

    if (opt.region) {
        if (!detail::region_direct_eps2(cert, s, opt)) return cert;
        detail::finish_certificate(cert, opt, /*need_delta2=*/false,
                                   /*need_qtilde_interior=*/false);
        return cert;
    }

    cert.route = "structural";
    const double half_eps = cert.eps / 2.0;

    // q~ must stay eps/2-interior and eps/2-separated from p_0; the proof
    // uses eps^(1-s) - 1 <= eps/2, checked here both ways
    double qsep = 0;
    for (std::size_t i = 0; i < cert.q_tilde.size(); ++i)
        qsep += std::abs(cert.q_tilde[i] - p0.v[i]);
    double proof_slack = std::pow(cert.eps, 1.0 - cert.s) - 1.0;
    cert.notes.push_back("|q~ - p_0|_1 = " + detail::fmt(qsep) +
                         ", eps^(1-s)-1 = " + detail::fmt(proof_slack));

    RegionSpec sep_region = RegionSpec::interior_floor(s.N, half_eps);
    sep_region.exclude_l1_ball(p0.v, half_eps);

    int q_steps = s.N == 2 ? 120 : (s.N == 3 ? 30 : 14);
    double eps3 = detail::inf_W_region(s, -1, sep_region, q_steps, 192);
    if (!(eps3 > 0.0)) {
        cert.failure = "eps3 = inf W over the separated region not positive";
        return cert;
    }
    auto vg = V_global(s.N, eps3, sep_region);
    if (!(vg.value < 0.0)) {
        cert.failure = "V_eps(eps3) not negative";
        return cert;
    }
    cert.eps2 = std::abs(vg.value) / 2.0;
    cert.notes.push_back("eps3=" + detail::fmt(eps3) +
                         " V_eps=" + detail::fmt(vg.value) +
                         " eps2=" + detail::fmt(cert.eps2) + " (numerically certified)");

    detail::finish_certificate(cert, opt, /*need_delta2=*/true,
                               /*need_qtilde_interior=*/false);
    if (!cert.applicable) return cert;

    // verify the membership properties the delta-2 condition promises
    for (double qi : cert.q_tilde) {
        if (qi < half_eps - 1e-12) {
            cert.applicable = false;
            cert.failure = "q~ leaves the eps/2 interior";
            return cert;
        }
    }
    if (qsep < half_eps - 1e-12) {
        cert.applicable = false;
        cert.failure = "|q~ - p_0| < eps/2";
        return cert;
    }
    return cert;
}

/// Dispatch on the number of distinct p_i.
inline Certificate make_certificate(const LipProfile& profile, const SpectralData& s,
                                    const CertificateOptions& opt = {}) {
    return s.distinct_pvec_count() >= 2 ? theorem1_certificate(profile, s, opt)
                                        : theorem2_certificate(profile, s, opt);
}

}  // namespace conjkit
