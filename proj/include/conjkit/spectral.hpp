#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conjkit/maps.hpp"
#include "conjkit/rat.hpp"

namespace conjkit {

/// Probability vector; carries the exact representation when available.
struct ProbVec {
    std::vector<double> v;
    std::optional<std::vector<Rat>> exact;

    int N() const { return static_cast<int>(v.size()); }
    static ProbVec from_exact(std::vector<Rat> e) {
        ProbVec p;
        p.v.reserve(e.size());
        for (const Rat& r : e) p.v.push_back(r.to_double());
        p.exact = std::move(e);
        return p;
    }
    static ProbVec from_doubles(std::vector<double> d) { return {std::move(d), std::nullopt}; }

    double l1_dist(const ProbVec& o) const {
        double s = 0;
        for (std::size_t i = 0; i < v.size(); ++i) s += std::abs(v[i] - o.v[i]);
        return s;
    }
    bool in_interior(double eps) const {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x >= eps; });
    }
};

/// p + q*sqrt(delta) with rational p, q and delta >= 0; exact whenever the
/// radical collapses. Used for the alpha/beta candidates and Fix(H_i).
struct AlgValue {
    Rat p, q, delta;  // value = p + q*sqrt(delta)
    std::optional<Rat> exact;

    static AlgValue rational(Rat r) { return {r, Rat(0), Rat(0), r}; }
    static AlgValue radical(Rat p, Rat q, Rat delta) {
        AlgValue v{p, q, delta, std::nullopt};
        if (q.is_zero())
            v.exact = v.p;
        else if (auto s = exact_sqrt(delta))
            v.exact = p + q * (*s);
        return v;
    }

    double to_double() const {
        if (exact) return exact->to_double();
        return p.to_double() + q.to_double() * std::sqrt(delta.to_double());
    }

    RatInterval enclosure(const Rat& tol) const {
        if (exact) return {*exact, *exact};
        RatInterval s = sqrt_enclosure(delta, tol);
        if (q.is_negative()) return {p + q * s.hi, p + q * s.lo};
        return {p + q * s.lo, p + q * s.hi};
    }
};

namespace detail {

inline int rat_cmp(const Rat& a, const Rat& b) {
    return a < b ? -1 : (a == b ? 0 : 1);
}

// Exact three-way comparison of two quadratic algebraic values. Enclosures
// are refined until they separate; possible equality is decided by squaring
// the radical identity, after which |x - y| is either 0 or 2|p1 - p2|.
inline int alg_compare(const AlgValue& x, const AlgValue& y) {
    if (x.exact && y.exact) return rat_cmp(*x.exact, *y.exact);
    if (!x.exact && !y.exact && x.delta == y.delta && x.q == y.q)
        return rat_cmp(x.p, y.p);  // identical radical parts cancel

    Rat gap(0);  // positive once equality is ruled out below that scale
    if (!x.exact && !y.exact) {
        Rat dp = x.p - y.p;
        if (auto sp = exact_sqrt(x.delta * y.delta)) {
            Rat lhs = x.q * x.q * x.delta + y.q * y.q * y.delta - dp * dp;
            if (lhs == Rat(2) * x.q * y.q * (*sp)) {
                if (dp.is_zero()) return 0;
                gap = dp.abs();  // x - y is 0 or +-2 dp; separate at |dp|
            }
        }
    }

    Rat tol(1, 1000000);
    for (int round = 0; round < 40; ++round) {
        RatInterval ex = x.enclosure(tol), ey = y.enclosure(tol);
        if (ex.hi < ey.lo) return -1;
        if (ey.hi < ex.lo) return 1;
        if (gap.is_positive() && ex.width() + ey.width() < gap) return 0;
        tol = tol * Rat(1, 1000000000);
    }
    throw std::runtime_error("alg_compare: cannot separate candidates");
}

}  // namespace detail

/// A point of Y = [alpha, beta]; beta may be +infinity.
struct YPoint {
    bool is_pos_inf = false;
    AlgValue value;  // meaningful when finite

    static YPoint infinity() { return {true, AlgValue::rational(Rat(0))}; }
    static YPoint of(AlgValue v) { return {false, std::move(v)}; }
    bool exact() const { return !is_pos_inf && value.exact.has_value(); }
    const Rat& exact_value() const { return *value.exact; }
    double to_double() const {
        return is_pos_inf ? std::numeric_limits<double>::infinity()
                          : value.to_double();
    }
};

// Chart t = (y+1)/(y+2): maps [-1, +inf] onto [0, 1]; pole at y = -2 stays
// outside Y in every case.
inline double chart_of_y(double y) {
    if (std::isinf(y)) return 1.0;
    return (y + 1.0) / (y + 2.0);
}
inline double y_of_chart(double t) {
    if (t >= 1.0) return std::numeric_limits<double>::infinity();
    return (2.0 * t - 1.0) / (1.0 - t);
}
inline Rat chart_of_y_exact(const Rat& y) { return (y + Rat(1)) / (y + Rat(2)); }
inline Rat y_of_chart_exact(const Rat& t) {
    return (Rat(2) * t - Rat(1)) / (Rat(1) - t);
}

struct YDomain {
    YPoint alpha;  // finite always
    YPoint beta;   // possibly +inf
    double t_lo = 0, t_hi = 0;  // chart endpoints

    bool degenerate() const { return t_hi <= t_lo + 1e-15; }
};

enum class CaseTag { case1, case21, case22, case23 };

inline std::string to_string(CaseTag t) {
    switch (t) {
        case CaseTag::case1: return "Case 1";
        case CaseTag::case21: return "Case 2.1";
        case CaseTag::case22: return "Case 2.2";
        case CaseTag::case23: return "Case 2.3";
    }
    return "?";
}

/// Transition weight G_i(y) = coef (y+1) / ((b_hi y + 1)(b_lo y + 1)) in the
/// factored form; the removable zeros at y = -1 (i = N-1) and y = +inf
/// (i = 0) are cancelled analytically.
struct GWeight {
    Rat coef, b_lo, b_hi;  // b_lo = b_i, b_hi = b_{i+1}; b_hi == 1 marks i = N-1

    Rat eval_exact(const Rat& y) const {
        if (b_hi == Rat(1)) return coef / (b_lo * y + Rat(1));
        Rat den = (b_hi * y + Rat(1)) * (b_lo * y + Rat(1));
        return coef * (y + Rat(1)) / den;
    }
    // in chart coordinates, including t = 1 (y = +inf)
    double eval_chart(double t) const {
        double K = coef.to_double();
        double bl = b_lo.to_double(), bh = b_hi.to_double();
        auto L = [&](double b) { return (2.0 * b - 1.0) * t + (1.0 - b); };
        if (b_lo.is_zero()) return K * t / L(bh);           // i = 0
        if (b_hi == Rat(1)) return K * (1.0 - t) / L(bl);   // i = N-1
        return K * t * (1.0 - t) / (L(bh) * L(bl));
    }
};

/// H_i(y) = (a y + c)/(b y + 1).
struct HMap {
    Rat a, c, b;

    Rat eval_exact(const Rat& y) const {
        Rat den = b * y + Rat(1);
        if (den.is_zero()) throw std::domain_error("HMap: pole");
        return (a * y + c) / den;
    }
    // chart-conjugated projective action; exact 2x2 matrix
    std::array<Rat, 4> chart_matrix() const {
        // C = [[1,1],[1,2]], C^{-1} ~ [[2,-1],[-1,1]], M = C * H * C^{-1}
        // H = [[a, c], [b, 1]]
        Rat m00 = a + b, m01 = c + Rat(1);
        Rat m10 = a + Rat(2) * b, m11 = c + Rat(2);
        // (C*H) then * C^{-1}
        return {Rat(2) * m00 - m01, -m00 + m01, Rat(2) * m10 - m11, -m10 + m11};
    }
    double eval_chart(double t) const {
        auto m = chart_matrix();
        double num = m[0].to_double() * t + m[1].to_double();
        double den = m[2].to_double() * t + m[3].to_double();
        if (den == 0.0) return 1.0;  // projective point at infinity -> chart 1
        double r = num / den;
        return std::clamp(r, 0.0, 1.0);
    }
};

struct SpectralData {
    int N = 0;
    // normalized (d_i = 1) coefficients; b has N+1 entries with b[N] = 1
    std::vector<Rat> a, c;
    std::vector<Rat> b;
    YDomain Y;
    CaseTag tag = CaseTag::case1;
    std::vector<GWeight> G;
    std::vector<HMap> H;
    std::vector<YPoint> fixH;
    std::vector<ProbVec> pvec;
    // chart matrices of H_i as doubles, for simulation
    std::vector<std::array<double, 4>> H_chart;

    ProbVec G_at_exact(const Rat& y) const {
        std::vector<Rat> out;
        out.reserve(G.size());
        for (const auto& g : G) out.push_back(g.eval_exact(y));
        return ProbVec::from_exact(std::move(out));
    }
    ProbVec G_at_chart(double t) const {
        std::vector<double> out;
        out.reserve(G.size());
        for (const auto& g : G) out.push_back(std::clamp(g.eval_chart(t), 0.0, 1.0));
        return ProbVec::from_doubles(std::move(out));
    }
    ProbVec G_at_infinity() const {
        std::vector<Rat> out(static_cast<std::size_t>(N), Rat(0));
        out[0] = Rat(1);
        return ProbVec::from_exact(std::move(out));
    }
    ProbVec G_at(const YPoint& y) const {
        if (y.is_pos_inf) return G_at_infinity();
        if (y.exact()) return G_at_exact(y.exact_value());
        return G_at_chart(chart_of_y(y.to_double()));
    }
    double H_apply_chart(int i, double t) const {
        const auto& m = H_chart[static_cast<std::size_t>(i)];
        double den = m[2] * t + m[3];
        if (den == 0.0) return 1.0;
        return std::clamp((m[0] * t + m[1]) / den, 0.0, 1.0);
    }

    /// indices of the first representative of each distinct p_i
    std::vector<int> distinct_pvec_reps(double tol = 1e-9) const {
        std::vector<int> reps;
        for (int i = 0; i < N; ++i) {
            bool found = false;
            for (int r : reps) {
                const ProbVec& x = pvec[static_cast<std::size_t>(i)];
                const ProbVec& y = pvec[static_cast<std::size_t>(r)];
                if (x.exact && y.exact) {
                    if (*x.exact == *y.exact) { found = true; break; }
                } else if (x.l1_dist(y) <= tol) {
                    found = true;
                    break;
                }
            }
            if (!found) reps.push_back(i);
        }
        return reps;
    }
    int distinct_pvec_count(double tol = 1e-9) const {
        return static_cast<int>(distinct_pvec_reps(tol).size());
    }
};

namespace detail {

struct NormalizedLf {
    std::vector<Rat> a, b, c;  // d = 1
};

inline NormalizedLf normalize_unit_d(const MapSystem& g) {
    NormalizedLf n;
    for (int i = 0; i < g.N(); ++i) {
        MobiusMap m = g.mobius_at(i).with_unit_d();
        n.a.push_back(m.a);
        n.b.push_back(m.b);
        n.c.push_back(m.c);
    }
    return n;
}

// Fixed-point candidate of H_i for i >= 1:
//   b_i y^2 + (1 - a_i) y - c_i = 0, root (a_i - 1 + sqrt(D)) / (2 b_i),
//   D = (1-a_i)^2 + 4 b_i c_i.  b_i = 0 degenerates to c_i / (1 - a_i).
inline AlgValue fix_candidate(const Rat& a, const Rat& b, const Rat& c) {
    if (b.is_zero()) {
        if (a == Rat(1))
            throw std::domain_error("fix_candidate: identity-like map");
        return AlgValue::rational(c / (Rat(1) - a));
    }
    Rat one(1);
    Rat disc = (one - a) * (one - a) + Rat(4) * b * c;
    if (disc.is_negative())
        throw std::domain_error("fix_candidate: negative discriminant");
    return AlgValue::radical((a - one) / (Rat(2) * b), (Rat(2) * b).reciprocal(),
                             disc);
}

}  // namespace detail

/// alpha/beta of Y = [alpha, beta] per the min/max formulas; the c0/(1-a0)
/// candidate is deleted from the alpha set and becomes +inf in the beta set
/// when a0 = 1.
inline YDomain compute_Y(const MapSystem& g) {
    auto n = detail::normalize_unit_d(g);
    const int N = g.N();

    std::vector<AlgValue> alpha_cands{AlgValue::rational(Rat(0))};
    bool beta_inf = false;
    if (n.a[0] == Rat(1)) {
        beta_inf = true;  // c0/(1-a0) := +inf for beta, deleted for alpha
    } else {
        alpha_cands.push_back(AlgValue::rational(n.c[0] / (Rat(1) - n.a[0])));
    }
    for (int i = 1; i < N; ++i) {
        alpha_cands.push_back(detail::fix_candidate(
            n.a[static_cast<std::size_t>(i)], n.b[static_cast<std::size_t>(i)],
            n.c[static_cast<std::size_t>(i)]));
    }

    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < alpha_cands.size(); ++i) {
        if (detail::alg_compare(alpha_cands[i], alpha_cands[imin]) < 0) imin = i;
        if (detail::alg_compare(alpha_cands[i], alpha_cands[imax]) > 0) imax = i;
    }

    YDomain Y;
    Y.alpha = YPoint::of(alpha_cands[imin]);
    Y.beta = beta_inf ? YPoint::infinity() : YPoint::of(alpha_cands[imax]);
    Y.t_lo = chart_of_y(Y.alpha.to_double());
    Y.t_hi = beta_inf ? 1.0 : chart_of_y(Y.beta.to_double());
    return Y;
}

inline CaseTag classify_case(const MapSystem& g) {
    auto n = detail::normalize_unit_d(g);
    const std::size_t last = n.a.size() - 1;
    bool a0_one = n.a[0] == Rat(1);
    bool edge_zero = (n.b[last] + n.c[last]).is_zero();
    if (!a0_one && !edge_zero) return CaseTag::case1;
    if (a0_one && !edge_zero) return CaseTag::case21;
    if (!a0_one && edge_zero) return CaseTag::case22;
    return CaseTag::case23;
}

/// G_i, H_i coefficient records (normalized d = 1 form).
inline SpectralData compute_GH(const MapSystem& g) {
    auto rep = validate_compatible_system(g);
    if (!rep.d_system)
        throw std::domain_error("compute_GH: not a weakly contractive compatible system");
    auto n = detail::normalize_unit_d(g);
    const int N = g.N();

    SpectralData s;
    s.N = N;
    s.a = n.a;
    s.c = n.c;
    s.b = n.b;
    s.b.push_back(Rat(1));  // b_N := 1

    for (int i = 0; i < N; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        s.G.push_back(GWeight{s.b[iu + 1] - s.b[iu], s.b[iu], s.b[iu + 1]});
        s.H.push_back(HMap{s.a[iu], s.c[iu], s.b[iu]});
        auto m = s.H.back().chart_matrix();
        s.H_chart.push_back({m[0].to_double(), m[1].to_double(), m[2].to_double(),
                             m[3].to_double()});
    }
    s.Y = compute_Y(g);
    s.tag = classify_case(g);
    return s;
}

/// Fix(H_i) and the probability vectors p_i = G(Fix(H_i)), with the limit
/// conventions at +inf and -1.
inline void fixed_points_and_p(SpectralData& s) {
    s.fixH.clear();
    s.pvec.clear();
    for (int i = 0; i < s.N; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        if (i == 0) {
            if (s.a[0] == Rat(1)) {
                s.fixH.push_back(YPoint::infinity());
            } else {
                s.fixH.push_back(YPoint::of(
                    AlgValue::rational(s.c[0] / (Rat(1) - s.a[0]))));
            }
        } else {
            s.fixH.push_back(YPoint::of(
                detail::fix_candidate(s.a[iu], s.b[iu], s.c[iu])));
        }
        s.pvec.push_back(s.G_at(s.fixH.back()));
    }
}

/// Full pipeline: validate, Y, G/H, fixed points, case tag.
inline SpectralData analyze_lf_system(const MapSystem& g) {
    SpectralData s = compute_GH(g);
    fixed_points_and_p(s);
    return s;
}

struct GRange {
    double inf = 0, sup = 0;
    std::optional<Rat> inf_exact, sup_exact;
};

/// Range of a single G_i over Y by monotonicity analysis: G_i is unimodal in
/// u = y + 1 with peak at u* = sqrt((1-b_i)(1-b_{i+1}) / (b_i b_{i+1})), so
/// the infimum sits at an endpoint and the supremum at an endpoint or the
/// interior peak.
inline GRange g_range(const SpectralData& s, int i) {
    const auto& gw = s.G[static_cast<std::size_t>(i)];

    struct End {
        double val;
        std::optional<Rat> exact;
    };
    auto eval_at = [&](const YPoint& y) -> End {
        if (y.is_pos_inf) {
            Rat lim = (i == 0) ? Rat(1) : Rat(0);
            return {lim.to_double(), lim};
        }
        if (y.exact()) {
            Rat v = gw.eval_exact(y.exact_value());
            return {v.to_double(), v};
        }
        return {gw.eval_chart(chart_of_y(y.to_double())), std::nullopt};
    };

    End lo = eval_at(s.Y.alpha);
    End hi = eval_at(s.Y.beta);
    End emin = lo.val <= hi.val ? lo : hi;
    End emax = lo.val <= hi.val ? hi : lo;

    GRange r;
    r.inf = emin.val;
    r.inf_exact = emin.exact;
    r.sup = emax.val;
    r.sup_exact = emax.exact;

    // interior peak only for the genuinely two-factor case
    if (!gw.b_lo.is_zero() && gw.b_hi != Rat(1)) {
        Rat num = (Rat(1) - gw.b_lo) * (Rat(1) - gw.b_hi);
        Rat den = gw.b_lo * gw.b_hi;
        double ustar = std::sqrt((num / den).to_double());
        double ystar = ustar - 1.0;
        double a = s.Y.alpha.to_double();
        double bdd = s.Y.beta.is_pos_inf ? std::numeric_limits<double>::infinity()
                                         : s.Y.beta.to_double();
        if (ystar > a && ystar < bdd) {
            double peak = gw.eval_chart(chart_of_y(ystar));
            if (peak > r.sup) {
                r.sup = peak;
                if (auto es = exact_sqrt(num / den)) {
                    Rat ys = *es - Rat(1);
                    r.sup_exact = gw.eval_exact(ys);
                } else {
                    r.sup_exact.reset();
                }
            }
        }
    }
    return r;
}

struct InfSum {
    double value = 0;
    std::optional<Rat> exact;
};

/// c_I = inf over Y of sum_{i in I} G_i, by chart grid with local refinement
/// plus exact endpoint evaluation. Exact value reported when the minimum is
/// attained at a rational endpoint.
inline InfSum inf_sum_G(const SpectralData& s, const std::vector<int>& I,
                        int grid = 2048) {
    if (I.empty()) throw std::invalid_argument("inf_sum_G: empty subset");
    std::vector<bool> in(static_cast<std::size_t>(s.N), false);
    for (int i : I) in.at(static_cast<std::size_t>(i)) = true;
    if (std::all_of(in.begin(), in.end(), [](bool x) { return x; }))
        return {1.0, Rat(1)};  // partition of unity
    if (I.size() == 1) {
        // unimodal: the infimum sits at an endpoint, found exactly
        GRange r = g_range(s, I.front());
        return {r.inf, r.inf_exact};
    }

    auto sum_chart = [&](double t) {
        double acc = 0;
        for (int i = 0; i < s.N; ++i)
            if (in[static_cast<std::size_t>(i)])
                acc += s.G[static_cast<std::size_t>(i)].eval_chart(t);
        return acc;
    };
    auto sum_exact = [&](const Rat& y) {
        Rat acc(0);
        for (int i = 0; i < s.N; ++i)
            if (in[static_cast<std::size_t>(i)])
                acc += s.G[static_cast<std::size_t>(i)].eval_exact(y);
        return acc;
    };

    double t_lo = s.Y.t_lo, t_hi = s.Y.t_hi;
    double best_t = t_lo, best = sum_chart(t_lo);
    for (int k = 0; k <= grid; ++k) {
        double t = t_lo + (t_hi - t_lo) * k / grid;
        double v = sum_chart(t);
        if (v < best) { best = v; best_t = t; }
    }
    double span = (t_hi - t_lo) / grid;
    for (int round = 0; round < 60 && span > 1e-15; ++round) {
        double l = std::max(t_lo, best_t - span), r = std::min(t_hi, best_t + span);
        for (int k = 0; k <= 16; ++k) {
            double t = l + (r - l) * k / 16;
            double v = sum_chart(t);
            if (v < best) { best = v; best_t = t; }
        }
        span /= 4.0;
    }

    InfSum out;
    out.value = best;
    // exact when an exact endpoint attains the refined minimum
    auto consider_end = [&](const YPoint& y) {
        if (y.is_pos_inf) {
            Rat v(0);
            for (int i = 0; i < s.N; ++i)
                if (in[static_cast<std::size_t>(i)] && i == 0) v += Rat(1);
            if (v.to_double() <= best + 1e-11) { out.value = v.to_double(); out.exact = v; }
            return;
        }
        if (!y.exact()) return;
        Rat v = sum_exact(y.exact_value());
        if (v.to_double() <= best + 1e-11) { out.value = v.to_double(); out.exact = v; }
    };
    consider_end(s.Y.alpha);
    consider_end(s.Y.beta);
    return out;
}

}  // namespace conjkit
