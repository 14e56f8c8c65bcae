#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "conjkit/rat.hpp"

namespace conjkit {

using Word = std::vector<int>;

/// x -> (a x + b) / (c x + d), well defined on [0,1] when d > 0 and c + d > 0.
struct MobiusMap {
    Rat a, b, c, d;

    static MobiusMap identity() { return {Rat(1), Rat(0), Rat(0), Rat(1)}; }

    Rat det() const { return a * d - b * c; }
    bool well_defined() const { return d.is_positive() && (c + d).is_positive(); }
    bool increasing() const { return well_defined() && det().is_positive(); }

    Rat eval(const Rat& x) const {
        Rat den = c * x + d;
        if (!den.is_positive())
            throw std::domain_error("MobiusMap: denominator not positive");
        return (a * x + b) / den;
    }
    double eval(double x) const {
        return (a.to_double() * x + b.to_double()) /
               (c.to_double() * x + d.to_double());
    }

    // Unique preimage in [0,1]: x = (d y - b) / (-c y + a).
    Rat inverse_eval(const Rat& y) const {
        Rat den = a - c * y;
        if (den.is_zero()) throw std::domain_error("MobiusMap: inverse pole");
        return (d * y - b) / den;
    }

    /// Scale to coprime integer coefficients with d > 0.
    MobiusMap normalized() const {
        mpz_class l = lcm(lcm(a.den(), b.den()), lcm(c.den(), d.den()));
        Rat s{l, mpz_class(1)};
        MobiusMap m{a * s, b * s, c * s, d * s};
        mpz_class g = gcd(gcd(num_abs(m.a), num_abs(m.b)),
                          gcd(num_abs(m.c), num_abs(m.d)));
        if (g > 1) {
            Rat inv{mpz_class(1), g};
            m = {m.a * inv, m.b * inv, m.c * inv, m.d * inv};
        }
        if (m.d.is_negative() || (m.d.is_zero() && m.c.is_negative()))
            m = {-m.a, -m.b, -m.c, -m.d};
        return m;
    }

    /// Scale so that d = 1 (requires d > 0).
    MobiusMap with_unit_d() const {
        if (!d.is_positive()) throw std::domain_error("MobiusMap: d <= 0");
        return {a / d, b / d, c / d, Rat(1)};
    }

    /// sup over [0,1] of |h'| = det / min(d, c+d)^2, exact.
    Rat lipschitz() const {
        Rat m = std::min(d, c + d);
        return det() / (m * m);
    }

private:
    static mpz_class num_abs(const Rat& r) { return ::abs(r.num()); }
    static mpz_class gcd(const mpz_class& x, const mpz_class& y) {
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
        return g;
    }
    static mpz_class lcm(const mpz_class& x, const mpz_class& y) {
        mpz_class l;
        mpz_lcm(l.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
        return l;
    }
};

/// Matrix product of the coefficient matrices: compose(m1, m2)(x) = m1(m2(x)).
inline MobiusMap mobius_compose(const MobiusMap& m1, const MobiusMap& m2) {
    MobiusMap r{m1.a * m2.a + m1.b * m2.c, m1.a * m2.b + m1.b * m2.d,
                m1.c * m2.a + m1.d * m2.c, m1.c * m2.b + m1.d * m2.d};
    return r.normalized();
}

struct AffineMap {
    Rat slope, intercept;  // slope > 0

    Rat eval(const Rat& x) const { return slope * x + intercept; }
    double eval(double x) const { return slope.to_double() * x + intercept.to_double(); }
    Rat inverse_eval(const Rat& y) const { return (y - intercept) / slope; }
    MobiusMap as_mobius() const { return {slope, intercept, Rat(0), Rat(1)}; }
};

/**
 * f(x) = b + a x + c x(1-x): the designated non-affine contractive family.
 * Strictly increasing on [0,1] iff a > |c|; Lip(f) = max(|a+c|, |a-c|).
 */
struct QuadMap {
    double a = 0, b = 0, c = 0;

    double eval(double x) const { return b + a * x + c * x * (1.0 - x); }
    double lipschitz() const { return std::max(std::abs(a + c), std::abs(a - c)); }
    bool increasing() const { return a > std::abs(c); }
    // Exact slope of the chord over [u,v]; no cancellation as v-u -> 0.
    double chord_slope(double u, double v) const { return a + c * (1.0 - u - v); }

    double inverse_eval(double y) const {
        // monotone on [0,1]; bisection then Newton polish
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 80; ++i) {
            double mid = 0.5 * (lo + hi);
            (eval(mid) < y ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

using IntervalMap = std::variant<MobiusMap, AffineMap, QuadMap>;

inline bool is_exact(const IntervalMap& m) {
    return !std::holds_alternative<QuadMap>(m);
}

inline Rat map_eval_exact(const IntervalMap& m, const Rat& x) {
    if (x.is_negative() || x > Rat(1))
        throw std::domain_error("map_eval: x outside [0,1]");
    if (auto* mo = std::get_if<MobiusMap>(&m)) return mo->eval(x);
    if (auto* af = std::get_if<AffineMap>(&m)) return af->eval(x);
    throw std::domain_error("map_eval: exact evaluation of a float map");
}

inline double map_eval(const IntervalMap& m, double x) {
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
        throw std::domain_error("map_eval: x outside [0,1]");
    x = std::clamp(x, 0.0, 1.0);
    return std::visit([&](const auto& mm) { return mm.eval(x); }, m);
}

inline double map_inverse_eval(const IntervalMap& m, double y) {
    if (auto* mo = std::get_if<MobiusMap>(&m)) {
        double a = mo->a.to_double(), b = mo->b.to_double();
        double c = mo->c.to_double(), d = mo->d.to_double();
        return (d * y - b) / (a - c * y);
    }
    if (auto* af = std::get_if<AffineMap>(&m))
        return (y - af->intercept.to_double()) / af->slope.to_double();
    return std::get<QuadMap>(m).inverse_eval(y);
}

inline Rat map_inverse_eval_exact(const IntervalMap& m, const Rat& y) {
    if (auto* mo = std::get_if<MobiusMap>(&m)) return mo->inverse_eval(y);
    if (auto* af = std::get_if<AffineMap>(&m)) return af->inverse_eval(y);
    throw std::domain_error("map_inverse_eval: exact inverse of a float map");
}

inline double map_lipschitz(const IntervalMap& m) {
    if (auto* mo = std::get_if<MobiusMap>(&m)) return mo->lipschitz().to_double();
    if (auto* af = std::get_if<AffineMap>(&m)) return af->slope.to_double();
    return std::get<QuadMap>(m).lipschitz();
}

/**
 * Modulus-of-continuity upper bound for a single map:
 *   c > 0:  t -> t / (c t + 1)
 *   c < 0:  t -> (1+c) t / (-c t + 1 + c)      (coefficients of the d=1 form)
 *   c = 0:  t -> a t
 * For a QuadMap the Lipschitz envelope t -> Lip * t is returned.
 */
struct ModulusBound {
    enum class Kind { mobius_pos, mobius_neg, linear } kind;
    double p0 = 0;  // c for the mobius kinds, slope for linear

    double operator()(double t) const {
        switch (kind) {
            case Kind::mobius_pos: return t / (p0 * t + 1.0);
            case Kind::mobius_neg: return (1.0 + p0) * t / (-p0 * t + 1.0 + p0);
            case Kind::linear: return p0 * t;
        }
        return t;
    }
};

struct LipModulus {
    double lip;
    std::optional<Rat> lip_exact;
    ModulusBound modulus;
};

inline LipModulus lipschitz_and_modulus(const IntervalMap& m) {
    if (auto* mo = std::get_if<MobiusMap>(&m)) {
        MobiusMap u = mo->with_unit_d();
        double c = u.c.to_double();
        ModulusBound mb;
        if (u.c.is_positive())
            mb = {ModulusBound::Kind::mobius_pos, c};
        else if (u.c.is_negative())
            mb = {ModulusBound::Kind::mobius_neg, c};
        else
            mb = {ModulusBound::Kind::linear, u.a.to_double()};
        return {mo->lipschitz().to_double(), mo->lipschitz(), mb};
    }
    if (auto* af = std::get_if<AffineMap>(&m))
        return {af->slope.to_double(), af->slope,
                {ModulusBound::Kind::linear, af->slope.to_double()}};
    const auto& q = std::get<QuadMap>(m);
    return {q.lipschitz(), std::nullopt,
            {ModulusBound::Kind::linear, q.lipschitz()}};
}

enum class SystemKind { lf, affine, mixed };

/// Ordered family of N >= 2 strictly increasing interval maps whose images
/// chain endpoint-to-endpoint from 0 to 1.
struct MapSystem {
    std::vector<IntervalMap> maps;

    int N() const { return static_cast<int>(maps.size()); }
    const IntervalMap& at(int i) const { return maps.at(static_cast<std::size_t>(i)); }

    bool exact() const {
        return std::all_of(maps.begin(), maps.end(),
                           [](const IntervalMap& m) { return is_exact(m); });
    }
    bool all_mobius_or_affine() const { return exact(); }
    bool all_mobius() const {
        return std::all_of(maps.begin(), maps.end(), [](const IntervalMap& m) {
            return std::holds_alternative<MobiusMap>(m);
        });
    }
    SystemKind kind() const {
        bool any_quad = false, all_affine = true;
        for (const auto& m : maps) {
            if (std::holds_alternative<QuadMap>(m)) any_quad = true;
            if (!std::holds_alternative<AffineMap>(m)) all_affine = false;
        }
        if (any_quad) return SystemKind::mixed;
        return all_affine ? SystemKind::affine : SystemKind::lf;
    }

    MobiusMap mobius_at(int i) const {
        const IntervalMap& m = at(i);
        if (auto* mo = std::get_if<MobiusMap>(&m)) return *mo;
        if (auto* af = std::get_if<AffineMap>(&m)) return af->as_mobius();
        throw std::domain_error("MapSystem: not a Mobius/affine map");
    }
};

struct LfMapFlags {
    bool well_defined = false;
    bool weak_contractive = false;    // condition (2)
    bool strictly_contractive = false;  // condition (2')
};

struct LfReport {
    std::vector<LfMapFlags> per_map;
    bool compatible = false;  // condition (3)
    bool valid = false;       // everything holds
    std::string first_violation;  // empty when valid
};

/// Exact check of Definition-style conditions (1), (2)/(2'), (3) on raw
/// coefficient tuples (a, b, c, d).
inline LfReport validate_lf_system(const std::vector<std::array<Rat, 4>>& coeffs) {
    LfReport rep;
    const std::size_t n = coeffs.size();
    if (n < 2) {
        rep.first_violation = "need at least two maps";
        return rep;
    }
    rep.per_map.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [a, b, c, d] = coeffs[i];
        LfMapFlags& f = rep.per_map[i];
        f.well_defined = d.is_positive() && (c + d).is_positive();
        if (!f.well_defined) {
            if (rep.first_violation.empty())
                rep.first_violation =
                    "(1) well-definedness fails at map " + std::to_string(i);
            continue;
        }
        Rat det = a * d - b * c;
        Rat m = std::min(d * d, (c + d) * (c + d));
        f.weak_contractive = det.is_positive() && det <= m;
        f.strictly_contractive = det.is_positive() && det < m;
        if (!f.weak_contractive && rep.first_violation.empty())
            rep.first_violation = "(2) weak contraction fails at map " + std::to_string(i);
    }

    bool chain_ok = true;
    if (!coeffs.front()[1].is_zero()) {  // b_0 / d_0 = 0
        chain_ok = false;
        if (rep.first_violation.empty()) rep.first_violation = "(3) b_0 != 0";
    }
    for (std::size_t i = 0; i < n && chain_ok; ++i) {
        const auto& [a, b, c, d] = coeffs[i];
        if (!rep.per_map[i].well_defined) { chain_ok = false; break; }
        Rat right = (a + b) / (c + d);
        Rat next = (i + 1 < n) ? coeffs[i + 1][1] / coeffs[i + 1][3] : Rat(1);
        if (right != next) {
            chain_ok = false;
            if (rep.first_violation.empty())
                rep.first_violation = "(3) endpoint chain fails after map " + std::to_string(i);
        }
    }
    rep.compatible = chain_ok;
    rep.valid = rep.compatible &&
                std::all_of(rep.per_map.begin(), rep.per_map.end(),
                            [](const LfMapFlags& f) {
                                return f.well_defined && f.weak_contractive;
                            });
    return rep;
}

struct SysReport {
    bool compatible = false;
    bool weakly_contractive = false;
    bool d_system = false;
    std::vector<int> failed_joints;  // i where h_{i-1}(1) != h_i(0); -1/-2 for outer ends
    static constexpr double kFloatTol = 1e-12;
};

/// Endpoint-chain and weak-contraction check; exact for Rat maps, 1e-12 for
/// QuadMap joints.
inline SysReport validate_compatible_system(const MapSystem& sys) {
    SysReport rep;
    const int n = sys.N();
    if (n < 2) return rep;

    auto end_ok = [&](int i, int side, double target,
                      const std::optional<Rat>& target_exact) {
        const IntervalMap& m = sys.at(i);
        Rat x(side);
        if (is_exact(m) && target_exact) return map_eval_exact(m, x) == *target_exact;
        double v = map_eval(m, static_cast<double>(side));
        return std::abs(v - target) <= SysReport::kFloatTol;
    };

    bool all = true;
    if (!end_ok(0, 0, 0.0, Rat(0))) { rep.failed_joints.push_back(-1); all = false; }
    for (int i = 1; i < n; ++i) {
        const IntervalMap& l = sys.at(i - 1);
        const IntervalMap& r = sys.at(i);
        bool ok;
        if (is_exact(l) && is_exact(r))
            ok = map_eval_exact(l, Rat(1)) == map_eval_exact(r, Rat(0));
        else
            ok = std::abs(map_eval(l, 1.0) - map_eval(r, 0.0)) <= SysReport::kFloatTol;
        if (!ok) { rep.failed_joints.push_back(i); all = false; }
    }
    if (!end_ok(n - 1, 1, 1.0, Rat(1))) { rep.failed_joints.push_back(-2); all = false; }
    rep.compatible = all;

    rep.weakly_contractive = true;
    for (const auto& m : sys.maps) {
        if (auto* mo = std::get_if<MobiusMap>(&m)) {
            Rat det = mo->det();
            Rat mm = std::min(mo->d * mo->d, (mo->c + mo->d) * (mo->c + mo->d));
            if (!mo->well_defined() || !det.is_positive() || det > mm)
                rep.weakly_contractive = false;
        } else if (auto* af = std::get_if<AffineMap>(&m)) {
            if (!af->slope.is_positive() || af->slope >= Rat(1))
                rep.weakly_contractive = false;
        } else {
            const auto& q = std::get<QuadMap>(m);
            if (!q.increasing() || q.lipschitz() >= 1.0)
                rep.weakly_contractive = false;
        }
    }
    rep.d_system = rep.compatible && rep.weakly_contractive;
    return rep;
}

/// [h_{w1} o ... o h_{wn}(0), h_{w1} o ... o h_{wn}(1)], exact.
inline RatInterval cylinder(const MapSystem& sys, const Word& word) {
    if (word.empty()) throw std::invalid_argument("cylinder: empty word");
    if (!sys.exact())
        throw std::domain_error("cylinder: exact form needs Rat maps");
    Rat lo(0), hi(1);
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        if (*it < 0 || *it >= sys.N())
            throw std::out_of_range("cylinder: symbol out of range");
        lo = map_eval_exact(sys.at(*it), lo);
        hi = map_eval_exact(sys.at(*it), hi);
    }
    return {lo, hi};
}

struct FloatInterval {
    double lo, hi, err;
};

inline FloatInterval cylinder_float(const MapSystem& sys, const Word& word) {
    if (word.empty()) throw std::invalid_argument("cylinder: empty word");
    double lo = 0.0, hi = 1.0;
    double lip_prod = 1.0;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        if (*it < 0 || *it >= sys.N())
            throw std::out_of_range("cylinder: symbol out of range");
        lo = map_eval(sys.at(*it), lo);
        hi = map_eval(sys.at(*it), hi);
        lip_prod *= map_lipschitz(sys.at(*it));
    }
    double err = static_cast<double>(word.size()) * 8.0 *
                 std::numeric_limits<double>::epsilon() * std::max(1.0, lip_prod);
    return {lo, hi, err};
}

struct GrowthReport {
    int depth = 0;
    double c_lower = 0;  // fitted: min over depths of (min width)^(1/n)
    double C_upper = 0;  // fitted: max over depths of n * (max width)
    Rat c_lower_base;    // min width at the fitting depth
    int c_lower_depth = 1;
    Rat C_upper_exact;
    std::vector<Rat> min_width;  // index n-1 -> exact min width at depth n
    std::vector<Rat> max_width;
    bool lower_holds = false;  // min_width[n] >= c_lower^n for all n, exact
    bool upper_holds = false;  // max_width[n] <= C_upper/n for all n, exact
};

namespace detail {

// State of a composed Mobius word, scale-normalized to d = 1:
//   t = (c + d)/d,  D = det/d^2,  current cylinder width = D / t.
// For any continuation rho, width(sigma rho) is decreasing in t and
// increasing in D (coefficients of the denominator forms are nonnegative
// for maps of a compatible increasing family), so Pareto pruning on
// (t, D) is exact for extremal-width tracking.
struct WidthState {
    Rat t, D;
    Rat width() const { return D / t; }
};

inline std::vector<WidthState> step_states(const std::vector<WidthState>& in,
                                           const std::vector<MobiusMap>& maps) {
    std::vector<WidthState> out;
    out.reserve(in.size() * maps.size());
    for (const auto& s : in) {
        Rat c0 = s.t - Rat(1);  // representative (c, d) = (t - 1, 1)
        for (const auto& m : maps) {
            Rat c1 = c0 * m.a + m.c;
            Rat d1 = c0 * m.b + m.d;
            Rat t1 = (c1 + d1) / d1;
            Rat D1 = s.D * m.det() / (d1 * d1);
            out.push_back({t1, D1});
        }
    }
    return out;
}

// keep the Pareto set optimal for "small width potential": large t, small D
inline void prune_min(std::vector<WidthState>& v) {
    std::sort(v.begin(), v.end(), [](const WidthState& x, const WidthState& y) {
        if (x.t != y.t) return x.t > y.t;
        return x.D < y.D;
    });
    std::vector<WidthState> keep;
    for (auto& s : v) {
        if (keep.empty() || s.D < keep.back().D) keep.push_back(std::move(s));
    }
    v = std::move(keep);
}

// Pareto set for "large width potential": small t, large D
inline void prune_max(std::vector<WidthState>& v) {
    std::sort(v.begin(), v.end(), [](const WidthState& x, const WidthState& y) {
        if (x.t != y.t) return x.t < y.t;
        return x.D > y.D;
    });
    std::vector<WidthState> keep;
    for (auto& s : v) {
        if (keep.empty() || s.D > keep.back().D) keep.push_back(std::move(s));
    }
    v = std::move(keep);
}

}  // namespace detail

inline constexpr int kGrowthDepthCap = 40;

/**
 * Exact per-depth extremal cylinder widths for an LF system and the fitted
 * constants for the c^n lower and C/n upper width laws. The frontier of
 * candidate words is pruned by exact Pareto dominance, so the reported
 * extremes equal the true min/max over all N^n words at each depth.
 */
inline GrowthReport growth_bounds_check(const MapSystem& sys, int max_depth,
                                        int depth_cap = kGrowthDepthCap) {
    if (!sys.all_mobius_or_affine())
        throw std::domain_error("growth_bounds_check: LF systems only");
    if (max_depth < 1 || max_depth > depth_cap)
        throw std::out_of_range("growth_bounds_check: depth cap exceeded");

    std::vector<MobiusMap> maps;
    maps.reserve(static_cast<std::size_t>(sys.N()));
    for (int i = 0; i < sys.N(); ++i) maps.push_back(sys.mobius_at(i));

    GrowthReport rep;
    rep.depth = max_depth;

    std::vector<detail::WidthState> fmin{{Rat(1), Rat(1)}};
    std::vector<detail::WidthState> fmax{{Rat(1), Rat(1)}};
    for (int n = 1; n <= max_depth; ++n) {
        fmin = detail::step_states(fmin, maps);
        detail::prune_min(fmin);
        fmax = detail::step_states(fmax, maps);
        detail::prune_max(fmax);

        Rat mn = fmin.front().width(), mx = fmax.front().width();
        for (const auto& s : fmin) mn = std::min(mn, s.width());
        for (const auto& s : fmax) mx = std::max(mx, s.width());
        rep.min_width.push_back(mn);
        rep.max_width.push_back(mx);
    }

    // c_lower = (min width at n*)^(1/n*) minimized over depths; the
    // comparison x^(1/n) <= y^(1/m) <=> x^m <= y^n stays exact.
    int best = 1;
    for (int n = 2; n <= max_depth; ++n) {
        const Rat& x = rep.min_width[static_cast<std::size_t>(n - 1)];
        const Rat& y = rep.min_width[static_cast<std::size_t>(best - 1)];
        if (x.pow(static_cast<unsigned long>(best)) <
            y.pow(static_cast<unsigned long>(n)))
            best = n;
    }
    rep.c_lower_depth = best;
    rep.c_lower_base = rep.min_width[static_cast<std::size_t>(best - 1)];
    rep.c_lower = std::exp(std::log(rep.c_lower_base.to_double()) / best);

    Rat cup = rep.max_width[0];
    for (int n = 1; n <= max_depth; ++n)
        cup = std::max(cup, Rat(n) * rep.max_width[static_cast<std::size_t>(n - 1)]);
    rep.C_upper_exact = cup;
    rep.C_upper = cup.to_double();

    rep.lower_holds = true;
    rep.upper_holds = true;
    for (int n = 1; n <= max_depth; ++n) {
        const Rat& mn = rep.min_width[static_cast<std::size_t>(n - 1)];
        const Rat& mx = rep.max_width[static_cast<std::size_t>(n - 1)];
        // min_n >= base^(n/best)  <=>  min_n^best >= base^n
        if (mn.pow(static_cast<unsigned long>(best)) <
            rep.c_lower_base.pow(static_cast<unsigned long>(n)))
            rep.lower_holds = false;
        if (Rat(n) * mx > rep.C_upper_exact) rep.upper_holds = false;
    }
    return rep;
}

}  // namespace conjkit
