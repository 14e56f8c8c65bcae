#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "conjkit/maps.hpp"

namespace conjkit {

/// Driving pair of the conjugate equation: g_i(phi(x)) = phi(f_i(x)).
/// g must be an exact (LF/affine) D-system; f may contain float maps.
struct ConjugacyPair {
    MapSystem f, g;

    int N() const { return f.N(); }
    bool exact() const { return f.exact(); }

    void validate() const {
        if (f.N() != g.N() || f.N() < 2)
            throw std::invalid_argument("ConjugacyPair: mismatched systems");
        if (!g.exact())
            throw std::invalid_argument("ConjugacyPair: g must be exact LF/affine");
        auto rf = validate_compatible_system(f);
        auto rg = validate_compatible_system(g);
        if (!rf.d_system || !rg.d_system)
            throw std::invalid_argument("ConjugacyPair: not weakly contractive D-systems");
    }
};

struct Address {
    enum class Flag { unique, left_rep, right_rep };
    std::vector<int> symbols;          // the representation named by flag
    Flag flag = Flag::unique;
    std::vector<int> other;            // the second representation, when boundary
    bool boundary() const { return flag != Flag::unique; }
};

namespace detail {

// Child breakpoints b_j = h_j(0), plus b_N = 1.
inline std::vector<Rat> breakpoints_exact(const MapSystem& sys) {
    std::vector<Rat> b;
    for (int j = 0; j < sys.N(); ++j) b.push_back(map_eval_exact(sys.at(j), Rat(0)));
    b.push_back(Rat(1));
    return b;
}
inline std::vector<double> breakpoints_float(const MapSystem& sys) {
    std::vector<double> b;
    for (int j = 0; j < sys.N(); ++j) b.push_back(map_eval(sys.at(j), 0.0));
    b.push_back(1.0);
    return b;
}

// Tracks the image cylinder [G_w(0), G_w(1)] of the word built so far.
// Exact systems compose incrementally as a Mobius matrix up to a depth cap,
// after which a renormalized double matrix takes over (deep descents happen
// only along weakly contracting runs, where exact arithmetic would grow
// without improving the reported error bound).
class ImageTracker {
public:
    ImageTracker(const MapSystem& sys, std::int64_t exact_cap)
        : sys_(&sys), exact_(sys.exact()), cap_(exact_cap),
          mat_(MobiusMap::identity()), dm_{1.0, 0.0, 0.0, 1.0} {
        if (sys.exact())
            for (int i = 0; i < sys.N(); ++i)
                dmaps_.push_back(float_matrix_of(sys.at(i)));
    }

    void push(int j) {
        ++depth_;
        if (!sys_->exact()) {
            word_.push_back(j);
            return;
        }
        if (exact_ && depth_ > cap_) demote();
        if (exact_) {
            mat_ = mobius_compose(mat_, sys_->mobius_at(j));
        } else {
            mul_right(dm_, dmaps_[static_cast<std::size_t>(j)]);
            renorm(dm_);
        }
    }
    RatInterval interval_exact() const {
        return {mat_.eval(Rat(0)), mat_.eval(Rat(1))};
    }
    std::pair<double, double> interval() const {
        if (exact_) return {mat_.eval(0.0), mat_.eval(1.0)};
        if (sys_->exact())
            return {dm_[1] / dm_[3], (dm_[0] + dm_[1]) / (dm_[2] + dm_[3])};
        double lo = 0.0, hi = 1.0;
        for (auto it = word_.rbegin(); it != word_.rend(); ++it) {
            lo = map_eval(sys_->at(*it), lo);
            hi = map_eval(sys_->at(*it), hi);
        }
        return {lo, hi};
    }
    Rat eval_exact(const Rat& x) const { return mat_.eval(x); }
    bool exact() const { return exact_; }
    std::size_t depth() const { return static_cast<std::size_t>(depth_); }

private:
    static std::array<double, 4> float_matrix_of(const IntervalMap& m) {
        if (auto* mo = std::get_if<MobiusMap>(&m))
            return {mo->a.to_double(), mo->b.to_double(), mo->c.to_double(),
                    mo->d.to_double()};
        if (auto* af = std::get_if<AffineMap>(&m))
            return {af->slope.to_double(), af->intercept.to_double(), 0.0, 1.0};
        return {1.0, 0.0, 0.0, 1.0};  // unused for quad maps
    }
    static void mul_right(std::array<double, 4>& m, const std::array<double, 4>& a) {
        std::array<double, 4> r{m[0] * a[0] + m[1] * a[2], m[0] * a[1] + m[1] * a[3],
                                m[2] * a[0] + m[3] * a[2], m[2] * a[1] + m[3] * a[3]};
        m = r;
    }
    static void renorm(std::array<double, 4>& m) {
        double s = std::max({std::abs(m[0]), std::abs(m[1]), std::abs(m[2]),
                             std::abs(m[3])});
        if (s > 0) for (double& x : m) x /= s;
    }
    void demote() {
        dm_ = {mat_.a.to_double(), mat_.b.to_double(), mat_.c.to_double(),
               mat_.d.to_double()};
        renorm(dm_);
        exact_ = false;
    }

    const MapSystem* sys_;
    bool exact_;
    std::int64_t cap_;
    std::int64_t depth_ = 0;
    MobiusMap mat_;
    std::array<double, 4> dm_;
    std::vector<std::array<double, 4>> dmaps_;
    Word word_;
};

}  // namespace detail

inline constexpr std::int64_t kPhiDepthGuard = 1000000;
// beyond this depth the descent continues in floating point; only runs along
// weakly contracting branches ever get here
inline constexpr std::int64_t kPhiExactDepthCap = 2048;

/**
 * Symbolic address of x under the system's cylinder hierarchy, by greedy
 * descent. Exact systems detect endpoint hits and return both boundary
 * representations (suffix 0s against suffix (N-1)s).
 */
inline Address address_of(const MapSystem& sys, const Rat& x, int depth) {
    if (!sys.exact())
        throw std::domain_error("address_of: exact form needs Rat maps");
    if (x.is_negative() || x > Rat(1))
        throw std::domain_error("address_of: x outside [0,1]");
    const int n = sys.N();
    auto bp = detail::breakpoints_exact(sys);

    Address addr;
    if (x.is_zero() || x == Rat(1)) {
        addr.flag = Address::Flag::unique;
        addr.symbols.assign(static_cast<std::size_t>(depth), x.is_zero() ? 0 : n - 1);
        return addr;
    }

    Rat z = x;
    for (int level = 0; level < depth; ++level) {
        int j = n - 1;
        for (int k = 1; k < n; ++k) {
            if (z < bp[static_cast<std::size_t>(k)]) { j = k - 1; break; }
            if (z == bp[static_cast<std::size_t>(k)]) {
                // x = f_{w,k}(0) = f_{w,k-1}(1): two representations
                addr.flag = Address::Flag::left_rep;
                addr.other = addr.symbols;
                addr.symbols.push_back(k);
                addr.other.push_back(k - 1);
                while (static_cast<int>(addr.symbols.size()) < depth) {
                    addr.symbols.push_back(0);
                    addr.other.push_back(n - 1);
                }
                return addr;
            }
        }
        addr.symbols.push_back(j);
        z = map_inverse_eval_exact(sys.at(j), z);
    }
    addr.flag = Address::Flag::unique;
    return addr;
}

inline Address address_of(const MapSystem& sys, double x, int depth) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("address_of: x outside [0,1]");
    auto bp = detail::breakpoints_float(sys);
    const int n = sys.N();
    Address addr;
    double z = x;
    for (int level = 0; level < depth; ++level) {
        int j = n - 1;
        for (int k = 1; k < n; ++k)
            if (z < bp[static_cast<std::size_t>(k)]) { j = k - 1; break; }
        addr.symbols.push_back(j);
        z = std::clamp(map_inverse_eval(sys.at(j), z),
                       0.0, 1.0);
    }
    return addr;
}

struct PhiResult {
    double value = 0;
    double err = 0;
    std::optional<Rat> exact;
    std::int64_t depth = 0;
    bool guard_hit = false;
};

namespace detail {

// Shared descent: peel the domain address of x while tracking the image
// cylinder; stops when the image width reaches tol or an exact endpoint hit
// resolves the value exactly.
inline PhiResult conjugate_eval(const MapSystem& dom, const MapSystem& img,
                                std::optional<Rat> x_exact, double x_float,
                                double tol, std::int64_t guard) {
    const int n = dom.N();
    bool dom_exact = dom.exact() && x_exact.has_value();
    ImageTracker image(img, kPhiExactDepthCap);

    std::vector<Rat> bpx;
    std::vector<double> bpf = breakpoints_float(dom);
    if (dom.exact()) bpx = breakpoints_exact(dom);

    PhiResult out;
    Rat zx = x_exact.value_or(Rat(0));
    double zf = x_float;

    // endpoint fast path
    if ((dom_exact && (zx.is_zero() || zx == Rat(1))) ||
        (!dom_exact && (zf == 0.0 || zf == 1.0))) {
        bool is_zero = dom_exact ? zx.is_zero() : zf == 0.0;
        Rat v(is_zero ? 0 : 1);
        if (image.exact()) {
            out.exact = v;
            out.value = v.to_double();
        } else {
            out.value = is_zero ? 0.0 : 1.0;
        }
        return out;
    }

    for (std::int64_t level = 0; level < guard; ++level) {
        // termination on image width
        if (image.exact()) {
            RatInterval iv = image.interval_exact();
            double w = (iv.hi - iv.lo).to_double();
            if (w <= tol) {
                out.value = 0.5 * (iv.lo + iv.hi).to_double();
                out.err = 0.5 * w;
                out.depth = level;
                return out;
            }
        } else {
            auto [lo, hi] = image.interval();
            if (hi - lo <= tol) {
                out.value = 0.5 * (lo + hi);
                out.err = 0.5 * (hi - lo) + 1e-14;
                out.depth = level;
                return out;
            }
        }

        int j = n - 1;
        if (dom_exact && level >= kPhiExactDepthCap) dom_exact = false;
        if (dom_exact) {
            bool resolved = false;
            for (int k = 1; k < n; ++k) {
                if (zx < bpx[static_cast<std::size_t>(k)]) { j = k - 1; break; }
                if (zx == bpx[static_cast<std::size_t>(k)]) {
                    // exact endpoint: phi(x) = image endpoint of word + k
                    image.push(k);
                    resolved = true;
                    break;
                }
            }
            if (resolved) {
                if (image.exact()) {
                    Rat v = image.eval_exact(Rat(0));
                    out.exact = v;
                    out.value = v.to_double();
                } else {
                    out.value = image.interval().first;
                    out.err = 1e-14;
                }
                out.depth = level + 1;
                return out;
            }
            zx = map_inverse_eval_exact(dom.at(j), zx);
            zf = zx.to_double();
        } else {
            for (int k = 1; k < n; ++k)
                if (zf < bpf[static_cast<std::size_t>(k)]) { j = k - 1; break; }
            zf = std::clamp(map_inverse_eval(dom.at(j), zf), 0.0, 1.0);
        }
        image.push(j);
    }

    out.guard_hit = true;
    out.depth = static_cast<std::int64_t>(image.depth());
    if (image.exact()) {
        RatInterval iv = image.interval_exact();
        out.value = 0.5 * (iv.lo + iv.hi).to_double();
        out.err = 0.5 * (iv.hi - iv.lo).to_double();
    } else {
        auto [lo, hi] = image.interval();
        out.value = 0.5 * (lo + hi);
        out.err = 0.5 * (hi - lo) + 1e-14;
    }
    return out;
}

}  // namespace detail

inline PhiResult phi_eval(const ConjugacyPair& pair, const Rat& x, double tol,
                          std::int64_t guard = kPhiDepthGuard) {
    if (x.is_negative() || x > Rat(1))
        throw std::domain_error("phi_eval: x outside [0,1]");
    if (!pair.f.exact())
        return detail::conjugate_eval(pair.f, pair.g, std::nullopt, x.to_double(),
                                      tol, guard);
    return detail::conjugate_eval(pair.f, pair.g, x, x.to_double(), tol, guard);
}

inline PhiResult phi_eval(const ConjugacyPair& pair, double x, double tol,
                          std::int64_t guard = kPhiDepthGuard) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("phi_eval: x outside [0,1]");
    return detail::conjugate_eval(pair.f, pair.g, std::nullopt, x, tol, guard);
}

/// phi^{-1} by the exchanged pair (g, f); the reported error bound is the
/// achieved f-cylinder width (generic weak contractions carry no rate).
inline PhiResult phi_inverse_eval(const ConjugacyPair& pair, const Rat& y,
                                  double tol, std::int64_t guard = kPhiDepthGuard) {
    if (y.is_negative() || y > Rat(1))
        throw std::domain_error("phi_inverse_eval: y outside [0,1]");
    return detail::conjugate_eval(pair.g, pair.f, y, y.to_double(), tol, guard);
}

inline PhiResult phi_inverse_eval(const ConjugacyPair& pair, double y,
                                  double tol, std::int64_t guard = kPhiDepthGuard) {
    if (!(y >= 0.0 && y <= 1.0))
        throw std::domain_error("phi_inverse_eval: y outside [0,1]");
    return detail::conjugate_eval(pair.g, pair.f, std::nullopt, y, tol, guard);
}

/// mu_phi of the f-cylinder of `word`: the exact g-cylinder width.
inline Rat mu_mass(const ConjugacyPair& pair, const Word& word) {
    auto c = cylinder(pair.g, word);
    return c.hi - c.lo;
}

struct MassResult {
    double value = 0, err = 0;
    std::optional<Rat> exact;
};

/**
 * mu_phi([u, v]) by covering with f-cylinders: interior cylinders contribute
 * exact g-mass; the straddling boundary slivers are split widest-g-mass
 * first until their total mass is below tol.
 */
inline MassResult mu_mass_interval(const ConjugacyPair& pair, double u, double v,
                                   double tol, int max_splits = 20000) {
    if (!(u <= v))
        throw std::invalid_argument("mu_mass_interval: empty interval");
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    const bool f_exact = pair.f.exact();

    struct Node {
        std::optional<MobiusMap> fmat;  // composed f word map (exact f only)
        Word word;                      // kept for float f
        MobiusMap gmat;
        double flo, fhi;
        Rat mass;
    };
    auto order = [](const Node& a, const Node& b) { return a.mass < b.mass; };
    std::priority_queue<Node, std::vector<Node>, decltype(order)> partial(order);

    Rat inside(0);
    Rat pending(0);

    // inside must hold without slack: overcounting would inflate the mass,
    // and a touching overlap has zero measure, so ties go outside
    auto classify = [&](Node&& nd) {
        if (nd.flo >= u && nd.fhi <= v) {
            inside += nd.mass;
        } else if (nd.fhi <= u || nd.flo >= v) {
            // outside
        } else {
            pending += nd.mass;
            partial.push(std::move(nd));
        }
    };

    Node root;
    if (f_exact) root.fmat = MobiusMap::identity();
    root.gmat = MobiusMap::identity();
    root.flo = 0.0;
    root.fhi = 1.0;
    root.mass = Rat(1);
    classify(std::move(root));

    int splits = 0;
    while (!partial.empty() && pending.to_double() > tol && splits < max_splits) {
        Node nd = partial.top();
        partial.pop();
        pending -= nd.mass;
        ++splits;
        for (int j = 0; j < pair.N(); ++j) {
            Node child;
            child.gmat = mobius_compose(nd.gmat, pair.g.mobius_at(j));
            child.mass = child.gmat.eval(Rat(1)) - child.gmat.eval(Rat(0));
            if (f_exact) {
                child.fmat = mobius_compose(*nd.fmat, pair.f.mobius_at(j));
                child.flo = child.fmat->eval(0.0);
                child.fhi = child.fmat->eval(1.0);
            } else {
                child.word = nd.word;
                child.word.push_back(j);
                auto c = cylinder_float(pair.f, child.word);
                child.flo = c.lo;
                child.fhi = c.hi;
            }
            classify(std::move(child));
        }
    }

    MassResult out;
    double p = pending.to_double();
    out.value = inside.to_double() + 0.5 * p;
    out.err = 0.5 * p;
    if (pending.is_zero()) out.exact = inside;
    return out;
}

struct PhiPoint {
    double x = 0, phi = 0, err = 0;
    std::optional<Rat> x_exact, phi_exact;
};

struct PhiSample {
    std::vector<PhiPoint> pts;
};

/**
 * Samples of the solution curve. Float mode: n+1 points at x = k/n, each
 * within tol. Exact mode: all depth-d f-cylinder endpoints with their exact
 * images, d chosen so N^d >= n.
 */
inline PhiSample sample_phi(const ConjugacyPair& pair, int n, double tol,
                            bool exact_mode = false) {
    if (n < 2) throw std::invalid_argument("sample_phi: need n >= 2");
    PhiSample out;
    if (exact_mode) {
        if (!pair.exact())
            throw std::domain_error("sample_phi: exact mode needs exact f");
        int d = 1;
        std::int64_t count = pair.N();
        while (count < n) { count *= pair.N(); ++d; }
        // left endpoints of depth-d words in lexicographic order tile [0,1]
        Word w(static_cast<std::size_t>(d), 0);
        while (true) {
            auto fc = cylinder(pair.f, w);
            auto gc = cylinder(pair.g, w);
            PhiPoint pt;
            pt.x_exact = fc.lo;
            pt.phi_exact = gc.lo;
            pt.x = fc.lo.to_double();
            pt.phi = gc.lo.to_double();
            out.pts.push_back(pt);
            int k = d - 1;
            while (k >= 0 && ++w[static_cast<std::size_t>(k)] == pair.N()) {
                w[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
        }
        PhiPoint last;
        last.x_exact = Rat(1);
        last.phi_exact = Rat(1);
        last.x = 1.0;
        last.phi = 1.0;
        out.pts.push_back(last);
        return out;
    }
    for (int k = 0; k <= n; ++k) {
        PhiPoint pt;
        PhiResult r = pair.exact() ? phi_eval(pair, Rat(k, n), tol)
                                   : phi_eval(pair, static_cast<double>(k) / n, tol);
        pt.x = static_cast<double>(k) / n;
        pt.phi = r.value;
        pt.err = r.err;
        if (r.exact) pt.phi_exact = r.exact;
        if (pair.exact()) pt.x_exact = Rat(k, n);
        out.pts.push_back(pt);
    }
    return out;
}

struct RegularityReport {
    bool all_hold = true;
    double tightest_ratio = 0;  // max over the grid of bound/mass (<= 1 when holding)
    int checked = 0;
    double c = 0, C = 0;
};

/**
 * Checks mu_phi([y-r, y+r]) >= c^(1 + C/r) over a grid, with c the fitted
 * lower-law base of the g-system and C the fitted upper-law constant of the
 * f-system. Masses enter through their certified interior lower bound.
 */
inline RegularityReport regularity_check(const ConjugacyPair& pair, int grid,
                                         int fit_depth = 18) {
    if (!pair.f.all_mobius_or_affine() || !pair.g.all_mobius_or_affine())
        throw std::domain_error("regularity_check: both systems must be LF");
    auto gf = growth_bounds_check(pair.g, fit_depth);
    auto ff = growth_bounds_check(pair.f, fit_depth);

    RegularityReport rep;
    rep.c = gf.c_lower;
    rep.C = ff.C_upper;
    double logc = std::log(gf.c_lower);

    for (int i = 1; i <= grid; ++i) {
        double y = static_cast<double>(i) / (grid + 1);
        for (int j = 1; j <= grid; ++j) {
            double r = 0.5 * static_cast<double>(j) / (grid + 1);
            if (y - r < 0.0 || y + r > 1.0) continue;
            auto mass = mu_mass_interval(pair, y - r, y + r, 1e-9);
            double lower_mass = std::max(mass.value - mass.err, 1e-300);
            double log_bound = (1.0 + rep.C / r) * logc;
            double log_mass = std::log(lower_mass);
            ++rep.checked;
            if (log_mass < log_bound) rep.all_hold = false;
            rep.tightest_ratio = std::max(rep.tightest_ratio,
                                          std::exp(log_bound - log_mass));
        }
    }
    return rep;
}

}  // namespace conjkit
