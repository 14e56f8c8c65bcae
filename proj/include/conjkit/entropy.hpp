#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conjkit/spectral.hpp"

namespace conjkit {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// s_N(p|q) = sum_i p_i log(q_i / p_i) <= 0, with 0 log(q/0) := 0; -inf when
/// p charges a null coordinate of q.
inline double rel_entropy(const std::vector<double>& p,
                          const std::vector<double>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("rel_entropy: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return kNegInf;
        s += p[i] * std::log(q[i] / p[i]);
    }
    return std::min(s, 0.0);
}

inline double rel_entropy(const ProbVec& p, const ProbVec& q) {
    return rel_entropy(p.v, q.v);
}

/// Closed region of probability vectors: per-coordinate box bounds within
/// the simplex, optionally minus an open L1 ball.
struct RegionSpec {
    std::vector<double> lo, hi;
    std::optional<std::pair<std::vector<double>, double>> l1_outside;

    int N() const { return static_cast<int>(lo.size()); }

    static RegionSpec full(int n) {
        return {std::vector<double>(static_cast<std::size_t>(n), 0.0),
                std::vector<double>(static_cast<std::size_t>(n), 1.0),
                std::nullopt};
    }
    static RegionSpec interior_floor(int n, double eps) {
        return {std::vector<double>(static_cast<std::size_t>(n), eps),
                std::vector<double>(static_cast<std::size_t>(n), 1.0),
                std::nullopt};
    }
    RegionSpec& with_bounds(int i, double l, double h) {
        lo.at(static_cast<std::size_t>(i)) = l;
        hi.at(static_cast<std::size_t>(i)) = h;
        return *this;
    }
    RegionSpec& exclude_l1_ball(std::vector<double> center, double radius) {
        l1_outside = {std::move(center), radius};
        return *this;
    }

    bool box_feasible() const {
        double slo = 0, shi = 0;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (lo[i] > hi[i] + 1e-15) return false;
            slo += lo[i];
            shi += hi[i];
        }
        return slo <= 1.0 + 1e-12 && shi >= 1.0 - 1e-12;
    }
    bool contains(const std::vector<double>& q, double tol = 1e-9) const {
        double s = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q[i] < lo[i] - tol || q[i] > hi[i] + tol) return false;
            s += q[i];
        }
        if (std::abs(s - 1.0) > 1e-7) return false;
        if (l1_outside) {
            double d = 0;
            for (std::size_t i = 0; i < q.size(); ++i)
                d += std::abs(q[i] - l1_outside->first[i]);
            if (d < l1_outside->second - tol) return false;
        }
        return true;
    }
};

namespace detail {

// Enumerate the barycentric grid {k/steps} of the N-simplex.
inline void simplex_grid(int n, int steps,
                         const std::function<void(const std::vector<double>&)>& fn) {
    std::vector<int> parts(static_cast<std::size_t>(n), 0);
    std::vector<double> q(static_cast<std::size_t>(n), 0.0);
    std::function<void(int, int)> rec = [&](int coord, int left) {
        if (coord == n - 1) {
            parts[static_cast<std::size_t>(coord)] = left;
            for (int i = 0; i < n; ++i)
                q[static_cast<std::size_t>(i)] =
                    static_cast<double>(parts[static_cast<std::size_t>(i)]) / steps;
            fn(q);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            parts[static_cast<std::size_t>(coord)] = k;
            rec(coord + 1, left - k);
        }
    };
    rec(0, steps);
}

// One side of the sphere |p - q|_1 = eps within a fixed sign pattern:
// variables x_i in [xlo_i, xhi_i] with sum x = target. The objective terms are
// concave, so pairwise mass transfers with the closed-form two-point optimum
// reach the maximum.
struct SideProblem {
    std::vector<std::size_t> idx;
    std::vector<double> xlo, xhi;
    double target = 0;

    bool feasible() const {
        double a = 0, b = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            a += xlo[k];
            b += xhi[k];
        }
        return a <= target + 1e-14 && b >= target - 1e-14;
    }
    // proportional fill between bounds
    std::vector<double> init() const {
        std::vector<double> x(xlo);
        double have = 0, room = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            have += xlo[k];
            room += xhi[k] - xlo[k];
        }
        double need = target - have;
        if (room > 0) {
            for (std::size_t k = 0; k < idx.size(); ++k)
                x[k] += need * (xhi[k] - xlo[k]) / room;
        }
        return x;
    }
};

}  // namespace detail

/**
 * V(q; eps): max of s_N(p|q) over p in the simplex with |p - q|_1 >= eps.
 *
 * s_N(.|q) is concave with its peak at p = q, so it is non-increasing along
 * rays leaving q; projecting any feasible p back to the sphere
 * |p - q|_1 = eps along its ray cannot decrease the value, and the maximum
 * is attained on the sphere (or a simplex face it crosses). Within a fixed
 * sign pattern of p - q the sphere constraint is linear, each side carries
 * half of eps, and same-sign pairwise transfers (two-point optimum
 * p_i/q_i = p_j/q_j, clamped) reach the concave maximum. Box constraints on
 * p are honored by clamping; the search still only visits the sphere.
 */
inline double V_of(const std::vector<double>& q, double eps,
                   const RegionSpec& region) {
    if (eps <= 0.0 || eps > 2.0) throw std::invalid_argument("V_of: eps out of range");

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] > 0.0) support.push_back(i);
    const std::size_t m = support.size();
    if (m < 2) return kNegInf;

    double best = kNegInf;
    const unsigned patterns = 1u << m;
    std::vector<double> p(q.size());
    for (unsigned mask = 1; mask + 1 < patterns; ++mask) {
        detail::SideProblem plus, minus;
        plus.target = minus.target = eps / 2.0;
        bool ok = true;
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t i = support[k];
            double lo = std::max(0.0, region.lo[i]);
            double hi = std::min(1.0, region.hi[i]);
            if (mask & (1u << k)) {
                // p_i >= q_i
                double xlo = std::max(0.0, lo - q[i]);
                double xhi = hi - q[i];
                if (xhi < xlo - 1e-15) { ok = false; break; }
                plus.idx.push_back(i);
                plus.xlo.push_back(xlo);
                plus.xhi.push_back(std::max(xlo, xhi));
            } else {
                // p_i <= q_i
                double ylo = std::max(0.0, q[i] - hi);
                double yhi = q[i] - lo;
                if (yhi < ylo - 1e-15) { ok = false; break; }
                minus.idx.push_back(i);
                minus.xlo.push_back(ylo);
                minus.xhi.push_back(std::max(ylo, yhi));
            }
        }
        if (!ok || !plus.feasible() || !minus.feasible()) continue;

        auto xp = plus.init();
        auto xm = minus.init();
        auto fill_p = [&] {
            std::fill(p.begin(), p.end(), 0.0);
            for (std::size_t i = 0; i < q.size(); ++i) p[i] = q[i];
            for (std::size_t k = 0; k < plus.idx.size(); ++k)
                p[plus.idx[k]] = q[plus.idx[k]] + xp[k];
            for (std::size_t k = 0; k < minus.idx.size(); ++k)
                p[minus.idx[k]] = q[minus.idx[k]] - xm[k];
        };

        // pairwise transfers; the two-point optimum p_i/q_i = p_j/q_j is exact
        auto sweep_side = [&](detail::SideProblem& side, std::vector<double>& x,
                              int sign) {
            bool improved = false;
            for (std::size_t a = 0; a + 1 < side.idx.size(); ++a) {
                for (std::size_t b2 = a + 1; b2 < side.idx.size(); ++b2) {
                    std::size_t i = side.idx[a], j = side.idx[b2];
                    double qi = q[i], qj = q[j];
                    double pi = qi + sign * x[a], pj = qj + sign * x[b2];
                    double T = pi + pj;
                    double pstar = qi * T / (qi + qj);
                    double xstar = sign * (pstar - qi);
                    double v = x[a] + x[b2];
                    double xa = std::clamp(xstar, std::max(side.xlo[a], v - side.xhi[b2]),
                                           std::min(side.xhi[a], v - side.xlo[b2]));
                    if (std::abs(xa - x[a]) > 1e-15) {
                        x[a] = xa;
                        x[b2] = v - xa;
                        improved = true;
                    }
                }
            }
            return improved;
        };
        for (int it = 0; it < 200; ++it) {
            bool ch = sweep_side(plus, xp, +1);
            ch = sweep_side(minus, xm, -1) || ch;
            if (!ch) break;
        }
        fill_p();
        best = std::max(best, rel_entropy(p, q));
    }
    return best;
}

inline double V_of(const std::vector<double>& q, double eps) {
    return V_of(q, eps, RegionSpec::full(static_cast<int>(q.size())));
}

/// Brute-force oracle on the barycentric grid (test cross-check; N <= 4).
inline double V_brute(const std::vector<double>& q, double eps, int steps = 200) {
    double best = kNegInf;
    detail::simplex_grid(static_cast<int>(q.size()), steps,
                         [&](const std::vector<double>& p) {
                             double d = 0;
                             for (std::size_t i = 0; i < q.size(); ++i)
                                 d += std::abs(p[i] - q[i]);
                             if (d >= eps - 1e-12)
                                 best = std::max(best, rel_entropy(p, q));
                         });
    return best;
}

struct VGlobal {
    double value = kNegInf;
    std::vector<double> argq;
};

/// V(eps) = max over q (within q_region) of V(q; eps): grid plus local
/// pattern refinement, justified by continuity of V in q.
inline VGlobal V_global(int n, double eps, const RegionSpec& q_region,
                        int steps = 0) {
    if (steps == 0) steps = n == 2 ? 256 : (n == 3 ? 48 : 24);
    VGlobal out;
    detail::simplex_grid(n, steps, [&](const std::vector<double>& q) {
        if (!q_region.contains(q, 1e-12)) return;
        double v = V_of(q, eps);
        if (v > out.value) {
            out.value = v;
            out.argq = q;
        }
    });
    if (out.argq.empty()) return out;

    double step = 1.0 / steps;
    std::vector<double> q = out.argq;
    for (int round = 0; round < 40; ++round) {
        bool improved = false;
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (std::size_t j = 0; j < q.size(); ++j) {
                if (i == j) continue;
                std::vector<double> q2 = q;
                q2[i] += step;
                q2[j] -= step;
                if (q2[i] > 1.0 || q2[j] < 0.0) continue;
                if (!q_region.contains(q2, 1e-12)) continue;
                double v = V_of(q2, eps);
                if (v > out.value + 1e-15) {
                    out.value = v;
                    out.argq = q2;
                    q = q2;
                    improved = true;
                }
            }
        }
        if (!improved) step /= 2.0;
        if (step < 1e-10) break;
    }
    return out;
}

/// W_i(q, y) in chart coordinates.
inline double W_of(const SpectralData& s, int i, const std::vector<double>& q,
                   double t) {
    ProbVec g0 = s.G_at_chart(t);
    ProbVec g1 = s.G_at_chart(s.H_apply_chart(i, t));
    double w = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        w = std::max(w, std::abs(g0.v[k] - q[k]));
        w = std::max(w, std::abs(g1.v[k] - q[k]));
    }
    return w;
}

struct InfW {
    double value = 0;      // refined minimum over the y grid
    double certified = 0;  // grid envelope minus Lipschitz slack
    double arg_t = 0;
};

/// inf over Y of W_i(q, .): adaptive chart grid with local refinement; the
/// certified field subtracts a finite-difference Lipschitz slack.
inline InfW inf_W(const SpectralData& s, int i, const std::vector<double>& q,
                  int grid = 512) {
    double t_lo = s.Y.t_lo, t_hi = s.Y.t_hi;
    InfW out;
    if (s.Y.degenerate()) {
        out.value = out.certified = W_of(s, i, q, t_lo);
        out.arg_t = t_lo;
        return out;
    }
    double h = (t_hi - t_lo) / grid;
    double best = std::numeric_limits<double>::infinity(), best_t = t_lo;
    double prev = W_of(s, i, q, t_lo), max_slope = 0;
    if (prev < best) { best = prev; best_t = t_lo; }
    for (int k = 1; k <= grid; ++k) {
        double t = t_lo + h * k;
        double w = W_of(s, i, q, t);
        max_slope = std::max(max_slope, std::abs(w - prev) / h);
        prev = w;
        if (w < best) { best = w; best_t = t; }
    }
    // trisection-style shrink around the best bracket
    double span = h;
    for (int round = 0; round < 60 && span > 1e-12; ++round) {
        double l = std::max(t_lo, best_t - span), r = std::min(t_hi, best_t + span);
        for (int k = 0; k <= 9; ++k) {
            double t = l + (r - l) * k / 9.0;
            double w = W_of(s, i, q, t);
            if (w < best) { best = w; best_t = t; }
        }
        span /= 3.0;
    }
    out.value = best;
    out.arg_t = best_t;
    out.certified = best - 1.5 * max_slope * h / 2.0;
    return out;
}

/**
 * The cyclic coloring map: distinct vectors p_{j_1}, ..., p_{j_l}; q inside
 * the delta0/4 ball of p_{j_k} is sent to j_{k+1 mod l}, everything else
 * to 0.
 */
struct Coloring {
    std::vector<int> reps;  // j_1 < ... < j_l
    double delta0 = 0;
    std::optional<Rat> delta0_exact;
    const SpectralData* spec = nullptr;

    explicit Coloring(const SpectralData& s) : spec(&s) {
        reps = s.distinct_pvec_reps();
        if (reps.size() < 2)
            throw std::domain_error(
                "Coloring: all p_i coincide (theorem-2 regime)");
        bool all_exact = true;
        for (int r : reps)
            all_exact = all_exact && s.pvec[static_cast<std::size_t>(r)].exact.has_value();
        double d0 = std::numeric_limits<double>::infinity();
        std::optional<Rat> d0x;
        for (std::size_t a = 0; a + 1 < reps.size(); ++a) {
            for (std::size_t b = a + 1; b < reps.size(); ++b) {
                const ProbVec& x = s.pvec[static_cast<std::size_t>(reps[a])];
                const ProbVec& y = s.pvec[static_cast<std::size_t>(reps[b])];
                d0 = std::min(d0, x.l1_dist(y));
                if (all_exact) {
                    Rat d(0);
                    for (std::size_t k = 0; k < x.exact->size(); ++k)
                        d += ((*x.exact)[k] - (*y.exact)[k]).abs();
                    if (!d0x || d < *d0x) d0x = d;
                }
            }
        }
        delta0 = d0;
        delta0_exact = d0x;
    }

    int operator()(const std::vector<double>& q) const {
        double radius = delta0 / 4.0;
        for (std::size_t k = 0; k < reps.size(); ++k) {
            const ProbVec& c = spec->pvec[static_cast<std::size_t>(reps[k])];
            double d = 0;
            for (std::size_t i = 0; i < q.size(); ++i)
                d += std::abs(q[i] - c.v[i]);
            if (d <= radius)
                return reps[(k + 1) % reps.size()];
        }
        return 0;
    }
    int operator()(const ProbVec& q) const { return (*this)(q.v); }
};

struct Eps1Result {
    double value = 0;         // refined grid infimum
    double certified = 0;     // envelope minus slack
    double delta0_over_4N = 0;
    std::vector<double> eps_jk;  // per distinct vector, the proof's piece
    std::vector<double> arg_q;
    double arg_t = 0;
};

/**
 * eps1~ = inf over q in the closed simplex and y in Y of W_{A(q)}(q, y).
 * Grid plus refinement; throws if the envelope cannot be certified positive
 * at the maximum resolution.
 */
inline Eps1Result eps1_tilde(const SpectralData& s, int q_steps = 0,
                             int y_grid = 256) {
    Coloring col(s);
    const int n = s.N;
    if (q_steps == 0) q_steps = n == 2 ? 240 : (n == 3 ? 45 : 18);

    Eps1Result out;
    out.value = std::numeric_limits<double>::infinity();
    detail::simplex_grid(n, q_steps, [&](const std::vector<double>& q) {
        int i1 = col(q);
        InfW w = inf_W(s, i1, q, y_grid);
        if (w.value < out.value) {
            out.value = w.value;
            out.arg_q = q;
            out.arg_t = w.arg_t;
        }
    });

    // local refinement in q around the worst point
    double step = 1.0 / q_steps;
    std::vector<double> q = out.arg_q;
    for (int round = 0; round < 30; ++round) {
        bool improved = false;
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (std::size_t j = 0; j < q.size(); ++j) {
                if (i == j) continue;
                std::vector<double> q2 = q;
                q2[i] += step;
                q2[j] -= step;
                if (q2[i] > 1.0 + 1e-12 || q2[j] < -1e-12) continue;
                q2[i] = std::min(q2[i], 1.0);
                q2[j] = std::max(q2[j], 0.0);
                InfW w = inf_W(s, col(q2), q2, y_grid);
                if (w.value < out.value - 1e-15) {
                    out.value = w.value;
                    out.arg_q = q2;
                    out.arg_t = w.arg_t;
                    q = q2;
                    improved = true;
                }
            }
        }
        if (!improved) step /= 2.0;
        if (step < 1e-7) break;
    }

    // W is 1-Lipschitz in q under the sup norm; grid spacing bounds the gap
    out.certified = out.value - 1.0 / q_steps;
    out.delta0_over_4N = col.delta0 / (4.0 * n);

    for (int r : col.reps) {
        // inf over y with G(y) outside the ball of p_r of
        // (1/2) max_j |G_j(H_r(y)) - G_j(y)|
        double t_lo = s.Y.t_lo, t_hi = s.Y.t_hi;
        double worst = std::numeric_limits<double>::infinity();
        int g = std::max(y_grid, 64);
        for (int k = 0; k <= g; ++k) {
            double t = s.Y.degenerate() ? t_lo : t_lo + (t_hi - t_lo) * k / g;
            ProbVec gy = s.G_at_chart(t);
            if (gy.l1_dist(s.pvec[static_cast<std::size_t>(r)]) <= col.delta0 / 4.0)
                continue;
            ProbVec gh = s.G_at_chart(s.H_apply_chart(r, t));
            double m = 0;
            for (int j = 0; j < n; ++j)
                m = std::max(m, std::abs(gh.v[static_cast<std::size_t>(j)] -
                                         gy.v[static_cast<std::size_t>(j)]));
            worst = std::min(worst, 0.5 * m);
            if (s.Y.degenerate()) break;
        }
        out.eps_jk.push_back(worst);
    }

    if (out.certified <= 0.0 && out.value <= 0.0)
        throw std::runtime_error("eps1_tilde: envelope not positive; refine grid");
    return out;
}

struct SupEntropy {
    double sup = kNegInf;
    double arg_t = 0;
    std::vector<double> arg_q;
};

namespace detail {

// max over q in the box region of sum_i p_i log q_i by the KKT water-filling
// form q_i = clamp(p_i / lambda, lo_i, hi_i); the mass equation is monotone
// in lambda.
inline std::vector<double> max_loglik_q(const std::vector<double>& p,
                                        const RegionSpec& region) {
    const std::size_t n = p.size();
    std::vector<double> q(n);
    auto fill = [&](double lam) {
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double v = p[i] / lam;
            q[i] = std::clamp(v, std::max(0.0, region.lo[i]),
                              std::min(1.0, region.hi[i]));
            sum += q[i];
        }
        return sum;
    };
    double lo = 1e-12, hi = 1e12;
    for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);
        (fill(mid) > 1.0 ? lo : hi) = mid;
    }
    fill(std::sqrt(lo * hi));
    // final renormalization of free coordinates guards rounding
    double sum = 0;
    for (double v : q) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) {
        for (std::size_t i = 0; i < n; ++i) q[i] /= sum;
    }
    return q;
}

}  // namespace detail

/**
 * sup over y in Y and q in the region of s_N(G(y)|q). The inner q problem is
 * solved exactly by water-filling; the outer y problem by a chart grid with
 * bracket refinement (endpoints always included).
 */
inline SupEntropy sup_entropy_region(const SpectralData& s,
                                     const RegionSpec& region, int grid = 1024) {
    if (!region.box_feasible())
        throw std::invalid_argument("sup_entropy_region: infeasible region");
    SupEntropy out;
    auto eval_at = [&](double t) {
        ProbVec p = s.G_at_chart(t);
        std::vector<double> q = detail::max_loglik_q(p.v, region);
        double v = rel_entropy(p.v, q);
        if (v > out.sup) {
            out.sup = v;
            out.arg_t = t;
            out.arg_q = q;
        }
    };
    if (s.Y.degenerate()) {
        eval_at(s.Y.t_lo);
        return out;
    }
    for (int k = 0; k <= grid; ++k)
        eval_at(s.Y.t_lo + (s.Y.t_hi - s.Y.t_lo) * k / grid);
    double span = (s.Y.t_hi - s.Y.t_lo) / grid;
    for (int round = 0; round < 70 && span > 1e-14; ++round) {
        double l = std::max(s.Y.t_lo, out.arg_t - span);
        double r = std::min(s.Y.t_hi, out.arg_t + span);
        for (int k = 0; k <= 12; ++k) eval_at(l + (r - l) * k / 12.0);
        span /= 3.0;
    }
    return out;
}

/// x log(qbar / x) with the 0 log . := 0 convention; increasing on
/// [0, qbar/e], decreasing beyond. Used by the worked-example bound chains.
inline double entropy_term(double x, double qbar) {
    if (x <= 0.0) return 0.0;
    return x * std::log(qbar / x);
}

}  // namespace conjkit
