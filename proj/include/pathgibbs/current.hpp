#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathgibbs/io.hpp"
#include "pathgibbs/n_functional.hpp"
#include "pathgibbs/pair_potential.hpp"
#include "pathgibbs/rough_integral.hpp"
#include "pathgibbs/rough_path.hpp"
#include "pathgibbs/test_field.hpp"

namespace pathgibbs {

// Evaluable stochastic current backed by a lifted path. The current axioms
// (zero at coinciding times, additivity, locality) hold exactly at grid
// resolution because evaluation is the compensated sum itself.
class GridCurrent {
public:
    explicit GridCurrent(std::shared_ptr<const Step2RoughPath> backing)
        : rp_(std::move(backing)) {}
    explicit GridCurrent(Step2RoughPath backing)
        : rp_(std::make_shared<const Step2RoughPath>(std::move(backing))) {}

    const Step2RoughPath& backing() const { return *rp_; }
    double support_lo() const { return rp_->base().t0(); }
    double support_hi() const { return rp_->base().t1(); }
    int dim() const { return rp_->dim(); }

    double evaluate(const TestField& phi, double s, double t) const {
        if (s < support_lo() - 1e-12 || t > support_hi() + 1e-12 || s > t)
            throw std::invalid_argument("GridCurrent: [s,t] outside support");
        std::size_t a = rp_->base().index_of_time(s);
        std::size_t b = rp_->base().index_of_time(t);
        return rough_integral(*rp_, phi, a, b);
    }

private:
    std::shared_ptr<const Step2RoughPath> rp_;
};

// Evaluates the current against the cos/sin components of psi_{k,w} in every
// coordinate direction in one pass over the grid.
inline void fourier_current_eval(const Step2RoughPath& rp, std::size_t a, std::size_t b,
                                 const double* k, double w, double* out_cos, double* out_sin) {
    const int d = rp.dim();
    for (int c = 0; c < d; ++c) {
        out_cos[c] = 0.0;
        out_sin[c] = 0.0;
    }
    std::vector<double> area(static_cast<std::size_t>(d) * d);
    for (std::size_t j = a; j < b; ++j) {
        const double* xj = rp.base().point(j);
        const double* xj1 = rp.base().point(j + 1);
        double p = w * rp.base().time_at(j);
        for (int i = 0; i < d; ++i) p += k[i] * xj[i];
        double cp = std::cos(p), sp = std::sin(p);
        rp.area(j, j + 1, area.data());
        for (int c = 0; c < d; ++c) {
            double karea = 0.0;
            for (int m = 0; m < d; ++m) karea += k[m] * area[m * d + c];
            out_cos[c] += cp * (xj1[c] - xj[c]) - sp * karea;
            out_sin[c] += sp * (xj1[c] - xj[c]) + cp * karea;
        }
    }
}

// mode evaluator: (k, w) -> cos/sin current values per direction
using ModeEvaluator =
    std::function<void(const double* k, double w, double* out_cos, double* out_sin)>;

inline ModeEvaluator make_mode_evaluator(std::shared_ptr<const Step2RoughPath> rp,
                                         std::size_t a, std::size_t b, double scale = 1.0) {
    return [rp = std::move(rp), a, b, scale](const double* k, double w, double* oc, double* os) {
        fourier_current_eval(*rp, a, b, k, w, oc, os);
        if (scale != 1.0) {
            for (int c = 0; c < rp->dim(); ++c) {
                oc[c] *= scale;
                os[c] *= scale;
            }
        }
    };
}

inline ModeEvaluator zero_mode_evaluator(int d) {
    return [d](const double*, double, double* oc, double* os) {
        for (int c = 0; c < d; ++c) {
            oc[c] = 0.0;
            os[c] = 0.0;
        }
    };
}

// Quadrature settings for the (k, w) pairing box. Defaults cover the shipped
// Gaussian-exponential potential: |k_i| <= 6/sigma, |w| <= 40/ell, 64 points
// per axis.
struct PairingBox {
    double kmax = 0.0;  // 0 means derive from W: 6/sigma
    double wmax = 0.0;  // 0 means derive from W: 40/ell
    int points_per_axis = 64;
};

struct PairWResult {
    double value = 0.0;
    double tail_bound = 0.0;  // bound on the out-of-box contribution (0 if unknown)
};

// <a,b>_W = (2 pi)^{-(d+1)} int What(k,w) [a(cos psi).b(cos psi) +
// a(sin psi).b(sin psi)] dk dw over the truncated box, trapezoid weights.
// With this normalization <C,C>_W equals twice the grid internal energy.
inline double pair_w_modes(const ModeEvaluator& a, const ModeEvaluator& b, int d,
                           const PairPotential& W, const PairingBox& box_in = PairingBox{}) {
    PairingBox box = box_in;
    if (box.kmax <= 0.0) box.kmax = 6.0 / W.sigma();
    if (box.wmax <= 0.0) box.wmax = 40.0 / W.ell();
    int n = box.points_per_axis;
    if (n < 2) throw std::invalid_argument("pair_w: degenerate box");

    std::vector<double> kgrid(n), wgrid(n), kw(n);
    for (int i = 0; i < n; ++i) {
        kgrid[i] = -box.kmax + 2.0 * box.kmax * i / (n - 1);
        wgrid[i] = -box.wmax + 2.0 * box.wmax * i / (n - 1);
        kw[i] = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    }
    double hk = 2.0 * box.kmax / (n - 1);
    double hw = 2.0 * box.wmax / (n - 1);

    std::vector<double> ac(d), as(d), bc(d), bs(d), kvec(d);
    std::vector<int> idx(d, 0);
    KahanSum acc;
    // iterate the d-dimensional k grid x the w grid
    bool done = false;
    while (!done) {
        double wk = 1.0;
        for (int i = 0; i < d; ++i) {
            kvec[i] = kgrid[idx[i]];
            wk *= kw[idx[i]];
        }
        for (int iw = 0; iw < n; ++iw) {
            double wt = wk * kw[iw];
            double what = W.fourier(kvec.data(), d, wgrid[iw]);
            a(kvec.data(), wgrid[iw], ac.data(), as.data());
            b(kvec.data(), wgrid[iw], bc.data(), bs.data());
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += ac[c] * bc[c] + as[c] * bs[c];
            acc.add(wt * what * dot);
        }
        for (int i = 0;; ++i) {
            if (i == d) {
                done = true;
                break;
            }
            if (++idx[i] < n) break;
            idx[i] = 0;
        }
    }
    double cell = std::pow(hk, d) * hw;
    double norm = std::pow(2.0 * 3.141592653589793, -(d + 1));
    return acc.value() * cell * norm;
}

// Out-of-box contribution bound for grid-current pairings: per direction c,
// |C(psi part, c)| <= A0_c + |k| A1_c with A0 = sum |dX^c| and
// A1 = sum_m |Area^{cm}_{j,j+1}|, and the Fourier-mass moments of What
// outside the box are integrated in closed form.
inline double pair_w_tail_bound(const Step2RoughPath& ra, std::size_t a0, std::size_t a1,
                                const Step2RoughPath& rb, std::size_t b0, std::size_t b1,
                                const PairPotential& W, const PairingBox& box_in = PairingBox{}) {
    PairingBox box = box_in;
    if (box.kmax <= 0.0) box.kmax = 6.0 / W.sigma();
    if (box.wmax <= 0.0) box.wmax = 40.0 / W.ell();
    const int d = ra.dim();
    auto masses = [&](const Step2RoughPath& rp, std::size_t lo, std::size_t hi,
                      std::vector<double>& m0, std::vector<double>& m1) {
        m0.assign(d, 0.0);
        m1.assign(d, 0.0);
        std::vector<double> area(static_cast<std::size_t>(d) * d);
        for (std::size_t j = lo; j < hi; ++j) {
            rp.area(j, j + 1, area.data());
            for (int c = 0; c < d; ++c) {
                m0[c] += std::abs(rp.base().at(j + 1, c) - rp.base().at(j, c));
                double s = 0.0;
                for (int m = 0; m < d; ++m) s += std::abs(area[m * d + c]);
                m1[c] += s;
            }
        }
    };
    std::vector<double> a0m, a1m, b0m, b1m;
    masses(ra, a0, a1, a0m, a1m);
    masses(rb, b0, b1, b0m, b1m);

    double sigma = W.sigma(), ell = W.ell();
    double sqrt2pi = std::sqrt(6.283185307179586);
    auto g0 = [&](double K) { return sqrt2pi / sigma * std::erf(sigma * K / std::sqrt(2.0)); };
    auto g1 = [&](double K) {
        return 2.0 / (sigma * sigma) * (1.0 - std::exp(-sigma * sigma * K * K / 2.0));
    };
    auto g2 = [&](double K) {
        return sqrt2pi / (sigma * sigma * sigma) * std::erf(sigma * K / std::sqrt(2.0)) -
               2.0 * K / (sigma * sigma) * std::exp(-sigma * sigma * K * K / 2.0);
    };
    double g0a = sqrt2pi / sigma, g1a = 2.0 / (sigma * sigma),
           g2a = sqrt2pi / (sigma * sigma * sigma);
    double K = box.kmax;
    double space_const =
        W.amplitude() * std::pow(6.283185307179586, 0.5 * d) * std::pow(sigma, d);
    // moments of the space factor: all space, inside the k box (lower bounds
    // suffice for "inside" since we subtract them)
    double dd = static_cast<double>(d);
    double s0_all = space_const * std::pow(g0a, d);
    double s1_all = space_const * dd * g1a * std::pow(g0a, d - 1);
    double s2_all = space_const * dd * dd * g2a * std::pow(g0a, d - 1);
    double s0_in = space_const * std::pow(g0(K), d);
    double s1_in = space_const * dd * g1(K) * std::pow(g0(K), d - 1);
    double s2_in = space_const * dd * dd * g2(K) * std::pow(g0(K), d - 1);
    double t_all = 2.0 * 3.141592653589793 /* int 2 ell/(1+ell^2 w^2) dw */;
    double t_in = 4.0 * std::atan(ell * box.wmax);
    double t_out = std::max(0.0, t_all - t_in);

    double tail = 0.0;
    for (int c = 0; c < d; ++c) {
        double p0 = a0m[c] * b0m[c];
        double p1 = a0m[c] * b1m[c] + a1m[c] * b0m[c];
        double p2 = a1m[c] * b1m[c];
        // |w| > wmax, all k
        tail += t_out * (p0 * s0_all + p1 * s1_all + p2 * s2_all);
        // |w| <= wmax, k outside the box
        tail += t_in * (p0 * std::max(0.0, s0_all - s0_in) + p1 * std::max(0.0, s1_all - s1_in) +
                        p2 * std::max(0.0, s2_all - s2_in));
    }
    return 2.0 * tail * std::pow(2.0 * 3.141592653589793, -(d + 1));
}

inline PairWResult pair_w(const GridCurrent& a, const GridCurrent& b, const PairPotential& W,
                          const PairingBox& box = PairingBox{}) {
    auto pa = std::make_shared<const Step2RoughPath>(a.backing());
    auto pb = std::make_shared<const Step2RoughPath>(b.backing());
    PairWResult r;
    r.value = pair_w_modes(make_mode_evaluator(pa, 0, pa->steps()),
                           make_mode_evaluator(pb, 0, pb->steps()), a.dim(), W, box);
    r.tail_bound = pair_w_tail_bound(*pa, 0, pa->steps(), *pb, 0, pb->steps(), W, box);
    return r;
}

// --- Boundary currents -------------------------------------------------------

enum class BoundarySide { Plus, Minus };

struct FieldNormConfig {
    double alpha = 2.0;  // D_alpha exponent, > 1
    double rho = 1.0;
    NormLattice lattice;
};

struct BoundaryWindow {
    int index = 0;  // window is [index, index+1]
    std::shared_ptr<const Step2RoughPath> lift;
};

struct BoundaryEvalResult {
    double value = 0.0;
    double tail_bound = 0.0;
    // per-window |integral| vs (1+|i|)^{-alpha} ||phi||_D (1+N_i)^3; entries
    // exceeding ratio 8 are reported as violations
    std::vector<double> window_ratios;
};

class BoundaryCurrent {
public:
    BoundaryCurrent(std::vector<BoundaryWindow> windows, BoundarySide side, double alpha,
                    double gamma = 0.4)
        : windows_(std::move(windows)), side_(side), alpha_(alpha), gamma_(gamma) {
        if (!(alpha_ > 1.0)) throw std::invalid_argument("BoundaryCurrent: need alpha > 1");
        for (const auto& w : windows_) {
            if (!w.lift) throw std::invalid_argument("BoundaryCurrent: null window lift");
            if (side_ == BoundarySide::Plus && w.index < 0)
                throw std::invalid_argument("BoundaryCurrent: plus side needs indices >= 0");
        }
    }

    const std::vector<BoundaryWindow>& windows() const { return windows_; }
    BoundarySide side() const { return side_; }
    double alpha() const { return alpha_; }
    int dim() const { return windows_.empty() ? 1 : windows_.front().lift->dim(); }

    double max_window_n() const {
        double m = 0.0;
        for (const auto& w : windows_) {
            const auto& rp = *w.lift;
            m = std::max(m,
                         n_functional(rp, rp.base().t0(), rp.base().t1(), gamma_).value);
        }
        return m;
    }

    BoundaryEvalResult evaluate(const TestField& phi, const FieldNormConfig& cfg) const {
        if (windows_.empty()) throw std::invalid_argument("BoundaryCurrent: empty window list");
        BoundaryEvalResult out;
        double phi_d = field_norm_dalpha(phi, cfg.alpha, window_range_for_norm(), cfg.lattice);
        KahanSum acc;
        int kmax = 0;
        for (const auto& w : windows_) {
            const auto& rp = *w.lift;
            double v = rough_integral(rp, phi, 0, rp.steps());
            acc.add(v);
            double nw = n_functional(rp, rp.base().t0(), rp.base().t1(), gamma_).value;
            double bound = std::pow(1.0 + std::abs(static_cast<double>(w.index)), -alpha_) *
                           phi_d * std::pow(1.0 + nw, 3.0);
            out.window_ratios.push_back(bound > 0.0 ? std::abs(v) / bound : 0.0);
            kmax = std::max(kmax, std::abs(w.index));
        }
        out.value = acc.value();
        out.tail_bound = phi_d * tail_weight_alpha(alpha_, kmax) *
                         std::pow(1.0 + max_window_n(), 3.0);
        return out;
    }

private:
    int window_range_for_norm() const {
        int m = 2;
        for (const auto& w : windows_) m = std::max(m, std::abs(w.index) + 2);
        return m;
    }

    std::vector<BoundaryWindow> windows_;
    BoundarySide side_;
    double alpha_;
    double gamma_;
};

// --- The induced interaction field w^C(x,t) = C(W(x - ., t - .)) ------------

namespace fields {

// Vector field with components w_c(x,t) = sum over backing windows of the
// compensated sum of W(x - Y_u, t - u) against dY^c. Gradient and Hessian
// differentiate under the current (integrands grad W, Hess W; the area
// compensation uses one more derivative of W).
class WField final : public FieldImpl {
public:
    WField(std::vector<std::shared_ptr<const Step2RoughPath>> backings, PairPotential w,
           bool use_cache = false)
        : backings_(std::move(backings)), w_(std::move(w)), use_cache_(use_cache) {
        if (backings_.empty()) throw std::invalid_argument("WField: no backing paths");
    }

    int dim() const override { return backings_.front()->dim(); }

    void value(double t, const double* x, double* out) const override {
        if (use_cache_ && cache_lookup(t, x, out)) return;
        eval_order(0, t, x, out);
        if (use_cache_) cache_store(t, x, out);
    }
    void gradient(double t, const double* x, double* out) const override { eval_order(1, t, x, out); }
    void hessian(double t, const double* x, double* out) const override { eval_order(2, t, x, out); }

private:
    // order 0: value (d), order 1: gradient (d*d), order 2: hessian (d*d*d)
    void eval_order(int order, double t, const double* x, double* out) const {
        const int d = dim();
        std::size_t sz = static_cast<std::size_t>(d);
        for (int o = 0; o < order; ++o) sz *= d;
        for (std::size_t i = 0; i < sz; ++i) out[i] = 0.0;
        std::vector<double> dx(d), g(d), h(static_cast<std::size_t>(d) * d),
            h3(static_cast<std::size_t>(d) * d * d), area(static_cast<std::size_t>(d) * d);
        for (const auto& bp : backings_) {
            const Step2RoughPath& rp = *bp;
            for (std::size_t j = 0; j < rp.steps(); ++j) {
                double u = rp.base().time_at(j);
                const double* yj = rp.base().point(j);
                const double* yj1 = rp.base().point(j + 1);
                for (int i = 0; i < d; ++i) dx[i] = x[i] - yj[i];
                rp.area(j, j + 1, area.data());
                if (order == 0) {
                    double wv = w_(dx.data(), d, t - u);
                    w_.gradient(dx.data(), d, t - u, g.data());
                    for (int c = 0; c < d; ++c) {
                        out[c] += wv * (yj1[c] - yj[c]);
                        // d/dy_m W(x - y, ...) = -dW_m; area term of the
                        // compensated sum
                        for (int m = 0; m < d; ++m) out[c] -= g[m] * area[m * d + c];
                    }
                } else if (order == 1) {
                    w_.gradient(dx.data(), d, t - u, g.data());
                    w_.hessian(dx.data(), d, t - u, h.data());
                    for (int c = 0; c < d; ++c)
                        for (int a = 0; a < d; ++a) {
                            out[c * d + a] += g[a] * (yj1[c] - yj[c]);
                            for (int m = 0; m < d; ++m)
                                out[c * d + a] -= h[a * d + m] * area[m * d + c];
                        }
                } else {
                    w_.hessian(dx.data(), d, t - u, h.data());
                    w_.third_derivative(dx.data(), d, t - u, h3.data());
                    for (int c = 0; c < d; ++c)
                        for (int a = 0; a < d; ++a)
                            for (int b = 0; b < d; ++b) {
                                out[(c * d + a) * d + b] += h[a * d + b] * (yj1[c] - yj[c]);
                                for (int m = 0; m < d; ++m)
                                    out[(c * d + a) * d + b] -=
                                        h3[(a * d + b) * d + m] * area[m * d + c];
                            }
                }
            }
        }
    }

    bool cache_lookup(double t, const double* x, double* out) const {
        auto key = cache_key(t, x);
        std::shared_lock lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it == cache_.end()) return false;
        for (int i = 0; i < dim(); ++i) out[i] = it->second[i];
        return true;
    }
    void cache_store(double t, const double* x, const double* v) const {
        auto key = cache_key(t, x);
        std::unique_lock lock(cache_mutex_);
        cache_[key] = std::vector<double>(v, v + dim());
    }
    std::vector<long long> cache_key(double t, const double* x) const {
        std::vector<long long> k(dim() + 1);
        k[0] = static_cast<long long>(std::llround(t * 1e9));
        for (int i = 0; i < dim(); ++i)
            k[i + 1] = static_cast<long long>(std::llround(x[i] * 1e9));
        return k;
    }

    std::vector<std::shared_ptr<const Step2RoughPath>> backings_;
    PairPotential w_;
    bool use_cache_;
    mutable std::shared_mutex cache_mutex_;
    mutable std::map<std::vector<long long>, std::vector<double>> cache_;
};

} // namespace fields

inline TestField w_field(const GridCurrent& c, const PairPotential& W) {
    auto bp = std::make_shared<const Step2RoughPath>(c.backing());
    return TestField(std::make_shared<fields::WField>(
                         std::vector<std::shared_ptr<const Step2RoughPath>>{bp}, W),
                     1.0);
}

inline TestField w_field(const BoundaryCurrent& bc, const PairPotential& W) {
    std::vector<std::shared_ptr<const Step2RoughPath>> bps;
    for (const auto& w : bc.windows()) bps.push_back(w.lift);
    return TestField(std::make_shared<fields::WField>(std::move(bps), W), 1.0);
}

// Regression-fixture export: one row per (field id, s, t) evaluation.
struct CurrentEvalRow {
    std::string field_id;
    double s;
    double t;
};

inline void write_current_eval_table(const GridCurrent& c,
                                     const std::vector<std::pair<std::string, TestField>>& fields,
                                     const std::vector<std::pair<double, double>>& ranges,
                                     std::ostream& os) {
    os << "field,s,t,value\n";
    for (const auto& [id, phi] : fields)
        for (const auto& [s, t] : ranges)
            os << id << "," << format_double(s) << "," << format_double(t) << ","
               << format_double(c.evaluate(phi, s, t)) << "\n";
}

} // namespace pathgibbs
