#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pathgibbs/cluster.hpp"
#include "pathgibbs/current.hpp"
#include "pathgibbs/energy.hpp"
#include "pathgibbs/n_functional.hpp"
#include "pathgibbs/parallel.hpp"
#include "pathgibbs/potential_ext.hpp"
#include "pathgibbs/rng.hpp"
#include "pathgibbs/sampler.hpp"
#include "pathgibbs/stats.hpp"

namespace pathgibbs {

// Finite-volume Gibbs measures are realized by importance reweighting of the
// exact harmonic reference: paths are sampled from nu (stationary or bridge),
// weights are e^{-lambda W_T(X)}. The V-part is absorbed by the reference, so
// lambda = 0 reduces every operation to the reference law exactly.

struct RefNuStationary {};
struct RefNuBridge {
    std::vector<double> x;
    std::vector<double> y;
};
struct RefChiProduct {
    int n_blocks = 2;  // even
};

struct GibbsSpec {
    double T = 1.0;  // window [-T, T]
    int level = 6;   // dyadic level of the window grid
    PotentialExt ext{HarmonicRef{1}};
    PairPotential W{1.0, 1.0, 0.5};
    double lambda = 0.0;
    std::variant<RefNuStationary, RefNuBridge, RefChiProduct> reference = RefNuStationary{};
    int dim = 1;

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("GibbsSpec: need T > 0");
        if (!ext.is_harmonic()) throw std::invalid_argument("GibbsSpec: HarmonicRef required");
        if (const auto* chi = std::get_if<RefChiProduct>(&reference)) {
            if (chi->n_blocks < 2 || chi->n_blocks % 2 != 0)
                throw std::invalid_argument("GibbsSpec: chi product needs even N");
            std::size_t steps = std::size_t{1} << level;
            if (steps % static_cast<std::size_t>(chi->n_blocks) != 0)
                throw std::invalid_argument("GibbsSpec: grid does not divide into N blocks");
        }
    }

    nlohmann::json to_json() const;
    static GibbsSpec from_json(const nlohmann::json& j);
};

using PathFunctional = std::function<double(const GridPath&)>;

struct WeightedEnsemble {
    std::vector<Step2RoughPath> lifts;  // Ito lifts; base() is the path
    std::vector<double> log_weights;
    double z_hat = 1.0;
    double z_se = 0.0;
    double ess = 0.0;
    bool ess_collapsed = false;  // ESS < 0.01 n flags divergence (lambda too large)

    std::size_t size() const { return lifts.size(); }

    // normalized weights via log-sum-exp; invariant under shifting all
    // log-weights by a constant
    std::vector<double> normalized_weights() const {
        double m = -std::numeric_limits<double>::infinity();
        for (double lw : log_weights) m = std::max(m, lw);
        std::vector<double> w(log_weights.size());
        KahanSum tot;
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = std::exp(log_weights[i] - m);
            tot.add(w[i]);
        }
        double t = tot.value();
        for (auto& v : w) v /= t;
        return w;
    }

    MeanSe expectation(const PathFunctional& f) const {
        auto w = normalized_weights();
        KahanSum num;
        std::vector<double> fv(size());
        for (std::size_t i = 0; i < size(); ++i) {
            fv[i] = f(lifts[i].base());
            num.add(w[i] * fv[i]);
        }
        MeanSe out;
        out.n = size();
        out.mean = num.value();
        KahanSum varacc;
        for (std::size_t i = 0; i < size(); ++i) {
            double d = fv[i] - out.mean;
            varacc.add(w[i] * w[i] * d * d);
        }
        out.se = std::sqrt(varacc.value());
        return out;
    }
};

namespace detail {

inline void finalize_ensemble(WeightedEnsemble& e) {
    std::size_t n = e.size();
    for (double lw : e.log_weights)
        if (!std::isfinite(lw))
            throw std::runtime_error("WeightedEnsemble: non-finite log-weight");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(e.log_weights[i]);
    auto m = mean_se(w);
    e.z_hat = m.mean;
    e.z_se = m.se;
    // ESS is scale invariant; the normalized weights avoid overflow
    auto nw = e.normalized_weights();
    KahanSum sw2;
    for (double v : nw) sw2.add(v * v);
    e.ess = sw2.value() > 0.0 ? 1.0 / sw2.value() : static_cast<double>(n);
    e.ess_collapsed = e.ess < 0.01 * static_cast<double>(n);
}

} // namespace detail

// Free-boundary finite-volume measure mu_T: reference nu over [-T, T],
// weights e^{-lambda W_T}. With the shipped W the grid energy is >= 0
// pathwise, so Z_hat <= 1 for lambda > 0 and Z_hat = 1 exactly at lambda = 0.
inline WeightedEnsemble sample_mu_T(const GibbsSpec& spec, std::size_t n_paths,
                                    std::uint64_t seed, int workers = 1) {
    spec.validate();
    if (n_paths < 100) throw std::invalid_argument("sample_mu_T: need n_paths >= 100");
    WeightedEnsemble e;
    e.lifts.reserve(n_paths);
    e.log_weights.assign(n_paths, 0.0);
    std::vector<GridPath> paths(n_paths, GridPath(-spec.T, spec.T, spec.level, spec.dim));
    parallel_for(n_paths, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        if (std::holds_alternative<RefNuStationary>(spec.reference)) {
            PathLawSpec s;
            s.law = LawOU{true, {}};
            s.t0 = -spec.T;
            s.t1 = spec.T;
            s.level = spec.level;
            s.dim = spec.dim;
            paths[i] = sample(s, rng);
        } else if (const auto* br = std::get_if<RefNuBridge>(&spec.reference)) {
            paths[i] = sample_ou_bridge(br->x, br->y, -spec.T, spec.T, spec.level, rng);
        } else {
            throw std::invalid_argument("sample_mu_T: chi reference belongs to the cluster module");
        }
        if (spec.lambda != 0.0)
            e.log_weights[i] = -spec.lambda * w_energy(view_of(paths[i]), spec.W, 0,
                                                       paths[i].steps());
    });
    for (std::size_t i = 0; i < n_paths; ++i)
        e.lifts.emplace_back(std::move(paths[i]), LiftScheme::ItoLift);
    detail::finalize_ensemble(e);
    return e;
}

// Allowed boundary condition: lifted outside paths on both sides with an
// N_alpha cap (membership in Xi_a).
struct BoundaryCondition {
    BoundaryCurrent minus;
    BoundaryCurrent plus;
    double a_cap = 0.0;
    double alpha = 2.0;
    double n_alpha_estimate = 0.0;

    BoundaryCondition(BoundaryCurrent m, BoundaryCurrent p, double cap, double alpha_in = 2.0,
                      double gamma = 0.4)
        : minus(std::move(m)), plus(std::move(p)), a_cap(cap), alpha(alpha_in) {
        if (minus.side() != BoundarySide::Minus || plus.side() != BoundarySide::Plus)
            throw std::invalid_argument("BoundaryCondition: sides mismatch");
        std::vector<std::pair<int, NFunctional>> windows;
        for (const auto* bc : {&minus, &plus})
            for (const auto& w : bc->windows()) {
                const auto& rp = *w.lift;
                windows.push_back(
                    {w.index, n_functional(rp, rp.base().t0(), rp.base().t1(), gamma)});
            }
        n_alpha_estimate = cal_n(windows, alpha, 3.0).value;
        if (n_alpha_estimate > a_cap)
            throw std::invalid_argument("BoundaryCondition: N_alpha estimate exceeds the cap a");
    }

    // boundary value of Y at -T: minus windows sit left of -T, so the window
    // ending latest carries it as its final point
    std::vector<double> value_at_minus_T() const {
        const auto& ws = minus.windows();
        const auto* last = ws.front().lift.get();
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& w : ws)
            if (w.lift->base().t1() > best) {
                best = w.lift->base().t1();
                last = w.lift.get();
            }
        const GridPath& p = last->base();
        std::vector<double> v(p.dim());
        for (int i = 0; i < p.dim(); ++i) v[i] = p.at(p.steps(), i);
        return v;
    }

    std::vector<double> value_at_plus_T() const {
        const auto& ws = plus.windows();
        const auto* first = ws.front().lift.get();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : ws)
            if (w.lift->base().t0() < best) {
                best = w.lift->base().t0();
                first = w.lift.get();
            }
        const GridPath& p = first->base();
        std::vector<double> v(p.dim());
        for (int i = 0; i < p.dim(); ++i) v[i] = p.at(0, i);
        return v;
    }
};

// Cross energy of an inner path against every boundary window:
// sum over windows of sum_a sum_b (dX_a . dY_b) W(X_a - Y_b, t_a - t_b).
inline double boundary_cross_energy(const GridPath& inner, const BoundaryCondition& bc,
                                    const PairPotential& W) {
    KahanSum acc;
    for (const auto* side : {&bc.minus, &bc.plus})
        for (const auto& w : side->windows())
            acc.add(w_cross_energy(inner, w.lift->base(), W));
    return acc.value();
}

struct SpecificationEnsemble {
    WeightedEnsemble ensemble;
    MeanSe internal_energy;  // W_I(X) under the reference
    MeanSe boundary_energy;  // cross term under the reference
};

// Specification kernel rho_I(.|Y): nu-bridge reference pinned at Y's values
// at -T and T, weights e^{-lambda W_I(X) - lambda int w^{C_Y} dX}. The two
// energy components are reported separately.
inline SpecificationEnsemble specification_kernel(const GibbsSpec& spec,
                                                  const BoundaryCondition& bc,
                                                  std::size_t n_paths, std::uint64_t seed,
                                                  int workers = 1) {
    spec.validate();
    SpecificationEnsemble out;
    WeightedEnsemble& e = out.ensemble;
    e.log_weights.assign(n_paths, 0.0);
    std::vector<GridPath> paths(n_paths, GridPath(-spec.T, spec.T, spec.level, spec.dim));
    std::vector<double> win(n_paths, 0.0), wcross(n_paths, 0.0);
    auto x = bc.value_at_minus_T();
    auto y = bc.value_at_plus_T();
    parallel_for(n_paths, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        paths[i] = sample_ou_bridge(x, y, -spec.T, spec.T, spec.level, rng);
        if (spec.lambda != 0.0) {
            win[i] = w_energy(view_of(paths[i]), spec.W, 0, paths[i].steps());
            wcross[i] = boundary_cross_energy(paths[i], bc, spec.W);
            e.log_weights[i] = -spec.lambda * (win[i] + wcross[i]);
        }
    });
    e.lifts.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        e.lifts.emplace_back(std::move(paths[i]), LiftScheme::ItoLift);
    detail::finalize_ensemble(e);
    out.internal_energy = mean_se(win);
    out.boundary_energy = mean_se(wcross);
    return out;
}

// --- DLR consistency at desk scale ---------------------------------------------

struct DlrReport {
    double lhs = 0.0;       // composed kernels, normalized (display)
    double rhs = 0.0;       // direct expectation, normalized (display)
    double statistic = 0.0; // unbiased paired difference (gated quantity)
    double se = 0.0;        // SE of the paired statistic
    bool pass = false;
};

// Checks int rho_I(.|Y) rho_J(dY) = rho_J(.) for F measurable on
// I = [-T_I, T_I] inside J = [-T, T]. The gated statistic is the exactly
// unbiased unnormalized pairing
//   d_i = u(Y_i) * mean_q [ w(X_q, Y_i) (F(X_q) - F(Y_i)) ],
// whose chi expectation vanishes identically under consistency (the inner
// normalizer cancels against the outer weight in both terms); PASS at 3 SE.
inline DlrReport dlr_consistency_check(const GibbsSpec& spec, double t_inner,
                                       const PathFunctional& f, std::size_t n_outer,
                                       std::size_t m_inner, std::uint64_t seed,
                                       int workers = 1) {
    spec.validate();
    if (!(t_inner > 0.0 && t_inner < spec.T))
        throw std::invalid_argument("dlr_consistency_check: need 0 < T_I < T");
    GridPath probe(-spec.T, spec.T, spec.level, spec.dim);
    std::size_t ia = probe.index_of_time(-t_inner);
    std::size_t ib = probe.index_of_time(t_inner);
    int inner_level = 0;
    while ((std::size_t{1} << inner_level) < ib - ia) ++inner_level;
    if ((std::size_t{1} << inner_level) != ib - ia)
        throw std::invalid_argument("dlr_consistency_check: inner window not dyadic on the grid");

    std::vector<double> stats(n_outer), weights(n_outer), rhs_vals(n_outer), lhs_vals(n_outer);
    parallel_for(n_outer, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        PathLawSpec s;
        s.law = LawOU{true, {}};
        s.t0 = -spec.T;
        s.t1 = spec.T;
        s.level = spec.level;
        s.dim = spec.dim;
        GridPath outer = sample(s, rng);
        double u = spec.lambda != 0.0
                       ? std::exp(-spec.lambda *
                                  w_energy(view_of(outer), spec.W, 0, outer.steps()))
                       : 1.0;
        double f_direct = f(outer);

        // inner kernel: nu-bridge through Y's values at the inner boundary,
        // reweighted by the inner + cross energies
        std::vector<double> xa(spec.dim), xb(spec.dim);
        for (int c = 0; c < spec.dim; ++c) {
            xa[c] = outer.at(ia, c);
            xb[c] = outer.at(ib, c);
        }
        KahanSum num, den;
        for (std::size_t q = 0; q < m_inner; ++q) {
            RngStream rng_in(seed ^ 0x5bd1e995u, i * m_inner + q);
            GridPath inner =
                sample_ou_bridge(xa, xb, -t_inner, t_inner, inner_level, rng_in);
            double lw = 0.0;
            if (spec.lambda != 0.0) {
                double wi = w_energy(view_of(inner), spec.W, 0, inner.steps());
                double cross = w_cross_energy(view_of(inner), 0, inner.steps(),
                                              view_of(outer), 0, ia, spec.W) +
                               w_cross_energy(view_of(inner), 0, inner.steps(),
                                              view_of(outer), ib, outer.steps(), spec.W);
                lw = -spec.lambda * (wi + cross);
            }
            double wq = std::exp(lw);
            num.add(wq * f(inner));
            den.add(wq);
        }
        double m = static_cast<double>(m_inner);
        weights[i] = u;
        rhs_vals[i] = f_direct;
        lhs_vals[i] = num.value() / den.value();
        stats[i] = u * (num.value() / m - (den.value() / m) * f_direct);
    });

    DlrReport rep;
    auto ms = mean_se(stats);
    rep.statistic = ms.mean;
    rep.se = ms.se;
    KahanSum sw, swl, swr;
    for (std::size_t i = 0; i < n_outer; ++i) {
        sw.add(weights[i]);
        swl.add(weights[i] * lhs_vals[i]);
        swr.add(weights[i] * rhs_vals[i]);
    }
    rep.lhs = swl.value() / sw.value();
    rep.rhs = swr.value() / sw.value();
    rep.pass = std::abs(rep.statistic) <= 3.0 * std::max(rep.se, 1e-15);
    return rep;
}

// --- Growth diagnostic -----------------------------------------------------------

struct GrowthReport {
    std::vector<int> window_index;       // n for windows [n, n+1]
    std::vector<double> window_quantile; // q-quantile of max |X|
    double fit_slope = 0.0;              // vs (log n)^{1/(s+1)}
    double fit_r2 = 0.0;
    std::vector<double> tail_levels;     // thresholds a
    std::vector<double> tail_log_prob;   // log P(max >= a)
    double tail_slope = 0.0;             // vs a^{s+1}
    double tail_r2 = 0.0;
};

// Stationary-window growth statistics for the reference diffusion: per-window
// q-quantiles of max |X| regressed on (log n)^{1/(s+1)} (s = 2 for the
// harmonic family), plus the pooled tail P(max >= a) regressed on a^{s+1}.
inline GrowthReport growth_diagnostic(int n_windows_max, std::size_t paths_per_window,
                                      int level, double q, const std::vector<double>& tail_levels,
                                      std::uint64_t seed, int workers = 1, double s_exponent = 2.0) {
    if (n_windows_max < 2) throw std::invalid_argument("growth_diagnostic: too few windows");
    GrowthReport rep;
    std::vector<double> xs, ys;
    std::vector<std::size_t> tail_hits(tail_levels.size(), 0);
    std::size_t tail_total = 0;

    std::vector<std::vector<double>> maxima(n_windows_max);
    parallel_for(static_cast<std::size_t>(n_windows_max), workers, [&](std::size_t wi) {
        int n = static_cast<int>(wi) + 1;
        std::vector<double> ms(paths_per_window);
        for (std::size_t p = 0; p < paths_per_window; ++p) {
            PathLawSpec spec;
            spec.law = LawOU{true, {}};
            spec.t0 = static_cast<double>(n);
            spec.t1 = static_cast<double>(n + 1);
            spec.level = level;
            spec.dim = 1;
            RngStream rng(seed + wi, p);
            auto path = sample(spec, rng);
            double m = 0.0;
            for (std::size_t k = 0; k <= path.steps(); ++k)
                m = std::max(m, std::abs(path.at(k, 0)));
            ms[p] = m;
        }
        maxima[wi] = std::move(ms);
    });
    for (int n = 1; n <= n_windows_max; ++n) {
        const auto& ms = maxima[n - 1];
        double mq = quantile(ms, q);
        rep.window_index.push_back(n);
        rep.window_quantile.push_back(mq);
        xs.push_back(std::pow(std::log(static_cast<double>(n) + 1.0),
                              1.0 / (s_exponent + 1.0)));
        ys.push_back(mq);
        for (std::size_t t = 0; t < tail_levels.size(); ++t)
            for (double m : ms)
                if (m >= tail_levels[t]) ++tail_hits[t];
        tail_total += ms.size();
    }
    auto fit = linear_fit(xs, ys);
    rep.fit_slope = fit.slope;
    rep.fit_r2 = fit.r2;

    rep.tail_levels = tail_levels;
    std::vector<double> txs, tys;
    for (std::size_t t = 0; t < tail_levels.size(); ++t) {
        double p = static_cast<double>(tail_hits[t]) / static_cast<double>(tail_total);
        rep.tail_log_prob.push_back(std::log(std::max(p, 1e-300)));
        txs.push_back(std::pow(tail_levels[t], s_exponent + 1.0));
        tys.push_back(rep.tail_log_prob.back());
    }
    if (txs.size() >= 2) {
        auto tfit = linear_fit(txs, tys);
        rep.tail_slope = tfit.slope;
        rep.tail_r2 = tfit.r2;
    }
    return rep;
}

// --- Mixing diagnostic -------------------------------------------------------------

struct MixingRow {
    int separation = 0;
    double cov_median = 0.0;  // median over batches of |cov|
    double cov_mean = 0.0;
    double cov_se = 0.0;
};

struct MixingReport {
    std::vector<MixingRow> rows;
    bool nonincreasing = false;
    double theta_hat = 0.0;  // power-law fit of |cov| vs separation
};

// Covariance decay of window observables under mu_T over [0, window_span]:
// F = X(center of tau_0), G = X(center of tau_{sep}); weighted covariance per
// batch, medians per separation.
inline MixingReport mixing_diagnostic(double lambda, const PairPotential& W,
                                      const std::vector<int>& separations, int window_span,
                                      int level_per_unit, std::size_t n_batches,
                                      std::size_t batch_size, std::uint64_t seed,
                                      int workers = 1) {
    int span_pow2 = 1;
    int total_level = level_per_unit;
    while (span_pow2 < window_span) {
        span_pow2 *= 2;
        ++total_level;
    }
    if (span_pow2 != window_span)
        throw std::invalid_argument("mixing_diagnostic: window span must be a power of two");

    MixingReport rep;
    std::vector<std::vector<double>> abs_covs(separations.size());
    std::vector<std::vector<double>> covs(separations.size());

    // window observables at every integer translate; per batch the covariance
    // at separation s is averaged over the translates that fit, which cuts
    // estimator variance at fixed path count (stationary reference)
    int n_centers = window_span;  // centers at 0.5, 1.5, ..., span - 0.5

    std::vector<std::vector<double>> batch_cov(n_batches,
                                               std::vector<double>(separations.size(), 0.0));
    parallel_for(n_batches, workers, [&](std::size_t bi) {
        GridPath probe(0.0, static_cast<double>(window_span), total_level, 1);
        std::vector<std::size_t> centers(n_centers);
        for (int c = 0; c < n_centers; ++c) centers[c] = probe.index_of_time(0.5 + c);

        std::vector<std::vector<double>> vals(n_centers, std::vector<double>(batch_size));
        std::vector<double> w(batch_size, 1.0);
        for (std::size_t p = 0; p < batch_size; ++p) {
            PathLawSpec spec;
            spec.law = LawOU{true, {}};
            spec.t0 = 0.0;
            spec.t1 = static_cast<double>(window_span);
            spec.level = total_level;
            spec.dim = 1;
            RngStream rng(seed, bi * batch_size + p);
            auto path = sample(spec, rng);
            if (lambda != 0.0)
                w[p] = std::exp(-lambda * w_energy(view_of(path), W, 0, path.steps()));
            for (int c = 0; c < n_centers; ++c) vals[c][p] = path.at(centers[c], 0);
        }
        KahanSum sw;
        for (double v : w) sw.add(v);
        double tw = sw.value();
        std::vector<double> means(n_centers);
        for (int c = 0; c < n_centers; ++c) {
            KahanSum macc;
            for (std::size_t p = 0; p < batch_size; ++p) macc.add(w[p] * vals[c][p]);
            means[c] = macc.value() / tw;
        }
        for (std::size_t s = 0; s < separations.size(); ++s) {
            int sep = separations[s];
            KahanSum cacc;
            int translates = 0;
            for (int c = 0; c + sep < n_centers; ++c, ++translates) {
                KahanSum one;
                for (std::size_t p = 0; p < batch_size; ++p)
                    one.add(w[p] * (vals[c][p] - means[c]) * (vals[c + sep][p] - means[c + sep]));
                cacc.add(one.value() / tw);
            }
            batch_cov[bi][s] = cacc.value() / std::max(1, translates);
        }
    });
    for (std::size_t s = 0; s < separations.size(); ++s)
        for (std::size_t bi = 0; bi < n_batches; ++bi) {
            covs[s].push_back(batch_cov[bi][s]);
            abs_covs[s].push_back(std::abs(batch_cov[bi][s]));
        }

    std::vector<double> lx, ly;
    bool mono = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < separations.size(); ++s) {
        MixingRow row;
        row.separation = separations[s];
        row.cov_median = median(abs_covs[s]);
        auto m = mean_se(covs[s]);
        row.cov_mean = m.mean;
        row.cov_se = m.se;
        rep.rows.push_back(row);
        if (row.cov_median > prev) mono = false;
        prev = row.cov_median;
        if (row.cov_median > 0.0) {
            lx.push_back(std::log(static_cast<double>(row.separation)));
            ly.push_back(std::log(row.cov_median));
        }
    }
    rep.nonincreasing = mono;
    if (lx.size() >= 2) rep.theta_hat = -linear_fit(lx, ly).slope;
    return rep;
}

// --- JSON ----------------------------------------------------------------------------

inline nlohmann::json GibbsSpec::to_json() const {
    nlohmann::json j;
    j["T"] = T;
    j["level"] = level;
    j["dim"] = dim;
    j["lambda"] = lambda;
    j["ext"] = ext.to_json();
    j["W"] = W.to_json();
    if (std::holds_alternative<RefNuStationary>(reference)) {
        j["reference"] = {{"kind", "nu_stationary"}};
    } else if (const auto* br = std::get_if<RefNuBridge>(&reference)) {
        j["reference"] = {{"kind", "nu_bridge"}, {"x", br->x}, {"y", br->y}};
    } else {
        j["reference"] = {{"kind", "chi_product"},
                          {"N", std::get<RefChiProduct>(reference).n_blocks}};
    }
    return j;
}

inline GibbsSpec GibbsSpec::from_json(const nlohmann::json& j) {
    GibbsSpec s;
    s.T = j.at("T").get<double>();
    s.level = j.at("level").get<int>();
    s.dim = j.at("dim").get<int>();
    s.lambda = j.at("lambda").get<double>();
    s.ext = PotentialExt::from_json(j.at("ext"));
    s.W = PairPotential::from_json(j.at("W"));
    std::string kind = j.at("reference").at("kind").get<std::string>();
    if (kind == "nu_stationary")
        s.reference = RefNuStationary{};
    else if (kind == "nu_bridge")
        s.reference = RefNuBridge{j.at("reference").at("x").get<std::vector<double>>(),
                                  j.at("reference").at("y").get<std::vector<double>>()};
    else if (kind == "chi_product")
        s.reference = RefChiProduct{j.at("reference").at("N").get<int>()};
    else
        throw std::invalid_argument("GibbsSpec: unknown reference kind " + kind);
    s.validate();
    return s;
}

} // namespace pathgibbs
