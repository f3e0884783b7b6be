#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathgibbs/energy.hpp"
#include "pathgibbs/io.hpp"
#include "pathgibbs/pair_potential.hpp"
#include "pathgibbs/parallel.hpp"
#include "pathgibbs/potential_ext.hpp"
#include "pathgibbs/rng.hpp"
#include "pathgibbs/sampler.hpp"
#include "pathgibbs/stats.hpp"

namespace pathgibbs {

// Uniform division of [-T, T] into N intervals tau_k = (t_k, t_{k+1}) of
// length b = 2T/N; N is even so the origin is a timepoint.
struct Partition1D {
    double T = 1.0;
    int N = 2;

    Partition1D(double half_window, int n) : T(half_window), N(n) {
        if (!(T > 0.0)) throw std::invalid_argument("Partition1D: need T > 0");
        if (N < 2 || N % 2 != 0) throw std::invalid_argument("Partition1D: N must be even, >= 2");
    }
    double b() const { return 2.0 * T / static_cast<double>(N); }
    double timepoint(int k) const { return -T + static_cast<double>(k) * b(); }
    int origin_timepoint() const { return N / 2; }
};

// Interval pairs, contours, chains and clusters are all index combinatorics
// over tau_0..tau_{N-1}; interval sets and timepoint sets are bitmasks
// (intervals: bit k = tau_k; timepoints: bit k = t_k, k = 0..N).
using Mask = std::uint32_t;

inline Mask interval_timepoints(Mask intervals) {
    return intervals | (intervals << 1);
}

struct IntervalPair {
    int i = 0;
    int j = 0;  // i < j
    Mask intervals() const { return (Mask{1} << i) | (Mask{1} << j); }
};

// Connected set of interval pairs ("connected" = consecutive pairs share an
// interval, transitively). Maximality is a property of decompositions, not of
// the type.
struct Contour {
    std::vector<IntervalPair> pairs;

    Mask intervals() const {
        Mask m = 0;
        for (const auto& p : pairs) m |= p.intervals();
        return m;
    }
    Mask timepoints() const { return interval_timepoints(intervals()); }

    bool connected() const {
        if (pairs.empty()) return false;
        std::vector<bool> seen(pairs.size(), false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t reached = 1;
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < pairs.size(); ++q)
                if (!seen[q] && (pairs[cur].intervals() & pairs[q].intervals())) {
                    seen[q] = true;
                    stack.push_back(q);
                    ++reached;
                }
        }
        return reached == pairs.size();
    }
};

// Run of consecutive intervals tau_start .. tau_{start+len-1}.
struct Chain {
    int start = 0;
    int len = 1;

    Mask intervals() const {
        Mask m = 0;
        for (int k = 0; k < len; ++k) m |= Mask{1} << (start + k);
        return m;
    }
    Mask timepoints() const { return interval_timepoints(intervals()); }
    int boundary_minus() const { return start; }
    int boundary_plus() const { return start + len; }
};

struct Cluster {
    std::vector<Contour> contours;
    std::vector<Chain> chains;

    Mask intervals() const {
        Mask m = 0;
        for (const auto& c : contours) m |= c.intervals();
        for (const auto& c : chains) m |= c.intervals();
        return m;
    }
    Mask timepoints() const {
        Mask m = 0;
        for (const auto& c : contours) m |= c.timepoints();
        for (const auto& c : chains) m |= c.timepoints();
        return m;
    }
    int weight() const { return std::popcount(intervals()); }

    nlohmann::json to_json() const;
    static Cluster from_json(const nlohmann::json& j);
    std::string id() const { return to_json().dump(); }
};

// The four cluster invariants: contours pairwise interval-disjoint (and each
// individually connected), chains pairwise timepoint-disjoint, the union of
// the timepoint sets connected, and chain endpoints inside the contour
// timepoints ("no loose ends").
struct ClusterValidation {
    bool contours_ok = false;
    bool chains_ok = false;
    bool connected = false;
    bool no_loose_ends = false;
    bool ok() const { return contours_ok && chains_ok && connected && no_loose_ends; }
};

inline ClusterValidation validate_cluster(const Cluster& g, int N) {
    ClusterValidation v;
    v.contours_ok = !g.contours.empty();
    Mask contour_iv = 0;
    for (const auto& c : g.contours) {
        if (!c.connected()) v.contours_ok = false;
        for (const auto& p : c.pairs)
            if (!(0 <= p.i && p.i < p.j && p.j < N)) v.contours_ok = false;
        if (contour_iv & c.intervals()) v.contours_ok = false;
        contour_iv |= c.intervals();
    }
    v.chains_ok = true;
    Mask chain_tp = 0;
    for (const auto& c : g.chains) {
        if (c.start < 0 || c.len < 1 || c.start + c.len > N) v.chains_ok = false;
        if (chain_tp & c.timepoints()) v.chains_ok = false;
        chain_tp |= c.timepoints();
    }

    // connectivity of the collection of timepoint sets
    std::vector<Mask> parts;
    for (const auto& c : g.contours) parts.push_back(c.timepoints());
    for (const auto& c : g.chains) parts.push_back(c.timepoints());
    if (parts.empty()) {
        v.connected = false;
    } else {
        std::vector<bool> seen(parts.size(), false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t reached = 1;
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < parts.size(); ++q)
                if (!seen[q] && (parts[cur] & parts[q])) {
                    seen[q] = true;
                    stack.push_back(q);
                    ++reached;
                }
        }
        v.connected = reached == parts.size();
    }

    Mask gamma_star = 0;
    for (const auto& c : g.contours) gamma_star |= c.timepoints();
    v.no_loose_ends = true;
    for (const auto& c : g.chains) {
        if (!((gamma_star >> c.boundary_minus()) & 1)) v.no_loose_ends = false;
        if (!((gamma_star >> c.boundary_plus()) & 1)) v.no_loose_ends = false;
    }
    return v;
}

// --- (R, S) decomposition ----------------------------------------------------

// A pair set R and interval set S regroup into connected components; each
// component is either a valid cluster or carries a chain with a loose end
// (those have zero chi-expectation and are discarded from cluster sums).
struct RSComponent {
    Cluster cluster;
    bool loose_end = false;
};

inline std::vector<Chain> runs_of(Mask s, int N) {
    std::vector<Chain> chains;
    int k = 0;
    while (k < N) {
        if ((s >> k) & 1) {
            int start = k;
            while (k < N && ((s >> k) & 1)) ++k;
            chains.push_back(Chain{start, k - start});
        } else {
            ++k;
        }
    }
    return chains;
}

inline std::vector<RSComponent> decompose_R_S(const std::vector<IntervalPair>& R, Mask S, int N) {
    for (const auto& p : R)
        if (!(0 <= p.i && p.i < p.j && p.j < N))
            throw std::invalid_argument("decompose_R_S: pair out of range");
    if (S >> N) throw std::invalid_argument("decompose_R_S: interval set out of range");

    // contours: components of R under the shared-interval relation
    std::vector<Contour> contours;
    std::vector<bool> used(R.size(), false);
    for (std::size_t seed = 0; seed < R.size(); ++seed) {
        if (used[seed]) continue;
        Contour c;
        std::vector<std::size_t> stack{seed};
        used[seed] = true;
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            c.pairs.push_back(R[cur]);
            for (std::size_t q = 0; q < R.size(); ++q)
                if (!used[q] && (R[q].intervals() & R[cur].intervals())) {
                    used[q] = true;
                    stack.push_back(q);
                }
        }
        std::sort(c.pairs.begin(), c.pairs.end(), [](const IntervalPair& a, const IntervalPair& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        contours.push_back(std::move(c));
    }
    std::vector<Chain> chains = runs_of(S, N);

    // group contours and chains into components by shared timepoints
    std::size_t total = contours.size() + chains.size();
    std::vector<Mask> tps(total);
    for (std::size_t i = 0; i < contours.size(); ++i) tps[i] = contours[i].timepoints();
    for (std::size_t i = 0; i < chains.size(); ++i) tps[contours.size() + i] = chains[i].timepoints();

    std::vector<int> comp(total, -1);
    int ncomp = 0;
    for (std::size_t seed = 0; seed < total; ++seed) {
        if (comp[seed] >= 0) continue;
        std::vector<std::size_t> stack{seed};
        comp[seed] = ncomp;
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < total; ++q)
                if (comp[q] < 0 && (tps[cur] & tps[q])) {
                    comp[q] = ncomp;
                    stack.push_back(q);
                }
        }
        ++ncomp;
    }

    std::vector<RSComponent> out(ncomp);
    for (std::size_t i = 0; i < contours.size(); ++i)
        out[comp[i]].cluster.contours.push_back(contours[i]);
    for (std::size_t i = 0; i < chains.size(); ++i)
        out[comp[contours.size() + i]].cluster.chains.push_back(chains[i]);
    for (auto& c : out) {
        Mask gamma_star = 0;
        for (const auto& ct : c.cluster.contours) gamma_star |= ct.timepoints();
        for (const auto& ch : c.cluster.chains)
            if (!((gamma_star >> ch.boundary_minus()) & 1) ||
                !((gamma_star >> ch.boundary_plus()) & 1))
                c.loose_end = true;
        if (c.cluster.contours.empty()) c.loose_end = true;
    }
    return out;
}

// Reassemble a decomposition back into (R, S); inverse of decompose_R_S.
inline std::pair<std::vector<IntervalPair>, Mask> reassemble_R_S(
    const std::vector<RSComponent>& comps) {
    std::vector<IntervalPair> R;
    Mask S = 0;
    for (const auto& c : comps) {
        for (const auto& ct : c.cluster.contours)
            R.insert(R.end(), ct.pairs.begin(), ct.pairs.end());
        for (const auto& ch : c.cluster.chains) S |= ch.intervals();
    }
    std::sort(R.begin(), R.end(), [](const IntervalPair& a, const IntervalPair& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return {R, S};
}

// --- Exhaustive enumeration ---------------------------------------------------

inline constexpr int kMaxExhaustiveN = 8;
inline constexpr int kMaxExhaustiveWeight = 6;

// All valid clusters with |intervals| <= max_weight, duplicate-free. A cluster
// is identified with the pair (R, S) where R is the union of its contour
// pairs and S the union of its chain intervals; enumeration walks exactly
// those (R, S) whose decomposition is a single loose-end-free component.
inline std::vector<Cluster> enumerate_clusters(const Partition1D& part, int max_weight) {
    const int N = part.N;
    if (N > kMaxExhaustiveN)
        throw std::invalid_argument("enumerate_clusters: exhaustive regime capped at N = 8");
    if (max_weight > kMaxExhaustiveWeight)
        throw std::invalid_argument("enumerate_clusters: exhaustive regime capped at weight 6");

    std::vector<IntervalPair> all_pairs;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) all_pairs.push_back({i, j});

    std::vector<Cluster> out;
    std::vector<IntervalPair> chosen;

    std::function<void(std::size_t, Mask)> rec = [&](std::size_t next, Mask iv) {
        if (!chosen.empty()) {
            // extend with every chain set compatible with the weight budget
            for (Mask s = 0; s < (Mask{1} << N); ++s) {
                Mask all_iv = iv | s;
                if (std::popcount(all_iv) > max_weight) continue;
                auto comps = decompose_R_S(chosen, s, N);
                if (comps.size() != 1 || comps.front().loose_end) continue;
                out.push_back(comps.front().cluster);
            }
        }
        for (std::size_t p = next; p < all_pairs.size(); ++p) {
            Mask niv = iv | all_pairs[p].intervals();
            if (std::popcount(niv) > max_weight) continue;
            chosen.push_back(all_pairs[p]);
            rec(p + 1, niv);
            chosen.pop_back();
        }
    };
    rec(0, 0);
    return out;
}

// --- chi sampling and activities ----------------------------------------------

// One configuration under the auxiliary product measure chi: endpoints
// x_0..x_N iid omega = N(0, I/2), segments independent nu-bridges.
struct ChiSample {
    std::vector<std::vector<double>> endpoints;  // N+1 points of dimension d
    std::vector<GridPath> segments;              // N paths, tau_k
};

inline ChiSample sample_chi(const Partition1D& part, int level, int dim, RngStream& rng) {
    ChiSample s;
    double sd0 = std::sqrt(0.5);
    s.endpoints.resize(part.N + 1);
    for (int k = 0; k <= part.N; ++k) {
        s.endpoints[k].resize(dim);
        for (int i = 0; i < dim; ++i) s.endpoints[k][i] = sd0 * rng.next_gaussian();
    }
    for (int k = 0; k < part.N; ++k)
        s.segments.push_back(sample_ou_bridge(s.endpoints[k], s.endpoints[k + 1],
                                              part.timepoint(k), part.timepoint(k + 1), level,
                                              rng));
    return s;
}

// Rectangle sums between segments, computed on demand and memoized; also the
// pi_b(x_{k+1}, x_k) - 1 chain link factors.
class ChiPairTable {
public:
    ChiPairTable(const ChiSample& sample, const PairPotential& W, const HarmonicRef& ext,
                 double b)
        : sample_(&sample), w_(&W), ext_(ext), b_(b),
          n_(static_cast<int>(sample.segments.size())),
          s_(static_cast<std::size_t>(n_) * n_, 0.0),
          have_(static_cast<std::size_t>(n_) * n_, false) {}

    // S_ij = sum_{a in tau_i} sum_{b in tau_j} (dX_a . dX_b) W(X_a - X_b, t_a - t_b)
    double rect(int i, int j) const {
        std::size_t idx = static_cast<std::size_t>(i) * n_ + j;
        if (!have_[idx]) {
            const GridPath& pi = sample_->segments[i];
            const GridPath& pj = sample_->segments[j];
            double v = w_cross_energy(view_of(pi), 0, pi.steps(), view_of(pj), 0, pj.steps(), *w_);
            s_[idx] = v;
            have_[idx] = true;
            std::size_t jdx = static_cast<std::size_t>(j) * n_ + i;
            s_[jdx] = v;  // W even in both arguments
            have_[jdx] = true;
        }
        return s_[idx];
    }

    // W_{tau_i,tau_j} with the diagonal allocation of the decomposition
    // identity (see w_pair_energy).
    double pair_energy(int i, int j) const {
        double v = rect(i, j);
        if (j - i == 1) {
            v += 0.25 * (rect(i, i) + rect(j, j));
            if (i == 0) v += 0.25 * rect(0, 0);
            if (j == n_ - 1) v += 0.25 * rect(n_ - 1, n_ - 1);
        }
        return v;
    }

    double chain_link(int k) const {
        return mehler_pi(ext_, b_, sample_->endpoints[k + 1].data(),
                         sample_->endpoints[k].data()) -
               1.0;
    }

private:
    const ChiSample* sample_;
    const PairPotential* w_;
    HarmonicRef ext_;
    double b_;
    int n_;
    mutable std::vector<double> s_;
    mutable std::vector<bool> have_;
};

// kappa_Gamma = prod over contour pairs (e^{-lambda W_{tau_i,tau_j}} - 1)
//             * prod over chain links (pi_b(x_{k+1}, x_k) - 1).
// Touches only the segments and endpoints of the cluster.
inline double kappa_eval(const Cluster& g, const ChiPairTable& table, double lambda) {
    double prod = 1.0;
    for (const auto& c : g.contours)
        for (const auto& p : c.pairs)
            prod *= std::expm1(-lambda * table.pair_energy(p.i, p.j));
    for (const auto& c : g.chains)
        for (int k = c.start; k < c.start + c.len; ++k) prod *= table.chain_link(k);
    return prod;
}

inline double kappa_eval(const Cluster& g, const ChiSample& sample, const PairPotential& W,
                         double lambda, const HarmonicRef& ext, double b) {
    int n = static_cast<int>(sample.segments.size());
    if (g.intervals() >> n)
        throw std::invalid_argument("kappa_eval: cluster touches segments missing in the sample");
    ChiPairTable table(sample, W, ext, b);
    return kappa_eval(g, table, lambda);
}

struct ActivityEstimate {
    Cluster cluster;
    double k_hat = 0.0;
    double se = 0.0;
    std::size_t n_samples = 0;
};

struct ChiSpec {
    Partition1D part;
    int level = 4;  // per-segment dyadic level
    int dim = 1;
    PairPotential W;
    double lambda = 0.0;
};

inline ActivityEstimate estimate_activity(const Cluster& g, const ChiSpec& spec,
                                          std::size_t n_samples, std::uint64_t seed,
                                          bool bypass_validator = false) {
    if (!bypass_validator && !validate_cluster(g, spec.part.N).ok())
        throw std::invalid_argument("estimate_activity: invalid cluster (no bypass requested)");
    HarmonicRef ext{spec.dim};
    std::vector<double> vals(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        RngStream rng(seed, s);
        ChiSample cs = sample_chi(spec.part, spec.level, spec.dim, rng);
        vals[s] = kappa_eval(g, cs, spec.W, spec.lambda, ext, spec.part.b());
    }
    auto m = mean_se(vals);
    return ActivityEstimate{g, m.mean, m.se, n_samples};
}

// Shared-sample batch estimation: one chi draw serves every cluster, and the
// per-sample total sum_Gamma kappa_Gamma is returned for identity checks.
struct SharedActivityResult {
    std::vector<ActivityEstimate> activities;
    MeanSe kappa_total;  // mean/se of sum over clusters of kappa per sample
};

inline SharedActivityResult estimate_activities_shared(const std::vector<Cluster>& clusters,
                                                       const ChiSpec& spec, std::size_t n_samples,
                                                       std::uint64_t seed, int workers = 1) {
    HarmonicRef ext{spec.dim};
    std::vector<std::vector<double>> vals(clusters.size(), std::vector<double>(n_samples));
    std::vector<double> totals(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t s) {
        RngStream rng(seed, s);
        ChiSample cs = sample_chi(spec.part, spec.level, spec.dim, rng);
        ChiPairTable table(cs, spec.W, ext, spec.part.b());
        KahanSum tot;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            double v = kappa_eval(clusters[c], table, spec.lambda);
            vals[c][s] = v;
            tot.add(v);
        }
        totals[s] = tot.value();
    });
    SharedActivityResult out;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        auto m = mean_se(vals[c]);
        out.activities.push_back(ActivityEstimate{clusters[c], m.mean, m.se, n_samples});
    }
    out.kappa_total = mean_se(totals);
    return out;
}

// --- Cluster representation of the partition function --------------------------

struct ZClusterSum {
    double value = 1.0;
    std::size_t n_collections = 0;  // nonempty collections included
    bool singletons_only = true;
};

// Z = 1 + sum over collections of pairwise timepoint-disjoint clusters of the
// product of activities. Exhaustive over the supplied list; aborts beyond
// max_terms collections.
inline ZClusterSum z_cluster_sum(const std::vector<ActivityEstimate>& activities,
                                 std::size_t max_terms = 1u << 20) {
    ZClusterSum out;
    KahanSum acc;
    std::vector<std::size_t> stack;
    std::function<void(std::size_t, Mask, double)> rec = [&](std::size_t next, Mask used,
                                                             double prod) {
        for (std::size_t c = next; c < activities.size(); ++c) {
            Mask tp = activities[c].cluster.timepoints();
            if (used & tp) continue;
            double p = prod * activities[c].k_hat;
            acc.add(p);
            ++out.n_collections;
            if (out.n_collections > max_terms)
                throw std::runtime_error("z_cluster_sum: collection budget exceeded");
            if (!stack.empty()) out.singletons_only = false;
            stack.push_back(c);
            rec(c + 1, used | tp, p);
            stack.pop_back();
        }
    };
    rec(0, 0, 1.0);
    out.value = 1.0 + acc.value();
    return out;
}

// --- Ursell function and the log series ----------------------------------------

// phi^T over n labelled clusters given the pairwise-intersection edge mask:
// 1 for n = 1, otherwise the alternating sum over connected spanning
// subgraphs of the intersection graph. Enumerates subsets of present edges.
inline double ursell_from_mask(int n, Mask edges) {
    if (n < 1) throw std::invalid_argument("ursell: need n >= 1");
    if (n > 7) throw std::invalid_argument("ursell: graph enumeration capped at n = 7");
    if (n == 1) return 1.0;
    // collect present edges
    std::vector<std::pair<int, int>> present;
    int e = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++e)
            if ((edges >> e) & 1) present.push_back({i, j});
    double total = 0.0;
    std::size_t m = present.size();
    for (std::size_t sub = 0; sub < (std::size_t{1} << m); ++sub) {
        // connectivity over all n vertices using the selected edges
        int parent[8];
        for (int v = 0; v < n; ++v) parent[v] = v;
        auto find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        int comps = n;
        int bits = 0;
        for (std::size_t q = 0; q < m; ++q)
            if ((sub >> q) & 1) {
                ++bits;
                int a = find(present[q].first), b = find(present[q].second);
                if (a != b) {
                    parent[a] = b;
                    --comps;
                }
            }
        if (comps == 1) total += (bits % 2 == 0) ? 1.0 : -1.0;
    }
    return total;
}

inline Mask intersection_edge_mask(const std::vector<const Cluster*>& tuple) {
    int n = static_cast<int>(tuple.size());
    Mask edges = 0;
    int e = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++e)
            if (tuple[i]->timepoints() & tuple[j]->timepoints()) edges |= Mask{1} << e;
    return edges;
}

inline double ursell(const std::vector<const Cluster*>& tuple) {
    return ursell_from_mask(static_cast<int>(tuple.size()),
                            intersection_edge_mask(tuple));
}

// log Z = sum_{m>=1} (1/m!) sum over ordered m-tuples (with repetition) of
// phi^T(tuple) prod K, truncated at the requested order. Intended for small
// cluster lists; the tuple count is bounded explicitly.
inline double log_z_series(const std::vector<ActivityEstimate>& activities, int order) {
    if (order < 1 || order > 7) throw std::invalid_argument("log_z_series: order must be 1..7");
    std::size_t c = activities.size();
    if (c == 0) return 0.0;
    double tuples = std::pow(static_cast<double>(c), order);
    if (tuples > 2e7) throw std::invalid_argument("log_z_series: tuple budget exceeded");

    std::map<std::pair<int, Mask>, double> ursell_cache;
    KahanSum series;
    std::vector<std::size_t> idx;
    double factorial = 1.0;
    for (int m = 1; m <= order; ++m) {
        factorial *= m;
        idx.assign(m, 0);
        while (true) {
            double prod = 1.0;
            std::vector<const Cluster*> tuple;
            tuple.reserve(m);
            for (int q = 0; q < m; ++q) {
                prod *= activities[idx[q]].k_hat;
                tuple.push_back(&activities[idx[q]].cluster);
            }
            if (prod != 0.0) {
                Mask edges = intersection_edge_mask(tuple);
                auto key = std::make_pair(m, edges);
                auto it = ursell_cache.find(key);
                double phi_t;
                if (it == ursell_cache.end()) {
                    phi_t = ursell_from_mask(m, edges);
                    ursell_cache.emplace(key, phi_t);
                } else {
                    phi_t = it->second;
                }
                if (phi_t != 0.0) series.add(phi_t * prod / factorial);
            }
            int q = m - 1;
            while (q >= 0 && ++idx[q] == c) idx[q--] = 0;
            if (q < 0) break;
        }
    }
    return series.value();
}

// --- Tree-graph bound ----------------------------------------------------------

struct TreeGraphReport {
    double connected_sum = 0.0;  // sum over connected graphs of prod w
    double tree_sum = 0.0;       // sum over spanning trees of prod w
    double product_factor = 0.0; // prod over ordered pairs (1 + w_ij)
    bool holds = false;          // connected_sum <= product_factor * tree_sum
};

// Verifies sum_{G connected} prod w <= prod_{i,j} (1 + w_ij) sum_{T tree} prod w
// by exhaustive enumeration (trees via Pruefer sequences).
inline TreeGraphReport tree_graph_bound_check(int r, const std::vector<double>& w) {
    if (r < 2 || r > 6) throw std::invalid_argument("tree_graph_bound_check: r must be 2..6");
    std::size_t n_edges = static_cast<std::size_t>(r) * (r - 1) / 2;
    if (w.size() != n_edges)
        throw std::invalid_argument("tree_graph_bound_check: need r(r-1)/2 weights");
    for (double v : w)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("tree_graph_bound_check: weights must lie in [0,1]");

    auto edge_index = [r](int i, int j) {
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i) * r - static_cast<std::size_t>(i) * (i + 1) / 2 +
               (j - i - 1);
    };

    TreeGraphReport rep;
    // connected graphs
    for (std::size_t sub = 0; sub < (std::size_t{1} << n_edges); ++sub) {
        int parent[6];
        for (int v = 0; v < r; ++v) parent[v] = v;
        auto find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        int comps = r;
        double prod = 1.0;
        std::size_t e = 0;
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j, ++e)
                if ((sub >> e) & 1) {
                    prod *= w[e];
                    int a = find(i), b = find(j);
                    if (a != b) {
                        parent[a] = b;
                        --comps;
                    }
                }
        if (comps == 1) rep.connected_sum += prod;
    }
    // spanning trees of K_r via Pruefer sequences of length r - 2
    if (r == 2) {
        rep.tree_sum = w[0];
    } else {
        std::size_t count = 1;
        for (int q = 0; q < r - 2; ++q) count *= static_cast<std::size_t>(r);
        for (std::size_t code = 0; code < count; ++code) {
            int pruefer[4];
            std::size_t rem = code;
            for (int q = 0; q < r - 2; ++q) {
                pruefer[q] = static_cast<int>(rem % r);
                rem /= r;
            }
            int degree[6];
            for (int v = 0; v < r; ++v) degree[v] = 1;
            for (int q = 0; q < r - 2; ++q) ++degree[pruefer[q]];
            double prod = 1.0;
            int deg[6];
            for (int v = 0; v < r; ++v) deg[v] = degree[v];
            for (int q = 0; q < r - 2; ++q) {
                int leaf = -1;
                for (int v = 0; v < r; ++v)
                    if (deg[v] == 1) {
                        leaf = v;
                        break;
                    }
                prod *= w[edge_index(leaf, pruefer[q])];
                --deg[leaf];
                --deg[pruefer[q]];
            }
            int u = -1, v = -1;
            for (int x = 0; x < r; ++x)
                if (deg[x] == 1) (u < 0 ? u : v) = x;
            prod *= w[edge_index(u, v)];
            rep.tree_sum += prod;
        }
    }
    rep.product_factor = 1.0;
    for (std::size_t e = 0; e < n_edges; ++e)
        rep.product_factor *= (1.0 + w[e]) * (1.0 + w[e]);  // ordered pairs: both orders
    rep.holds = rep.connected_sum <= rep.product_factor * rep.tree_sum + 1e-12;
    return rep;
}

// --- Convergence diagnostic ------------------------------------------------------

struct DParams {
    double eps = 0.1;
    double b = 1.0;
    double delta = 1.5;
};

struct ConvergenceRow {
    std::string cluster_id;
    int weight = 0;
    double k_hat = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool violates = false;  // |k_hat| > bound + 2 se
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<int> weights;            // distinct weights n with origin clusters
    std::vector<double> weight_sums;     // sum_{Gamma* ∋ 0, |Gamma| = n} |K_hat|
    double eta_hat = 0.0;                // fitted geometric rate
    std::size_t n_violations = 0;
};

inline double activity_bound(const Cluster& g, const DParams& dp) {
    double bound = 1.0;
    for (const auto& c : g.contours)
        for (const auto& p : c.pairs)
            bound *= dp.eps * std::pow(1.0 + dp.b * std::abs(p.j - p.i - 1.0), -dp.delta);
    int chain_intervals = 0;
    for (const auto& c : g.chains) chain_intervals += c.len;
    bound *= std::pow(dp.eps, chain_intervals);
    return bound;
}

inline ConvergenceReport convergence_diagnostic(const Partition1D& part,
                                                const std::vector<ActivityEstimate>& activities,
                                                const DParams& dp) {
    ConvergenceReport rep;
    std::map<int, double> sums;
    int origin = part.origin_timepoint();
    for (const auto& a : activities) {
        ConvergenceRow row;
        row.cluster_id = a.cluster.id();
        row.weight = a.cluster.weight();
        row.k_hat = a.k_hat;
        row.se = a.se;
        row.bound = activity_bound(a.cluster, dp);
        row.violates = std::abs(a.k_hat) > row.bound + 2.0 * a.se;
        if (row.violates) ++rep.n_violations;
        rep.rows.push_back(row);
        if ((a.cluster.timepoints() >> origin) & 1) sums[row.weight] += std::abs(a.k_hat);
    }
    std::vector<double> xs, ys;
    for (const auto& [n, s] : sums) {
        rep.weights.push_back(n);
        rep.weight_sums.push_back(s);
        if (s > 0.0) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(s));
        }
    }
    if (xs.size() >= 2) rep.eta_hat = std::exp(linear_fit(xs, ys).slope);
    return rep;
}

// --- Correlation functions --------------------------------------------------------

// f^A = Z^A / Z where Z^A keeps only collections whose clusters avoid the
// timepoint set A.
inline double correlation_f(const std::vector<ActivityEstimate>& activities, Mask timepoints_a) {
    std::vector<ActivityEstimate> kept;
    for (const auto& a : activities)
        if (!(a.cluster.timepoints() & timepoints_a)) kept.push_back(a);
    double z = z_cluster_sum(activities).value;
    if (!(z > 0.0)) throw std::runtime_error("correlation_f: nonpositive Z estimate");
    return z_cluster_sum(kept).value / z;
}

inline Mask timepoints_of_intervals(Mask intervals) { return interval_timepoints(intervals); }

// --- Serialization ------------------------------------------------------------------

inline nlohmann::json Cluster::to_json() const {
    nlohmann::json jc = nlohmann::json::array();
    std::vector<Contour> cs = contours;
    std::sort(cs.begin(), cs.end(), [](const Contour& a, const Contour& b) {
        return a.pairs.front().i != b.pairs.front().i ? a.pairs.front().i < b.pairs.front().i
                                                      : a.pairs.front().j < b.pairs.front().j;
    });
    for (const auto& c : cs) {
        nlohmann::json jp = nlohmann::json::array();
        for (const auto& p : c.pairs) jp.push_back({p.i, p.j});
        jc.push_back(jp);
    }
    nlohmann::json jh = nlohmann::json::array();
    std::vector<Chain> hs = chains;
    std::sort(hs.begin(), hs.end(),
              [](const Chain& a, const Chain& b) { return a.start < b.start; });
    for (const auto& h : hs) jh.push_back({h.start, h.len});
    return nlohmann::json{{"contours", jc}, {"chains", jh}};
}

inline Cluster Cluster::from_json(const nlohmann::json& j) {
    Cluster g;
    for (const auto& jc : j.at("contours")) {
        Contour c;
        for (const auto& jp : jc) c.pairs.push_back({jp.at(0).get<int>(), jp.at(1).get<int>()});
        g.contours.push_back(c);
    }
    for (const auto& jh : j.at("chains"))
        g.chains.push_back({jh.at(0).get<int>(), jh.at(1).get<int>()});
    return g;
}

inline void write_activity_table(const std::vector<ActivityEstimate>& activities,
                                 std::ostream& os) {
    os << "cluster,weight,k_hat,se,n\n";
    for (const auto& a : activities)
        os << '"' << a.cluster.id() << "\"," << a.cluster.weight() << ","
           << format_double(a.k_hat) << "," << format_double(a.se) << "," << a.n_samples << "\n";
}

} // namespace pathgibbs
