#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pathgibbs/current.hpp"
#include "pathgibbs/pair_potential.hpp"
#include "pathgibbs/potential_ext.hpp"
#include "pathgibbs/rough_path.hpp"
#include "pathgibbs/stats.hpp"

namespace pathgibbs {

struct EnergyConfig {
    double lambda = 0.0;
    double lambda_gate = 0.25;  // smallness gate for cluster runs

    void check_gate() const {
        if (std::abs(lambda) > lambda_gate)
            throw std::invalid_argument("EnergyConfig: |lambda| exceeds the smallness gate");
    }
};

// Non-owning uniform-grid view; the energy double sums only need points,
// increments and the spacing, so they work for dyadic paths and for
// concatenations of per-interval segments alike.
struct PathView {
    const double* pts = nullptr;  // (steps + 1) * dim
    std::size_t steps = 0;
    int dim = 1;
    double t0 = 0.0;
    double dt = 0.0;

    const double* point(std::size_t k) const { return pts + k * static_cast<std::size_t>(dim); }
};

inline PathView view_of(const GridPath& p) {
    return PathView{p.values().data(), p.steps(), p.dim(), p.t0(), p.dt()};
}

// Contiguous concatenation of adjoining equal-spacing segments (the shared
// boundary point is stored once).
class ConcatPath {
public:
    explicit ConcatPath(const std::vector<GridPath>& segments) {
        if (segments.empty()) throw std::invalid_argument("ConcatPath: no segments");
        dim_ = segments.front().dim();
        t0_ = segments.front().t0();
        dt_ = segments.front().dt();
        for (std::size_t s = 0; s < segments.size(); ++s) {
            const GridPath& seg = segments[s];
            if (seg.dim() != dim_) throw std::invalid_argument("ConcatPath: dim mismatch");
            if (std::abs(seg.dt() - dt_) > 1e-12 * dt_)
                throw std::invalid_argument("ConcatPath: spacing mismatch");
            if (s > 0) {
                const GridPath& prev = segments[s - 1];
                if (std::abs(seg.t0() - prev.t1()) > 1e-9)
                    throw std::invalid_argument("ConcatPath: segments not adjoining");
                for (int i = 0; i < dim_; ++i)
                    if (seg.at(0, i) != prev.at(prev.steps(), i))
                        throw std::invalid_argument("ConcatPath: endpoint values disagree");
            }
            std::size_t from = (s == 0) ? 0 : 1;  // skip the duplicated boundary point
            for (std::size_t k = from; k <= seg.steps(); ++k)
                for (int i = 0; i < dim_; ++i) pts_.push_back(seg.at(k, i));
            steps_ += seg.steps();
        }
    }

    PathView view() const { return PathView{pts_.data(), steps_, dim_, t0_, dt_}; }
    std::size_t steps() const { return steps_; }
    int dim() const { return dim_; }

private:
    std::vector<double> pts_;
    std::size_t steps_ = 0;
    int dim_ = 1;
    double t0_ = 0.0;
    double dt_ = 0.0;
};

// V_I(X) = int_I V(X_s) ds, trapezoid rule on the path grid.
inline double v_energy(const GridPath& path, const PotentialExt& ext,
                       std::size_t a, std::size_t b) {
    if (b < a || b > path.steps()) throw std::invalid_argument("v_energy: bad grid range");
    double dt = path.dt();
    KahanSum acc;
    for (std::size_t j = a; j < b; ++j)
        acc.add(0.5 * (ext.v(path.point(j)) + ext.v(path.point(j + 1))) * dt);
    return acc.value();
}

inline double v_energy(const GridPath& path, const PotentialExt& ext) {
    return v_energy(path, ext, 0, path.steps());
}

namespace detail {

// Time-decay factors of the shipped W depend only on the index distance;
// hoisting them makes the double sums a single exp per pair.
inline std::vector<double> time_factors(const PairPotential& W, double dt, std::size_t n) {
    std::vector<double> tf(n);
    for (std::size_t m = 0; m < n; ++m)
        tf[m] = W.time_factor(static_cast<double>(m) * dt);
    return tf;
}

// sum_{a in [alo,ahi)} sum_{b in [blo,bhi)} (dX_a . dX_b) W(X_a - X_b, t_a - t_b)
inline double rect_sum(const PathView& p, const PairPotential& W, const std::vector<double>& tf,
                       std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
    const int d = p.dim;
    double inv2s2 = 1.0 / (2.0 * W.sigma() * W.sigma());
    double amp = W.amplitude();
    KahanSum acc;
    for (std::size_t a = alo; a < ahi; ++a) {
        const double* xa = p.point(a);
        const double* xa1 = p.point(a + 1);
        for (std::size_t b = blo; b < bhi; ++b) {
            const double* xb = p.point(b);
            const double* xb1 = p.point(b + 1);
            double dot = 0.0, r2 = 0.0;
            for (int i = 0; i < d; ++i) {
                dot += (xa1[i] - xa[i]) * (xb1[i] - xb[i]);
                double diff = xa[i] - xb[i];
                r2 += diff * diff;
            }
            acc.add(dot * amp * std::exp(-r2 * inv2s2) * tf[a > b ? a - b : b - a]);
        }
    }
    return acc.value();
}

} // namespace detail

// Internal energy on the grid:
//   W_I(X) = (1/2) sum_{a,b in I} (dX_a . dX_b) W(X_a - X_b, t_a - t_b),
// full double sum including the diagonal a = b. Positive Fourier transform
// makes the quadratic form positive semidefinite at any resolution; the
// a = b term is the O(dt) discretization bias that buys exact positivity.
inline double w_energy(const PathView& p, const PairPotential& W, std::size_t lo, std::size_t hi) {
    if (hi < lo || hi > p.steps) throw std::invalid_argument("w_energy: bad grid range");
    if (hi == lo) return 0.0;
    std::vector<double> tf = detail::time_factors(W, p.dt, hi - lo);
    return 0.5 * detail::rect_sum(p, W, tf, lo, hi, lo, hi);
}

// The energy is defined through the Ito current: other lifts are rejected.
inline double w_energy(const Step2RoughPath& rp, const PairPotential& W,
                       std::size_t lo, std::size_t hi) {
    if (rp.scheme() != LiftScheme::ItoLift)
        throw std::invalid_argument("w_energy: defined through the Ito current (Ito lift only)");
    return w_energy(view_of(rp.base()), W, lo, hi);
}

inline double w_energy(const Step2RoughPath& rp, const PairPotential& W) {
    return w_energy(rp, W, 0, rp.steps());
}

inline double w_energy(const ConcatPath& p, const PairPotential& W) {
    return w_energy(p.view(), W, 0, p.steps());
}

// Uniform partition of a path view into N blocks of equal step count.
struct BlockPartition {
    PathView path;
    int n_blocks = 0;
    std::size_t span = 0;

    BlockPartition(const PathView& p, int N) : path(p), n_blocks(N) {
        if (N < 2) throw std::invalid_argument("BlockPartition: need N >= 2");
        if (p.steps % static_cast<std::size_t>(N) != 0)
            throw std::invalid_argument("BlockPartition: steps not divisible by N");
        span = p.steps / static_cast<std::size_t>(N);
    }
    std::size_t lo(int k) const { return span * static_cast<std::size_t>(k); }
    std::size_t hi(int k) const { return span * static_cast<std::size_t>(k + 1); }
};

// Rectangle sum S_ij over blocks i, j of the partition.
inline double w_block_sum(const BlockPartition& bp, const PairPotential& W, int bi, int bj) {
    if (bi < 0 || bi >= bp.n_blocks || bj < 0 || bj >= bp.n_blocks)
        throw std::invalid_argument("w_block_sum: block index out of range");
    std::vector<double> tf = detail::time_factors(W, bp.path.dt, bp.path.steps);
    return detail::rect_sum(bp.path, W, tf, bp.lo(bi), bp.hi(bi), bp.lo(bj), bp.hi(bj));
}

// Pair energy W_{tau_i, tau_j} for the partition into N blocks. With S_ij the
// rectangle sums, adjacent pairs carry the quarter-diagonal terms and the two
// edge pairs an extra quarter of their outer diagonal, so that
//   sum_{i<j} W_{tau_i,tau_j} = W_I exactly.
// For N = 2 the single pair triggers both edge rules; `both_edges_fired`
// reports that configuration.
struct PairEnergy {
    double value = 0.0;
    bool both_edges_fired = false;
};

inline PairEnergy w_pair_energy(const BlockPartition& bp, const PairPotential& W, int i, int j) {
    int N = bp.n_blocks;
    if (!(0 <= i && i < j && j < N))
        throw std::invalid_argument("w_pair_energy: need 0 <= i < j < N");
    PairEnergy out;
    double v = w_block_sum(bp, W, i, j);
    if (j - i == 1) {
        v += 0.25 * (w_block_sum(bp, W, i, i) + w_block_sum(bp, W, j, j));
        bool left_edge = (i == 0);
        bool right_edge = (j == N - 1);
        if (left_edge) v += 0.25 * w_block_sum(bp, W, 0, 0);
        if (right_edge) v += 0.25 * w_block_sum(bp, W, N - 1, N - 1);
        out.both_edges_fired = left_edge && right_edge;
    }
    out.value = v;
    return out;
}

inline PairEnergy w_pair_energy(const Step2RoughPath& rp, const PairPotential& W,
                                int i, int j, int N) {
    if (rp.scheme() != LiftScheme::ItoLift)
        throw std::invalid_argument("w_pair_energy: defined through the Ito current");
    return w_pair_energy(BlockPartition(view_of(rp.base()), N), W, i, j);
}

// Cross pairing of two disjoint currents:
//   <C^X, C^Y>_W = sum_a sum_b (dX_a . dY_b) W(X_a - Y_b, t_a - t_b).
inline double w_cross_energy(const PathView& px, std::size_t alo, std::size_t ahi,
                             const PathView& py, std::size_t blo, std::size_t bhi,
                             const PairPotential& W) {
    if (px.dim != py.dim) throw std::invalid_argument("w_cross_energy: dimension mismatch");
    const int d = px.dim;
    double inv2s2 = 1.0 / (2.0 * W.sigma() * W.sigma());
    double invell = 1.0 / W.ell();
    double amp = W.amplitude();
    KahanSum acc;
    for (std::size_t a = alo; a < ahi; ++a) {
        const double* xa = px.point(a);
        const double* xa1 = px.point(a + 1);
        double ta = px.t0 + static_cast<double>(a) * px.dt;
        for (std::size_t b = blo; b < bhi; ++b) {
            const double* yb = py.point(b);
            const double* yb1 = py.point(b + 1);
            double dot = 0.0, r2 = 0.0;
            for (int i = 0; i < d; ++i) {
                dot += (xa1[i] - xa[i]) * (yb1[i] - yb[i]);
                double diff = xa[i] - yb[i];
                r2 += diff * diff;
            }
            double tb = py.t0 + static_cast<double>(b) * py.dt;
            acc.add(dot * amp * std::exp(-r2 * inv2s2) * std::exp(-std::abs(ta - tb) * invell));
        }
    }
    return acc.value();
}

inline double w_cross_energy(const GridPath& px, const GridPath& py, const PairPotential& W) {
    return w_cross_energy(view_of(px), 0, px.steps(), view_of(py), 0, py.steps(), W);
}

// Interaction with boundary currents: int_I w^{C_Y}(t, X_t) . dX_t, the rough
// integral of the induced field against the inner lift. Linear in the
// boundary current.
inline double w_boundary_energy(const Step2RoughPath& inner, const BoundaryCurrent& bc,
                                const PairPotential& W, std::size_t a, std::size_t b) {
    double ilo = inner.base().time_at(a), ihi = inner.base().time_at(b);
    for (const auto& w : bc.windows()) {
        double wlo = w.lift->base().t0(), whi = w.lift->base().t1();
        bool ok = (bc.side() == BoundarySide::Plus) ? (wlo >= ihi - 1e-12)
                                                    : (whi <= ilo + 1e-12);
        if (!ok)
            throw std::invalid_argument("w_boundary_energy: window overlaps the inner interval "
                                        "on the wrong side");
    }
    TestField wf = w_field(bc, W);
    return rough_integral(inner, wf, a, b);
}

} // namespace pathgibbs
