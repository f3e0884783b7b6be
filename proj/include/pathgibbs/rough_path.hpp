#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pathgibbs/grid_path.hpp"

namespace pathgibbs {

enum class LiftScheme {
    ItoLift,            // left-point sums
    StratExactLift,     // Ito area plus (1/2) delta_ij (t-s) on every increment
    StratTrapezoidLift  // midpoint sums
};

// Step-2 rough path over a grid path: the base path plus prefix tensors
//   P_k = sum_{j<k} A_j (x) dX_j,
// where A_j = X_{t_j} (Ito) or (X_{t_j}+X_{t_{j+1}})/2 (trapezoid), so that
//   Area_{ab} = P_b - P_a - X_{t_a} (x) (X_{t_b} - X_{t_a})
// gives any iterated integral in O(1). The Chen relation
//   Area_{st} - Area_{su} - Area_{ut} = X_{su} (x) X_{ut}
// holds identically for this representation.
class Step2RoughPath {
public:
    Step2RoughPath(GridPath base, LiftScheme scheme)
        : base_(std::move(base)), scheme_(scheme) {
        const int d = base_.dim();
        const std::size_t n = base_.steps();
        area_prefix_.assign((n + 1) * static_cast<std::size_t>(d) * d, 0.0);
        std::vector<double> a(static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < n; ++k) {
            const double* xk = base_.point(k);
            const double* xk1 = base_.point(k + 1);
            for (int i = 0; i < d; ++i)
                a[i] = (scheme_ == LiftScheme::StratTrapezoidLift)
                           ? 0.5 * (xk[i] + xk1[i])
                           : xk[i];
            const double* pk = prefix(k);
            double* pk1 = prefix_mut(k + 1);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    pk1[i * d + j] = pk[i * d + j] + a[i] * (xk1[j] - xk[j]);
        }
    }

    const GridPath& base() const { return base_; }
    LiftScheme scheme() const { return scheme_; }
    int dim() const { return base_.dim(); }
    std::size_t steps() const { return base_.steps(); }

    // Iterated integral tensor for grid indices a <= b, row-major d x d.
    void area(std::size_t a, std::size_t b, double* out) const {
        if (b < a) throw std::invalid_argument("area_query: need a <= b");
        base_.check_index(b);
        const int d = dim();
        const double* pa = prefix(a);
        const double* pb = prefix(b);
        const double* xa = base_.point(a);
        const double* xb = base_.point(b);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out[i * d + j] = (pb[i * d + j] - pa[i * d + j]) - xa[i] * (xb[j] - xa[j]);
        if (scheme_ == LiftScheme::StratExactLift) {
            double half_dt = 0.5 * (base_.time_at(b) - base_.time_at(a));
            for (int i = 0; i < d; ++i) out[i * d + i] += half_dt;
        }
    }

    std::vector<double> area(std::size_t a, std::size_t b) const {
        std::vector<double> out(static_cast<std::size_t>(dim()) * dim());
        area(a, b, out.data());
        return out;
    }

    const double* prefix(std::size_t k) const {
        return area_prefix_.data() + k * static_cast<std::size_t>(dim()) * dim();
    }

private:
    double* prefix_mut(std::size_t k) {
        return area_prefix_.data() + k * static_cast<std::size_t>(dim()) * dim();
    }

    GridPath base_;
    LiftScheme scheme_;
    std::vector<double> area_prefix_;
};

inline Step2RoughPath lift(const GridPath& path, LiftScheme scheme) {
    if (!path.all_finite()) throw std::invalid_argument("lift: non-finite path values");
    return Step2RoughPath(path, scheme);
}

// Chen defect Area_{ab} - Area_{au} - Area_{ub} - X_{au} (x) X_{ub},
// max-abs over tensor components, relative to |X_au| |X_ub| + 1 (sup norms).
inline double chen_defect(const Step2RoughPath& rp, std::size_t a, std::size_t u, std::size_t b) {
    if (!(a <= u && u <= b)) throw std::invalid_argument("chen_defect: need a <= u <= b");
    const int d = rp.dim();
    std::vector<double> qab = rp.area(a, b), qau = rp.area(a, u), qub = rp.area(u, b);
    const double* xa = rp.base().point(a);
    const double* xu = rp.base().point(u);
    const double* xb = rp.base().point(b);
    double defect = 0.0, nau = 0.0, nub = 0.0;
    for (int i = 0; i < d; ++i) {
        nau = std::max(nau, std::abs(xu[i] - xa[i]));
        nub = std::max(nub, std::abs(xb[i] - xu[i]));
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = ((qab[i * d + j] - qau[i * d + j]) - qub[i * d + j]) -
                       (xu[i] - xa[i]) * (xb[j] - xu[j]);
            defect = std::max(defect, std::abs(v));
        }
    return defect / (nau * nub + 1.0);
}

// Exhaustive max relative Chen defect over all grid triples a <= u <= b.
// O(n^3); intended for oracle-scale grids.
inline double chen_max_defect_exhaustive(const Step2RoughPath& rp) {
    std::size_t n = rp.steps();
    double worst = 0.0;
    for (std::size_t a = 0; a <= n; ++a)
        for (std::size_t u = a; u <= n; ++u)
            for (std::size_t b = u; b <= n; ++b)
                worst = std::max(worst, chen_defect(rp, a, u, b));
    return worst;
}

// Certified upper bound on the max relative Chen defect over ALL grid
// triples, in O(n). The defect is identically zero in exact arithmetic for
// the prefix representation, so what remains is float rounding. Under the
// standard model (each op relative error <= eps) every intermediate in
// chen_defect is bounded by combinations of
//   Pmax = max |prefix component|,  Xmax = max |path component|,
// and summing the per-operation error bounds over the evaluation gives
//   |defect| <= eps (15*(2 Pmax) + 24*(2 Xmax^2))   [+ time terms for the
// Stratonovich-exact diagonal]. A factor 2 of slack is applied on top. The
// relative denominator is >= 1, so the bound covers the relative defect too.
// Soundness is cross-checked against the exhaustive scan in the test suite.
inline double chen_max_defect_certified(const Step2RoughPath& rp) {
    const int d = rp.dim();
    std::size_t n = rp.steps();
    double pmax = 0.0, xmax = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double* p = rp.prefix(k);
        for (int c = 0; c < d * d; ++c) pmax = std::max(pmax, std::abs(p[c]));
        const double* x = rp.base().point(k);
        for (int i = 0; i < d; ++i) xmax = std::max(xmax, std::abs(x[i]));
    }
    double eps = std::numeric_limits<double>::epsilon() / 2.0;  // unit roundoff
    double bound = eps * (30.0 * pmax + 48.0 * xmax * xmax);
    if (rp.scheme() == LiftScheme::StratExactLift) {
        double tmax = std::max(std::abs(rp.base().t0()), std::abs(rp.base().t1()));
        bound += eps * 6.0 * tmax;
    }
    return 2.0 * bound;
}

} // namespace pathgibbs
