#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pathgibbs/rough_path.hpp"
#include "pathgibbs/stats.hpp"
#include "pathgibbs/test_field.hpp"

namespace pathgibbs {

// Compensated Riemann sum over grid steps [a, b):
//   sum_j [ phi_i(t_j, X_j) dX^i_j + (d_j phi_i)(t_j, X_j) Area^{ij}_{j,j+1} ].
// The value of the integral is this sum at the finest sampled grid; additivity
// over adjacent grid ranges and locality are exact by construction.
inline double rough_integral(const Step2RoughPath& rp, const TestField& phi,
                             std::size_t a, std::size_t b) {
    if (phi.dim() != rp.dim()) throw std::invalid_argument("rough_integral: dimension mismatch");
    if (b < a || b > rp.steps()) throw std::invalid_argument("rough_integral: bad grid range");
    const int d = rp.dim();
    std::vector<double> val(d), grad(static_cast<std::size_t>(d) * d),
        area(static_cast<std::size_t>(d) * d);
    KahanSum acc;
    for (std::size_t j = a; j < b; ++j) {
        double tj = rp.base().time_at(j);
        const double* xj = rp.base().point(j);
        const double* xj1 = rp.base().point(j + 1);
        phi.value(tj, xj, val.data());
        phi.gradient(tj, xj, grad.data());
        rp.area(j, j + 1, area.data());
        for (int i = 0; i < d; ++i) acc.add(val[i] * (xj1[i] - xj[i]));
        for (int i = 0; i < d; ++i)
            for (int m = 0; m < d; ++m) acc.add(grad[i * d + m] * area[m * d + i]);
    }
    return acc.value();
}

// Compensated sum on the subgrid of stride 2^(deepest - level); the areas of
// the coarse steps come from the same prefix data (Chen recombination).
inline double rough_integral_at_level(const Step2RoughPath& rp, const TestField& phi, int level) {
    int deepest = rp.base().level();
    if (level < 0 || level > deepest)
        throw std::invalid_argument("rough_integral_at_level: bad level");
    const int d = rp.dim();
    std::size_t stride = static_cast<std::size_t>(1) << (deepest - level);
    std::size_t nc = static_cast<std::size_t>(1) << level;
    std::vector<double> val(d), grad(static_cast<std::size_t>(d) * d),
        area(static_cast<std::size_t>(d) * d);
    KahanSum acc;
    for (std::size_t c = 0; c < nc; ++c) {
        std::size_t j = c * stride;
        std::size_t j1 = j + stride;
        double tj = rp.base().time_at(j);
        const double* xj = rp.base().point(j);
        const double* xj1 = rp.base().point(j1);
        phi.value(tj, xj, val.data());
        phi.gradient(tj, xj, grad.data());
        rp.area(j, j1, area.data());
        for (int i = 0; i < d; ++i) acc.add(val[i] * (xj1[i] - xj[i]));
        for (int i = 0; i < d; ++i)
            for (int m = 0; m < d; ++m) acc.add(grad[i * d + m] * area[m * d + i]);
    }
    return acc.value();
}

// Successive differences |S_L - S_{L-1}| of the compensated sums over the
// dyadic partitions at the requested levels (ascending).
inline std::vector<double> dyadic_convergence_profile(const Step2RoughPath& rp,
                                                      const TestField& phi,
                                                      const std::vector<int>& levels) {
    if (levels.size() < 2)
        throw std::invalid_argument("dyadic_convergence_profile: need at least 2 levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw std::invalid_argument("dyadic_convergence_profile: levels must ascend");
    std::vector<double> out;
    double prev = rough_integral_at_level(rp, phi, levels.front());
    for (std::size_t i = 1; i < levels.size(); ++i) {
        double cur = rough_integral_at_level(rp, phi, levels[i]);
        out.push_back(std::abs(cur - prev));
        prev = cur;
    }
    return out;
}

// Trapezoid rule for t -> div phi(t, X_t) on the grid range [a, b].
inline double trapezoid_divergence(const GridPath& path, const TestField& phi,
                                   std::size_t a, std::size_t b) {
    KahanSum acc;
    double dt = path.dt();
    for (std::size_t j = a; j < b; ++j) {
        double f0 = phi.divergence(path.time_at(j), path.point(j));
        double f1 = phi.divergence(path.time_at(j + 1), path.point(j + 1));
        acc.add(0.5 * (f0 + f1) * dt);
    }
    return acc.value();
}

// | int phi o dX - int phi dX - (1/2) int div phi(u, X_u) du | on [a, b].
inline double ito_strat_defect(const Step2RoughPath& rp_ito, const Step2RoughPath& rp_strat,
                               const TestField& phi, std::size_t a, std::size_t b) {
    if (rp_ito.scheme() != LiftScheme::ItoLift)
        throw std::invalid_argument("ito_strat_defect: first lift must be ItoLift");
    if (&rp_ito.base().values() != &rp_strat.base().values() &&
        rp_ito.base().values() != rp_strat.base().values())
        throw std::invalid_argument("ito_strat_defect: lifts must share the same base path");
    double strat = rough_integral(rp_strat, phi, a, b);
    double ito = rough_integral(rp_ito, phi, a, b);
    double corr = 0.5 * trapezoid_divergence(rp_ito.base(), phi, a, b);
    return std::abs(strat - ito - corr);
}

} // namespace pathgibbs
