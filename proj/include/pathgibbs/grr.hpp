#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pathgibbs/stats.hpp"

namespace pathgibbs {

// Garsia-Rodemich-Rumsey style diagnostic bound ||R||_theta <= U + V for a
// two-index tensor function on a uniform grid over [0, T]:
//   U_{theta + 2/p, p}(R) = [ int int (|R_ts| / |t-s|^{theta+2/p})^p dt ds ]^{1/p}
//   V_theta(R)            = inf_{theta1} sup_{t != u != s} |R_st - R_ut - R_su| /
//                           ( |t-u|^{theta1} |u-s|^{theta-theta1} )
// U by grid quadrature, V by grid sup with theta1 scanned over 9 interior
// values. The constant is taken as 1: the bound is a relative diagnostic.
struct GrrBound {
    double u_term = 0.0;
    double v_term = 0.0;
    double value = 0.0;  // u_term + v_term
};

// R(a, b, out): tensor components for grid indices a < b, `comps` values.
using AreaLikeFn = std::function<void(std::size_t, std::size_t, double*)>;

inline GrrBound grr_bound(const AreaLikeFn& R, std::size_t n_steps, double total_time,
                          int comps, double theta, double p) {
    if (!(theta > 0.0)) throw std::invalid_argument("grr_bound: need theta > 0");
    if (!(p >= 1.0)) throw std::invalid_argument("grr_bound: need p >= 1");
    if (n_steps < 2) throw std::invalid_argument("grr_bound: need at least 2 steps");
    if (n_steps > 512) throw std::invalid_argument("grr_bound: grid capped at 512 steps (O(n^3) sup)");

    double dt = total_time / static_cast<double>(n_steps);
    std::size_t np = n_steps + 1;
    std::vector<double> buf(static_cast<std::size_t>(comps));

    // Cache |R_ab| for all pairs a < b.
    std::vector<double> rnorm(np * np, 0.0);
    for (std::size_t a = 0; a < np; ++a)
        for (std::size_t b = a + 1; b < np; ++b) {
            R(a, b, buf.data());
            double s = 0.0;
            for (int c = 0; c < comps; ++c) s += buf[c] * buf[c];
            rnorm[a * np + b] = std::sqrt(s);
        }

    GrrBound out;

    double theta_u = theta + 2.0 / p;
    KahanSum uacc;
    for (std::size_t a = 0; a < np; ++a)
        for (std::size_t b = a + 1; b < np; ++b) {
            double gap = static_cast<double>(b - a) * dt;
            double ratio = rnorm[a * np + b] / std::pow(gap, theta_u);
            uacc.add(2.0 * std::pow(ratio, p) * dt * dt);  // both (t,s) orderings
        }
    out.u_term = std::pow(uacc.value(), 1.0 / p);

    // V term: the increment R_st - R_ut - R_su over grid triples s < u < t.
    std::vector<double> bst(comps), but(comps), bsu(comps);
    std::vector<double> tri;  // numerator norms, then 9 scans over theta1
    std::vector<std::size_t> tri_du, tri_us;
    for (std::size_t s = 0; s < np; ++s)
        for (std::size_t u = s + 1; u < np; ++u)
            for (std::size_t t = u + 1; t < np; ++t) {
                R(s, t, bst.data());
                R(u, t, but.data());
                R(s, u, bsu.data());
                double q = 0.0;
                for (int c = 0; c < comps; ++c) {
                    double v = bst[c] - but[c] - bsu[c];
                    q += v * v;
                }
                tri.push_back(std::sqrt(q));
                tri_du.push_back(t - u);
                tri_us.push_back(u - s);
            }
    double vbest = 0.0;
    bool first = true;
    for (int k = 1; k <= 9; ++k) {
        double theta1 = theta * static_cast<double>(k) / 10.0;
        double sup = 0.0;
        for (std::size_t i = 0; i < tri.size(); ++i) {
            double den = std::pow(static_cast<double>(tri_du[i]) * dt, theta1) *
                         std::pow(static_cast<double>(tri_us[i]) * dt, theta - theta1);
            sup = std::max(sup, tri[i] / den);
        }
        if (first || sup < vbest) {
            vbest = sup;
            first = false;
        }
    }
    out.v_term = vbest;
    out.value = out.u_term + out.v_term;
    return out;
}

} // namespace pathgibbs
