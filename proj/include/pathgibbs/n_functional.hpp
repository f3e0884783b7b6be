#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pathgibbs/holder.hpp"
#include "pathgibbs/rough_path.hpp"

namespace pathgibbs {

// N_{[s,t]}(X) = ||X||_{gamma,[s,t]} + ||Area||_{2 gamma,[s,t]}, computed in
// DyadicPairs mode. Subadditivity is not asserted anywhere.
struct NFunctional {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double gamma = 0.0;
    double value = 0.0;
};

inline NFunctional n_functional(const Step2RoughPath& rp, double t_lo, double t_hi, double gamma) {
    std::size_t a = rp.base().index_of_time(t_lo);
    std::size_t b = rp.base().index_of_time(t_hi);
    if (b <= a) throw std::invalid_argument("n_functional: empty interval");
    NFunctional out{t_lo, t_hi, gamma, 0.0};
    out.value = holder_norm_path(rp.base(), gamma, HolderMode::DyadicPairs, a, b).value +
                holder_norm_area(rp, 2.0 * gamma, HolderMode::DyadicPairs, a, b).value;
    return out;
}

// cal N_{alpha,p}(X) over a finite window of unit-interval lifts indexed by
// k: sum_k (1+|k|)^{-alpha} N_k^p, plus the geometric tail weight
// sum_{|k| > K} (1+|k|)^{-alpha} as a truncation diagnostic.
struct CalN {
    double value = 0.0;
    double tail_weight = 0.0;
};

inline double tail_weight_alpha(double alpha, int K) {
    // sum_{|k| > K} (1+|k|)^{-alpha}: partial sum to 10^5 plus integral remainder
    double s = 0.0;
    int cut = 100000;
    for (int k = K + 1; k <= cut; ++k) s += 2.0 * std::pow(1.0 + k, -alpha);
    s += 2.0 * std::pow(1.0 + cut, 1.0 - alpha) / (alpha - 1.0);
    return s;
}

inline CalN cal_n(const std::vector<std::pair<int, NFunctional>>& windows, double alpha, double p) {
    if (!(alpha > 1.0)) throw std::invalid_argument("cal_n: need alpha > 1");
    if (!(p >= 1.0)) throw std::invalid_argument("cal_n: need p >= 1");
    if (windows.empty()) throw std::invalid_argument("cal_n: empty window list");
    CalN out;
    int kmax = 0;
    for (const auto& [k, nf] : windows) {
        out.value += std::pow(1.0 + std::abs(static_cast<double>(k)), -alpha) *
                     std::pow(nf.value, p);
        kmax = std::max(kmax, std::abs(k));
    }
    out.tail_weight = tail_weight_alpha(alpha, kmax);
    return out;
}

} // namespace pathgibbs
