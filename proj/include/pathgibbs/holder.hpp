#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pathgibbs/grid_path.hpp"
#include "pathgibbs/rough_path.hpp"

namespace pathgibbs {

enum class HolderMode {
    ExactAllPairs,  // exact grid sup, O(n^2); refused above n = 4096
    DyadicPairs     // pairs at power-of-two index distance, O(n log n)
};

struct HolderNorm {
    double gamma = 0.0;
    double value = 0.0;
    HolderMode mode = HolderMode::DyadicPairs;
};

inline constexpr std::size_t kExactAllPairsLimit = 4096;

namespace detail {

template <typename Num>
double holder_sup(std::size_t lo, std::size_t hi, double dt, double gamma,
                  HolderMode mode, Num&& numerator) {
    std::size_t n = hi - lo;
    double sup = 0.0;
    if (mode == HolderMode::ExactAllPairs) {
        if (n > kExactAllPairsLimit)
            throw std::invalid_argument("holder_norm: ExactAllPairs limited to 4096 steps");
        for (std::size_t a = lo; a < hi; ++a)
            for (std::size_t b = a + 1; b <= hi; ++b) {
                double gap = static_cast<double>(b - a) * dt;
                sup = std::max(sup, numerator(a, b) / std::pow(gap, gamma));
            }
    } else {
        for (std::size_t span = 1; span <= n; span *= 2) {
            double gap = static_cast<double>(span) * dt;
            double w = std::pow(gap, gamma);
            for (std::size_t a = lo; a + span <= hi; ++a)
                sup = std::max(sup, numerator(a, a + span) / w);
        }
    }
    return sup;
}

} // namespace detail

// ||X||_gamma restricted to grid indices [lo, hi].
inline HolderNorm holder_norm_path(const GridPath& p, double gamma, HolderMode mode,
                                   std::size_t lo, std::size_t hi) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("holder_norm: path exponent must lie in (0,1]");
    if (hi <= lo || hi > p.steps()) throw std::invalid_argument("holder_norm: bad range");
    const int d = p.dim();
    HolderNorm out{gamma, 0.0, mode};
    out.value = detail::holder_sup(lo, hi, p.dt(), gamma, mode, [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            double diff = p.at(b, i) - p.at(a, i);
            s += diff * diff;
        }
        return std::sqrt(s);
    });
    return out;
}

inline HolderNorm holder_norm_path(const GridPath& p, double gamma,
                                   HolderMode mode = HolderMode::DyadicPairs) {
    return holder_norm_path(p, gamma, mode, 0, p.steps());
}

// ||Area||_{2 gamma}; pass gamma2 = 2*gamma directly (valid range (0,2]).
inline HolderNorm holder_norm_area(const Step2RoughPath& rp, double gamma2, HolderMode mode,
                                   std::size_t lo, std::size_t hi) {
    if (!(gamma2 > 0.0 && gamma2 <= 2.0))
        throw std::invalid_argument("holder_norm: area exponent must lie in (0,2]");
    if (hi <= lo || hi > rp.steps()) throw std::invalid_argument("holder_norm: bad range");
    const int d = rp.dim();
    std::vector<double> q(static_cast<std::size_t>(d) * d);
    HolderNorm out{gamma2, 0.0, mode};
    out.value = detail::holder_sup(lo, hi, rp.base().dt(), gamma2, mode,
                                   [&](std::size_t a, std::size_t b) {
                                       rp.area(a, b, q.data());
                                       double s = 0.0;
                                       for (double v : q) s += v * v;
                                       return std::sqrt(s);
                                   });
    return out;
}

inline HolderNorm holder_norm_area(const Step2RoughPath& rp, double gamma2,
                                   HolderMode mode = HolderMode::DyadicPairs) {
    return holder_norm_area(rp, gamma2, mode, 0, rp.steps());
}

} // namespace pathgibbs
