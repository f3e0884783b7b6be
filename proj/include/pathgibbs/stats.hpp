#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pathgibbs {

// Neumaier-compensated accumulator. Used wherever long sums feed an
// exactness assertion (rough integrals, log-weight totals).
class KahanSum {
public:
    void add(double x) {
        double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe r;
    r.n = xs.size();
    if (r.n == 0) return r;
    KahanSum s;
    for (double x : xs) s.add(x);
    r.mean = s.value() / static_cast<double>(r.n);
    if (r.n < 2) return r;
    KahanSum q;
    for (double x : xs) {
        double d = x - r.mean;
        q.add(d * d);
    }
    double var = q.value() / static_cast<double>(r.n - 1);
    r.se = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty sample");
    std::size_t m = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + m, xs.end());
    double hi = xs[m];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + m - 1, xs.end());
    return 0.5 * (xs[m - 1] + hi);
}

// Empirical q-quantile (linear interpolation between order statistics).
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0,1]");
    std::sort(xs.begin(), xs.end());
    double pos = q * static_cast<double>(xs.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need two same-length samples of size >= 2");
    std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LinearFit f;
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

// Two-sample Kolmogorov-Smirnov test; returns the asymptotic p-value.
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks test: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double xa = a[i], xb = b[j];
        if (xa <= xb) ++i;
        if (xb <= xa) ++j;
        double fa = static_cast<double>(i) / na;
        double fb = static_cast<double>(j) / nb;
        d = std::max(d, std::abs(fa - fb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    double lambda = (ne + 0.12 + 0.11 / ne) * d;
    // Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
    double p = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
        sign = -sign;
    }
    p *= 2.0;
    return std::min(1.0, std::max(0.0, p));
}

} // namespace pathgibbs
