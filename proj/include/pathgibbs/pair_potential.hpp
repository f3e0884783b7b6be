#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace pathgibbs {

// Pair interaction W(x,t) = A exp(-|x|^2/(2 sigma^2)) exp(-|t|/ell), even in
// both arguments, with closed-form Fourier transform
//   What(k,w) = A (2 pi)^{d/2} sigma^d exp(-sigma^2 |k|^2 / 2) * 2 ell / (1 + ell^2 w^2),
// strictly positive everywhere. The exponential time decay dominates
// (1+|t|)^{-beta} for every beta.
class PairPotential {
public:
    PairPotential(double amplitude, double sigma, double ell)
        : A_(amplitude), sigma_(sigma), ell_(ell) {
        if (!(amplitude > 0.0) || !(sigma > 0.0) || !(ell > 0.0))
            throw std::invalid_argument("PairPotential: parameters must be positive");
    }

    double amplitude() const { return A_; }
    double sigma() const { return sigma_; }
    double ell() const { return ell_; }

    double operator()(const double* x, int d, double t) const {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
        return A_ * std::exp(-r2 / (2.0 * sigma_ * sigma_)) * std::exp(-std::abs(t) / ell_);
    }

    // Separated factors; handy when one of them is hoisted out of a loop.
    double space_factor_r2(double r2) const {
        return A_ * std::exp(-r2 / (2.0 * sigma_ * sigma_));
    }
    double time_factor(double t) const { return std::exp(-std::abs(t) / ell_); }

    // grad_x W, Hessian_x W, and third x-derivatives (all times the time factor).
    void gradient(const double* x, int d, double t, double* out) const {
        double w = (*this)(x, d, t);
        double s2 = sigma_ * sigma_;
        for (int i = 0; i < d; ++i) out[i] = -x[i] / s2 * w;
    }

    void hessian(const double* x, int d, double t, double* out) const {
        double w = (*this)(x, d, t);
        double s2 = sigma_ * sigma_;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double v = x[i] * x[j] / (s2 * s2) * w;
                if (i == j) v -= w / s2;
                out[i * d + j] = v;
            }
    }

    void third_derivative(const double* x, int d, double t, double* out) const {
        double w = (*this)(x, d, t);
        double s2 = sigma_ * sigma_;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    double v = -x[i] * x[j] * x[k] / (s2 * s2 * s2);
                    if (i == j) v += x[k] / (s2 * s2);
                    if (i == k) v += x[j] / (s2 * s2);
                    if (j == k) v += x[i] / (s2 * s2);
                    out[(i * d + j) * d + k] = v * w;
                }
    }

    double fourier(const double* k, int d, double w) const {
        double k2 = 0.0;
        for (int i = 0; i < d; ++i) k2 += k[i] * k[i];
        double space = A_ * std::pow(6.283185307179586, 0.5 * d) * std::pow(sigma_, d) *
                       std::exp(-sigma_ * sigma_ * k2 / 2.0);
        double time = 2.0 * ell_ / (1.0 + ell_ * ell_ * w * w);
        return space * time;
    }

    // Total Fourier mass int What dk dw (closed form), and the mass inside the
    // box {|k_i| <= kmax, |w| <= wmax}; the difference drives quadrature tail
    // bounds.
    double fourier_mass_total(int d) const {
        // int space dk = A (2 pi)^{d/2} sigma^d (2 pi / sigma^2)^{d/2}... direct:
        // int exp(-s^2 k^2/2) dk = (2 pi)^{1/2} / s per axis.
        double space = A_ * std::pow(6.283185307179586, 0.5 * d) * std::pow(sigma_, d) *
                       std::pow(std::sqrt(6.283185307179586) / sigma_, d);
        double time = 2.0 * 3.141592653589793;  // int 2 ell/(1+ell^2 w^2) dw
        return space * time;
    }

    double fourier_mass_box(int d, double kmax, double wmax) const {
        double per_axis = A_ > 0 ? std::erf(sigma_ * kmax / std::sqrt(2.0)) : 0.0;
        double space = A_ * std::pow(6.283185307179586, 0.5 * d) * std::pow(sigma_, d) *
                       std::pow(std::sqrt(6.283185307179586) / sigma_ * per_axis, d);
        double time = 4.0 * std::atan(ell_ * wmax);
        return space * time;
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"family", "gauss_exp"}, {"A", A_}, {"sigma", sigma_}, {"ell", ell_}};
    }

    static PairPotential from_json(const nlohmann::json& j) {
        if (j.at("family").get<std::string>() != "gauss_exp")
            throw std::invalid_argument("PairPotential: unknown family");
        return PairPotential(j.at("A").get<double>(), j.at("sigma").get<double>(),
                             j.at("ell").get<double>());
    }

private:
    double A_;
    double sigma_;
    double ell_;
};

} // namespace pathgibbs
