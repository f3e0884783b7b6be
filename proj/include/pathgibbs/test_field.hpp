#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pathgibbs/pair_potential.hpp"

namespace pathgibbs {

// Time-dependent test vector field phi(t,x) with gradient and Hessian access.
// Gradient layout: grad[i*d+j] = d phi_i / d x_j. Hessian layout:
// hess[(i*d+j)*d+k] = d^2 phi_i / d x_j d x_k.
class FieldImpl {
public:
    virtual ~FieldImpl() = default;
    virtual int dim() const = 0;
    virtual void value(double t, const double* x, double* out) const = 0;
    virtual void gradient(double t, const double* x, double* out) const = 0;
    virtual void hessian(double t, const double* x, double* out) const = 0;
};

class TestField {
public:
    TestField() = default;
    TestField(std::shared_ptr<const FieldImpl> impl, double rho)
        : impl_(std::move(impl)), rho_(rho) {}

    int dim() const { return impl_->dim(); }
    double rho() const { return rho_; }
    const FieldImpl& impl() const { return *impl_; }
    std::shared_ptr<const FieldImpl> impl_ptr() const { return impl_; }

    void value(double t, const double* x, double* out) const { impl_->value(t, x, out); }
    void gradient(double t, const double* x, double* out) const { impl_->gradient(t, x, out); }
    void hessian(double t, const double* x, double* out) const { impl_->hessian(t, x, out); }

    double divergence(double t, const double* x) const {
        int d = dim();
        std::vector<double> g(static_cast<std::size_t>(d) * d);
        gradient(t, x, g.data());
        double tr = 0.0;
        for (int i = 0; i < d; ++i) tr += g[i * d + i];
        return tr;
    }

private:
    std::shared_ptr<const FieldImpl> impl_;
    double rho_ = 1.0;
};

namespace fields {

class Constant final : public FieldImpl {
public:
    explicit Constant(std::vector<double> c) : c_(std::move(c)) {}
    int dim() const override { return static_cast<int>(c_.size()); }
    void value(double, const double*, double* out) const override {
        for (std::size_t i = 0; i < c_.size(); ++i) out[i] = c_[i];
    }
    void gradient(double, const double*, double* out) const override {
        std::size_t d = c_.size();
        for (std::size_t i = 0; i < d * d; ++i) out[i] = 0.0;
    }
    void hessian(double, const double*, double* out) const override {
        std::size_t d = c_.size();
        for (std::size_t i = 0; i < d * d * d; ++i) out[i] = 0.0;
    }

private:
    std::vector<double> c_;
};

// phi_k(t, x) = x^i delta_{k j}
class LinearCoordinate final : public FieldImpl {
public:
    LinearCoordinate(int d, int i, int j) : d_(d), i_(i), j_(j) {
        if (i < 0 || i >= d || j < 0 || j >= d)
            throw std::invalid_argument("LinearCoordinate: bad component indices");
    }
    int dim() const override { return d_; }
    void value(double, const double* x, double* out) const override {
        for (int k = 0; k < d_; ++k) out[k] = 0.0;
        out[j_] = x[i_];
    }
    void gradient(double, const double*, double* out) const override {
        for (int k = 0; k < d_ * d_; ++k) out[k] = 0.0;
        out[j_ * d_ + i_] = 1.0;
    }
    void hessian(double, const double*, double* out) const override {
        for (int k = 0; k < d_ * d_ * d_; ++k) out[k] = 0.0;
    }

private:
    int d_, i_, j_;
};

// Real component of psi_{k,w}(x,t) = e^{i (k.x + w t)} along a fixed
// direction: cos(k.x + w t) dir or sin(k.x + w t) dir.
class FourierMode final : public FieldImpl {
public:
    enum class Part { Cos, Sin };

    FourierMode(std::vector<double> k, double w, Part part, int direction)
        : k_(std::move(k)), w_(w), part_(part), dir_(direction) {
        if (dir_ < 0 || dir_ >= dim()) throw std::invalid_argument("FourierMode: bad direction");
    }
    int dim() const override { return static_cast<int>(k_.size()); }
    void value(double t, const double* x, double* out) const override {
        int d = dim();
        for (int i = 0; i < d; ++i) out[i] = 0.0;
        out[dir_] = f(phase(t, x));
    }
    void gradient(double t, const double* x, double* out) const override {
        int d = dim();
        for (int i = 0; i < d * d; ++i) out[i] = 0.0;
        double df = fprime(phase(t, x));
        for (int j = 0; j < d; ++j) out[dir_ * d + j] = df * k_[j];
    }
    void hessian(double t, const double* x, double* out) const override {
        int d = dim();
        for (int i = 0; i < d * d * d; ++i) out[i] = 0.0;
        double d2f = -f(phase(t, x));
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m) out[(dir_ * d + j) * d + m] = d2f * k_[j] * k_[m];
    }

    // Closed-form ||.||_{rho,2,s,t} with rho = 1: sup-norms are 1, |k|, |k|^2
    // and the time seminorm is |w| max(1, |k|).
    double norm_rho2() const {
        double kn = 0.0;
        for (double v : k_) kn += v * v;
        kn = std::sqrt(kn);
        return std::max(1.0, std::max(kn, kn * kn)) + std::abs(w_) * std::max(1.0, kn);
    }

private:
    double phase(double t, const double* x) const {
        double p = w_ * t;
        for (std::size_t i = 0; i < k_.size(); ++i) p += k_[i] * x[i];
        return p;
    }
    double f(double p) const { return part_ == Part::Cos ? std::cos(p) : std::sin(p); }
    double fprime(double p) const { return part_ == Part::Cos ? -std::sin(p) : std::cos(p); }

    std::vector<double> k_;
    double w_;
    Part part_;
    int dir_;
};

// A exp(-|x - c|^2 / (2 width^2)) along a fixed direction; time independent.
class GaussianEnvelope final : public FieldImpl {
public:
    GaussianEnvelope(std::vector<double> center, double width, double amplitude, int direction)
        : c_(std::move(center)), w_(width), a_(amplitude), dir_(direction) {
        if (!(width > 0.0)) throw std::invalid_argument("GaussianEnvelope: width must be positive");
        if (dir_ < 0 || dir_ >= dim()) throw std::invalid_argument("GaussianEnvelope: bad direction");
    }
    int dim() const override { return static_cast<int>(c_.size()); }
    void value(double, const double* x, double* out) const override {
        int d = dim();
        for (int i = 0; i < d; ++i) out[i] = 0.0;
        out[dir_] = a_ * env(x);
    }
    void gradient(double, const double* x, double* out) const override {
        int d = dim();
        for (int i = 0; i < d * d; ++i) out[i] = 0.0;
        double e = a_ * env(x);
        for (int j = 0; j < d; ++j) out[dir_ * d + j] = -(x[j] - c_[j]) / (w_ * w_) * e;
    }
    void hessian(double, const double* x, double* out) const override {
        int d = dim();
        for (int i = 0; i < d * d * d; ++i) out[i] = 0.0;
        double e = a_ * env(x);
        double w2 = w_ * w_;
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m) {
                double v = (x[j] - c_[j]) * (x[m] - c_[m]) / (w2 * w2) * e;
                if (j == m) v -= e / w2;
                out[(dir_ * d + j) * d + m] = v;
            }
    }

private:
    double env(const double* x) const {
        double r2 = 0.0;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            double dxi = x[i] - c_[i];
            r2 += dxi * dxi;
        }
        return std::exp(-r2 / (2.0 * w_ * w_));
    }

    std::vector<double> c_;
    double w_, a_;
    int dir_;
};

// phi(u, y) = W(x0 - y, t0 - u) along a fixed direction.
class TranslatedPairPotential final : public FieldImpl {
public:
    TranslatedPairPotential(PairPotential w, std::vector<double> x0, double t0, int direction)
        : w_(std::move(w)), x0_(std::move(x0)), t0_(t0), dir_(direction) {
        if (dir_ < 0 || dir_ >= dim())
            throw std::invalid_argument("TranslatedPairPotential: bad direction");
    }
    int dim() const override { return static_cast<int>(x0_.size()); }
    void value(double t, const double* x, double* out) const override {
        int d = dim();
        std::vector<double> dx(d);
        for (int i = 0; i < d; ++i) { dx[i] = x0_[i] - x[i]; out[i] = 0.0; }
        out[dir_] = w_(dx.data(), d, t0_ - t);
    }
    void gradient(double t, const double* x, double* out) const override {
        int d = dim();
        std::vector<double> dx(d), g(d);
        for (int i = 0; i < d; ++i) { dx[i] = x0_[i] - x[i]; }
        w_.gradient(dx.data(), d, t0_ - t, g.data());
        for (int i = 0; i < d * d; ++i) out[i] = 0.0;
        for (int j = 0; j < d; ++j) out[dir_ * d + j] = -g[j];  // chain rule, y enters as x0 - y
    }
    void hessian(double t, const double* x, double* out) const override {
        int d = dim();
        std::vector<double> dx(d), h(static_cast<std::size_t>(d) * d);
        for (int i = 0; i < d; ++i) dx[i] = x0_[i] - x[i];
        w_.hessian(dx.data(), d, t0_ - t, h.data());
        for (int i = 0; i < d * d * d; ++i) out[i] = 0.0;
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m) out[(dir_ * d + j) * d + m] = h[j * d + m];
    }

private:
    PairPotential w_;
    std::vector<double> x0_;
    double t0_;
    int dir_;
};

class Sum final : public FieldImpl {
public:
    explicit Sum(std::vector<std::shared_ptr<const FieldImpl>> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw std::invalid_argument("Sum: no terms");
        for (const auto& t : terms_)
            if (t->dim() != terms_.front()->dim())
                throw std::invalid_argument("Sum: dimension mismatch");
    }
    int dim() const override { return terms_.front()->dim(); }
    void value(double t, const double* x, double* out) const override {
        accumulate(t, x, out, static_cast<std::size_t>(dim()),
                   [](const FieldImpl& f, double tt, const double* xx, double* o) { f.value(tt, xx, o); });
    }
    void gradient(double t, const double* x, double* out) const override {
        accumulate(t, x, out, static_cast<std::size_t>(dim()) * dim(),
                   [](const FieldImpl& f, double tt, const double* xx, double* o) { f.gradient(tt, xx, o); });
    }
    void hessian(double t, const double* x, double* out) const override {
        accumulate(t, x, out, static_cast<std::size_t>(dim()) * dim() * dim(),
                   [](const FieldImpl& f, double tt, const double* xx, double* o) { f.hessian(tt, xx, o); });
    }

private:
    template <typename Eval>
    void accumulate(double t, const double* x, double* out, std::size_t n, Eval&& ev) const {
        std::vector<double> tmp(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
        for (const auto& term : terms_) {
            ev(*term, t, x, tmp.data());
            for (std::size_t i = 0; i < n; ++i) out[i] += tmp[i];
        }
    }

    std::vector<std::shared_ptr<const FieldImpl>> terms_;
};

// Inner field multiplied by a C^2 time window: exactly zero outside
// [t_lo, t_hi], quintic smoothstep ramps of the given width at both ends.
class TimeWindowed final : public FieldImpl {
public:
    TimeWindowed(std::shared_ptr<const FieldImpl> inner, double t_lo, double t_hi, double ramp)
        : inner_(std::move(inner)), lo_(t_lo), hi_(t_hi), ramp_(ramp) {
        if (!(t_lo < t_hi) || !(ramp > 0.0) || 2.0 * ramp > (t_hi - t_lo))
            throw std::invalid_argument("TimeWindowed: bad window");
    }
    int dim() const override { return inner_->dim(); }
    void value(double t, const double* x, double* out) const override {
        double s = window(t);
        if (s == 0.0) {
            for (int i = 0; i < dim(); ++i) out[i] = 0.0;
            return;
        }
        inner_->value(t, x, out);
        for (int i = 0; i < dim(); ++i) out[i] *= s;
    }
    void gradient(double t, const double* x, double* out) const override {
        double s = window(t);
        int d = dim();
        if (s == 0.0) {
            for (int i = 0; i < d * d; ++i) out[i] = 0.0;
            return;
        }
        inner_->gradient(t, x, out);
        for (int i = 0; i < d * d; ++i) out[i] *= s;
    }
    void hessian(double t, const double* x, double* out) const override {
        double s = window(t);
        int d = dim();
        if (s == 0.0) {
            for (int i = 0; i < d * d * d; ++i) out[i] = 0.0;
            return;
        }
        inner_->hessian(t, x, out);
        for (int i = 0; i < d * d * d; ++i) out[i] *= s;
    }

private:
    double window(double t) const {
        if (t <= lo_ || t >= hi_) return 0.0;
        double s = 1.0;
        if (t < lo_ + ramp_) s = smooth((t - lo_) / ramp_);
        else if (t > hi_ - ramp_) s = smooth((hi_ - t) / ramp_);
        return s;
    }
    static double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

    std::shared_ptr<const FieldImpl> inner_;
    double lo_, hi_, ramp_;
};

} // namespace fields

inline TestField make_constant(std::vector<double> c) {
    return TestField(std::make_shared<fields::Constant>(std::move(c)), 1.0);
}
inline TestField make_linear_coordinate(int d, int i, int j) {
    return TestField(std::make_shared<fields::LinearCoordinate>(d, i, j), 1.0);
}
inline TestField make_fourier_mode(std::vector<double> k, double w,
                                   fields::FourierMode::Part part, int direction) {
    return TestField(std::make_shared<fields::FourierMode>(std::move(k), w, part, direction), 1.0);
}
inline TestField make_gaussian_envelope(std::vector<double> c, double width, double amp, int dir) {
    return TestField(std::make_shared<fields::GaussianEnvelope>(std::move(c), width, amp, dir), 1.0);
}
inline TestField make_translated_pair_potential(PairPotential w, std::vector<double> x0, double t0,
                                                int direction) {
    return TestField(
        std::make_shared<fields::TranslatedPairPotential>(std::move(w), std::move(x0), t0, direction),
        1.0);
}
inline TestField make_sum(const std::vector<TestField>& terms) {
    std::vector<std::shared_ptr<const FieldImpl>> impls;
    impls.reserve(terms.size());
    double rho = 1.0;
    for (const auto& t : terms) {
        impls.push_back(t.impl_ptr());
        rho = std::min(rho, t.rho());
    }
    return TestField(std::make_shared<fields::Sum>(std::move(impls)), rho);
}
inline TestField make_time_windowed(const TestField& inner, double t_lo, double t_hi, double ramp) {
    return TestField(std::make_shared<fields::TimeWindowed>(inner.impl_ptr(), t_lo, t_hi, ramp),
                     inner.rho());
}

// Lattice-based estimate of ||phi||_{rho,2,s,t} =
//   sup_x [ sup_u max_k |grad^k phi| + sup_{u,v} max_{k=0,1} |...|/|u-v|^rho ].
// The sup is sampled on a finite lattice, so the result is a lower bound of
// the sup; it is used in reported bounds only.
struct NormLattice {
    double space_halfwidth = 4.0;
    int space_points = 17;  // per axis
    int time_points = 9;
};

inline double field_norm_rho2(const TestField& phi, double s, double t,
                              const NormLattice& lat = NormLattice{}) {
    if (auto fm = dynamic_cast<const fields::FourierMode*>(&phi.impl()))
        return fm->norm_rho2();
    int d = phi.dim();
    if (d > 3) throw std::invalid_argument("field_norm_rho2: lattice estimate supports d <= 3");
    std::vector<double> val(d), grad(static_cast<std::size_t>(d) * d),
        hess(static_cast<std::size_t>(d) * d * d);
    std::vector<double> x(d);
    double sup_static = 0.0, sup_holder = 0.0;
    int npts = 1;
    for (int i = 0; i < d; ++i) npts *= lat.space_points;
    std::vector<double> prev_val(d), prev_grad(static_cast<std::size_t>(d) * d);
    for (int p = 0; p < npts; ++p) {
        int rem = p;
        for (int i = 0; i < d; ++i) {
            int idx = rem % lat.space_points;
            rem /= lat.space_points;
            x[i] = -lat.space_halfwidth +
                   2.0 * lat.space_halfwidth * idx / std::max(1, lat.space_points - 1);
        }
        double prev_u = s;
        for (int q = 0; q < lat.time_points; ++q) {
            double u = s + (t - s) * q / std::max(1, lat.time_points - 1);
            phi.value(u, x.data(), val.data());
            phi.gradient(u, x.data(), grad.data());
            phi.hessian(u, x.data(), hess.data());
            double m = 0.0;
            for (double v : val) m = std::max(m, std::abs(v));
            for (double v : grad) m = std::max(m, std::abs(v));
            for (double v : hess) m = std::max(m, std::abs(v));
            sup_static = std::max(sup_static, m);
            if (q > 0 && u > prev_u) {
                double dnorm = std::pow(u - prev_u, phi.rho());
                double mh = 0.0;
                for (int i = 0; i < d; ++i) mh = std::max(mh, std::abs(val[i] - prev_val[i]));
                for (int i = 0; i < d * d; ++i) mh = std::max(mh, std::abs(grad[i] - prev_grad[i]));
                sup_holder = std::max(sup_holder, mh / dnorm);
            }
            prev_val = val;
            prev_grad = grad;
            prev_u = u;
        }
    }
    return sup_static + sup_holder;
}

// ||phi||_{D_alpha} = sup_k (1+|k|)^alpha ||phi||_{rho,2,k,k+1}, the sup taken
// over integer windows in [-window_range, window_range). Each window is
// evaluated independently.
inline double field_norm_dalpha(const TestField& phi, double alpha, int window_range,
                                const NormLattice& lat = NormLattice{}) {
    if (!(alpha > 1.0)) throw std::invalid_argument("field_norm_dalpha: need alpha > 1");
    double sup = 0.0;
    for (int k = -window_range; k < window_range; ++k) {
        double w = std::pow(1.0 + std::abs(static_cast<double>(k)), alpha);
        sup = std::max(sup, w * field_norm_rho2(phi, k, k + 1.0, lat));
    }
    return sup;
}

} // namespace pathgibbs
