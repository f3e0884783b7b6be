#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pathgibbs {

// Gauss-Hermite nodes/weights for weight e^{-x^2} (physicists' convention),
// by Newton iteration on the three-term recurrence. int f(x) e^{-x^2} dx
// ~= sum w_i f(x_i).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussHermite gauss_hermite(int n) {
    if (n < 1 || n > 200) throw std::invalid_argument("gauss_hermite: bad order");
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * gh.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * gh.nodes[1];
        else
            z = 2.0 * z - gh.nodes[i - 2];
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        gh.nodes[i] = z;
        gh.nodes[n - 1 - i] = -z;
        gh.weights[i] = 2.0 / (pp * pp);
        gh.weights[n - 1 - i] = gh.weights[i];
    }
    return gh;
}

struct HarmonicRef {
    // V(x) = |x|^2/2 - d/2; ground state Psi(x) = pi^{-d/4} e^{-|x|^2/2},
    // E = 0, spectral gap Lambda = 1, stationary law omega = N(0, I/2).
    int dim = 1;

    double v(const double* x) const {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        return 0.5 * r2 - 0.5 * dim;
    }
    double ground_state(const double* x) const {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        return std::pow(3.141592653589793, -0.25 * dim) * std::exp(-0.5 * r2);
    }
    double omega_density(const double* x) const {
        double g = ground_state(x);
        return g * g;
    }
    static constexpr double energy() { return 0.0; }
    static constexpr double spectral_gap() { return 1.0; }
};

struct ConfiningPower {
    // V(x) = C1 |x|^s + C3 with s > 2; no spectral data attached. The
    // two-sided growth condition holds with a = b = s (and C2 = C1, C4 = C3).
    int dim = 1;
    double s = 4.0;
    double c1 = 1.0;
    double c3 = 0.0;

    double v(const double* x) const {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        return c1 * std::pow(std::sqrt(r2), s) + c3;
    }
    bool two_sided_condition() const { return s > 2.0 && s < 2.0 * s - 2.0 && c1 > 0.0; }
};

class PotentialExt {
public:
    PotentialExt(HarmonicRef h) : fam_(h) {}
    PotentialExt(ConfiningPower c) : fam_(c) {
        if (!(std::get<ConfiningPower>(fam_).s > 2.0))
            throw std::invalid_argument("ConfiningPower: need s > 2");
    }

    int dim() const {
        return std::visit([](const auto& f) { return f.dim; }, fam_);
    }
    bool is_harmonic() const { return std::holds_alternative<HarmonicRef>(fam_); }
    const HarmonicRef& harmonic() const {
        if (!is_harmonic()) throw std::logic_error("PotentialExt: spectral data needs HarmonicRef");
        return std::get<HarmonicRef>(fam_);
    }

    double v(const double* x) const {
        return std::visit([&](const auto& f) { return f.v(x); }, fam_);
    }

    nlohmann::json to_json() const {
        if (is_harmonic())
            return nlohmann::json{{"family", "harmonic_ref"}, {"dim", dim()}};
        const auto& c = std::get<ConfiningPower>(fam_);
        return nlohmann::json{
            {"family", "confining_power"}, {"dim", c.dim}, {"s", c.s}, {"C1", c.c1}, {"C3", c.c3}};
    }

    static PotentialExt from_json(const nlohmann::json& j) {
        std::string fam = j.at("family").get<std::string>();
        if (fam == "harmonic_ref") return PotentialExt(HarmonicRef{j.at("dim").get<int>()});
        if (fam == "confining_power")
            return PotentialExt(ConfiningPower{j.at("dim").get<int>(), j.at("s").get<double>(),
                                               j.at("C1").get<double>(), j.at("C3").get<double>()});
        throw std::invalid_argument("PotentialExt: unknown family " + fam);
    }

private:
    std::variant<HarmonicRef, ConfiningPower> fam_;
};

// Transition density of the harmonic reference diffusion relative to its
// stationary law omega (Mehler kernel):
//   pi_t(x,y) = (1 - e^{-2t})^{-d/2}
//               exp( -( e^{-2t}(|x|^2+|y|^2) - 2 e^{-t} x.y ) / (1 - e^{-2t}) ).
// Verified against the truncated Hermite eigenfunction series in the tests.
inline double mehler_pi(const HarmonicRef& ext, double t, const double* x, const double* y) {
    if (!(t > 0.0)) throw std::invalid_argument("mehler_pi: need t > 0");
    int d = ext.dim;
    double e = std::exp(-t);
    double m = 1.0 - e * e;  // 1 - e^{-2t}
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (int i = 0; i < d; ++i) {
        xx += x[i] * x[i];
        yy += y[i] * y[i];
        xy += x[i] * y[i];
    }
    return std::pow(m, -0.5 * d) * std::exp(-(e * e * (xx + yy) - 2.0 * e * xy) / m);
}

inline double mehler_pi(const HarmonicRef& ext, double t, double x, double y) {
    if (ext.dim != 1) throw std::invalid_argument("mehler_pi: scalar overload needs dim 1");
    return mehler_pi(ext, t, &x, &y);
}

// int f(y) d omega(y) in one dimension by Gauss-Hermite quadrature:
// omega = N(0, 1/2) has density pi^{-1/2} e^{-y^2}.
template <typename F>
double omega_integral_1d(F&& f, int quad_order = 40) {
    GaussHermite gh = gauss_hermite(quad_order);
    double s = 0.0;
    for (int i = 0; i < quad_order; ++i) s += gh.weights[i] * f(gh.nodes[i]);
    return s / std::sqrt(3.141592653589793);
}

} // namespace pathgibbs
