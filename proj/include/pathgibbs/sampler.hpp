#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pathgibbs/grid_path.hpp"
#include "pathgibbs/rng.hpp"

namespace pathgibbs {

// Exact samplers. All laws are sampled without discretization error at the
// grid points:
//   BM      - iid N(0, dt) increments from a start point,
//   Bridge  - Brownian bridge by Gaussian conditioning of a fresh BM,
//   OU      - the harmonic reference diffusion dX = -X dt + dB, an exact
//             AR(1) recursion; stationary law N(0, 1/2) per component.

struct LawBM {
    std::vector<double> start;
};
struct LawBridge {
    std::vector<double> x;
    std::vector<double> y;
};
struct LawOU {
    bool stationary = true;
    std::vector<double> start;  // used when stationary == false
};

struct PathLawSpec {
    std::variant<LawBM, LawBridge, LawOU> law;
    double t0 = 0.0;
    double t1 = 1.0;
    int level = 8;
    int dim = 1;

    void validate() const {
        if (!(t0 < t1)) throw std::invalid_argument("PathLawSpec: need t0 < t1");
        if (dim < 1) throw std::invalid_argument("PathLawSpec: bad dim");
        if (level < 0 || level > 24) throw std::invalid_argument("PathLawSpec: bad level");
        auto check_point = [&](const std::vector<double>& v, const char* what) {
            if (static_cast<int>(v.size()) != dim)
                throw std::invalid_argument(std::string("PathLawSpec: ") + what +
                                            " has wrong dimension");
        };
        if (auto* bm = std::get_if<LawBM>(&law)) check_point(bm->start, "BM start");
        if (auto* br = std::get_if<LawBridge>(&law)) {
            check_point(br->x, "bridge start");
            check_point(br->y, "bridge end");
        }
        if (auto* ou = std::get_if<LawOU>(&law))
            if (!ou->stationary) check_point(ou->start, "OU start");
    }

    nlohmann::json to_json() const;
    static PathLawSpec from_json(const nlohmann::json& j);
};

inline GridPath sample(const PathLawSpec& spec, RngStream& rng) {
    spec.validate();
    GridPath p(spec.t0, spec.t1, spec.level, spec.dim);
    const std::size_t n = p.steps();
    const int d = spec.dim;
    const double dt = p.dt();

    if (const auto* bm = std::get_if<LawBM>(&spec.law)) {
        double sd = std::sqrt(dt);
        for (int i = 0; i < d; ++i) p.at(0, i) = bm->start[i];
        for (std::size_t k = 0; k < n; ++k)
            for (int i = 0; i < d; ++i)
                p.at(k + 1, i) = p.at(k, i) + sd * rng.next_gaussian();
        return p;
    }

    if (const auto* br = std::get_if<LawBridge>(&spec.law)) {
        // X_{t_j} = x + B_{t_j} - ((t_j - t0)/(T - t0)) (B_T - (y - x))
        // with B a fresh BM started at 0.
        double sd = std::sqrt(dt);
        std::vector<double> b((n + 1) * d, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (int i = 0; i < d; ++i)
                b[(k + 1) * d + i] = b[k * d + i] + sd * rng.next_gaussian();
        double total = spec.t1 - spec.t0;
        for (std::size_t k = 0; k <= n; ++k) {
            double frac = (static_cast<double>(k) * dt) / total;
            for (int i = 0; i < d; ++i)
                p.at(k, i) = br->x[i] + b[k * d + i] -
                             frac * (b[n * d + i] - (br->y[i] - br->x[i]));
        }
        // endpoints exact by construction; pin them against rounding of frac
        for (int i = 0; i < d; ++i) {
            p.at(0, i) = br->x[i];
            p.at(n, i) = br->y[i];
        }
        return p;
    }

    const auto& ou = std::get<LawOU>(spec.law);
    double decay = std::exp(-dt);
    double sd_step = std::sqrt((1.0 - std::exp(-2.0 * dt)) / 2.0);
    if (ou.stationary) {
        double sd0 = std::sqrt(0.5);
        for (int i = 0; i < d; ++i) p.at(0, i) = sd0 * rng.next_gaussian();
    } else {
        for (int i = 0; i < d; ++i) p.at(0, i) = ou.start[i];
    }
    for (std::size_t k = 0; k < n; ++k)
        for (int i = 0; i < d; ++i)
            p.at(k + 1, i) = decay * p.at(k, i) + sd_step * rng.next_gaussian();
    return p;
}

// OU variance over a horizon: Var(X_t | X_0) = (1 - e^{-2t})/2 per component.
inline double ou_variance(double t) { return (1.0 - std::exp(-2.0 * t)) / 2.0; }

// Exact bridge of the harmonic reference diffusion from x at t0 to y at t1
// (the nu-bridge): sequential Gaussian conditioning,
//   X_{t+dt} | X_t = a, X_{t1} = y  ~  N(m, v),
//   m = [ e^{-dt} a / v_dt + e^{-r} y / v_r ] / P,  v = 1/P,
//   P = 1/v_dt + e^{-2r}/v_r,  r = time remaining after the step.
inline GridPath sample_ou_bridge(const std::vector<double>& x, const std::vector<double>& y,
                                 double t0, double t1, int level, RngStream& rng) {
    const int d = static_cast<int>(x.size());
    if (static_cast<int>(y.size()) != d)
        throw std::invalid_argument("sample_ou_bridge: endpoint dimension mismatch");
    GridPath p(t0, t1, level, d);
    const std::size_t n = p.steps();
    const double dt = p.dt();
    double v_dt = ou_variance(dt);
    double e_dt = std::exp(-dt);
    for (int i = 0; i < d; ++i) p.at(0, i) = x[i];
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double r = (t1 - t0) - static_cast<double>(k + 1) * dt;
        double v_r = ou_variance(r);
        double e_r = std::exp(-r);
        double prec = 1.0 / v_dt + e_r * e_r / v_r;
        double sd = std::sqrt(1.0 / prec);
        for (int i = 0; i < d; ++i) {
            double m = (e_dt * p.at(k, i) / v_dt + e_r * y[i] / v_r) / prec;
            p.at(k + 1, i) = m + sd * rng.next_gaussian();
        }
    }
    for (int i = 0; i < d; ++i) p.at(n, i) = y[i];
    return p;
}

// Closed-form marginal of the OU bridge at elapsed time t in (0, b):
// mean = (e^{-t} x v_{b-t} + e^{-(b-t)} y v_t) / v_b, var = v_t v_{b-t} / v_b.
inline void ou_bridge_marginal(double x, double y, double b, double t, double& mean, double& var) {
    double vt = ou_variance(t), vr = ou_variance(b - t), vb = ou_variance(b);
    mean = (std::exp(-t) * x * vr + std::exp(-(b - t)) * y * vt) / vb;
    var = vt * vr / vb;
}

inline nlohmann::json PathLawSpec::to_json() const {
    nlohmann::json j;
    j["interval"] = {t0, t1};
    j["level"] = level;
    j["dim"] = dim;
    if (const auto* bm = std::get_if<LawBM>(&law)) {
        j["law"] = "bm";
        j["start"] = bm->start;
    } else if (const auto* br = std::get_if<LawBridge>(&law)) {
        j["law"] = "bridge";
        j["x"] = br->x;
        j["y"] = br->y;
    } else {
        const auto& ou = std::get<LawOU>(law);
        j["law"] = "ou";
        j["stationary"] = ou.stationary;
        if (!ou.stationary) j["start"] = ou.start;
    }
    return j;
}

inline PathLawSpec PathLawSpec::from_json(const nlohmann::json& j) {
    PathLawSpec s;
    s.t0 = j.at("interval").at(0).get<double>();
    s.t1 = j.at("interval").at(1).get<double>();
    s.level = j.at("level").get<int>();
    s.dim = j.at("dim").get<int>();
    std::string law = j.at("law").get<std::string>();
    if (law == "bm") {
        s.law = LawBM{j.at("start").get<std::vector<double>>()};
    } else if (law == "bridge") {
        s.law = LawBridge{j.at("x").get<std::vector<double>>(),
                          j.at("y").get<std::vector<double>>()};
    } else if (law == "ou") {
        LawOU ou;
        ou.stationary = j.at("stationary").get<bool>();
        if (!ou.stationary) ou.start = j.at("start").get<std::vector<double>>();
        s.law = ou;
    } else {
        throw std::invalid_argument("PathLawSpec: unknown law " + law);
    }
    s.validate();
    return s;
}

} // namespace pathgibbs
