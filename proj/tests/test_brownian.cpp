#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pathgibbs/n_functional.hpp"
#include "pathgibbs/rng.hpp"
#include "pathgibbs/rough_path.hpp"
#include "pathgibbs/sampler.hpp"
#include "pathgibbs/stats.hpp"

using namespace pathgibbs;

TEST_CASE("rng: identical (seed, stream) reproduces bit-for-bit; streams differ") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        auto va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);

    RngStream g1(5, 0), g2(5, 0);
    for (int i = 0; i < 100; ++i) CHECK(g1.next_gaussian() == g2.next_gaussian());
}

TEST_CASE("rng: uniform and gaussian moments") {
    RngStream rng(123, 0);
    std::vector<double> us, gs;
    for (int i = 0; i < 200000; ++i) us.push_back(rng.next_double());
    for (int i = 0; i < 200000; ++i) gs.push_back(rng.next_gaussian());
    auto mu = mean_se(us);
    CHECK(std::abs(mu.mean - 0.5) < 4.0 * mu.se);
    auto mg = mean_se(gs);
    CHECK(std::abs(mg.mean) < 4.0 * mg.se);
    double var = 0.0;
    for (double g : gs) var += g * g;
    var /= static_cast<double>(gs.size());
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("sample: bridge endpoints are hit exactly") {
    PathLawSpec spec;
    spec.law = LawBridge{{0.4, -1.0}, {0.4, -1.0}};
    spec.t0 = -1.0;
    spec.t1 = 3.0;
    spec.level = 7;
    spec.dim = 2;
    RngStream rng(1, 0);
    for (int rep = 0; rep < 20; ++rep) {
        auto p = sample(spec, rng);
        CHECK(p.at(0, 0) == 0.4);
        CHECK(p.at(0, 1) == -1.0);
        CHECK(p.at(p.steps(), 0) == 0.4);
        CHECK(p.at(p.steps(), 1) == -1.0);
    }
}

TEST_CASE("sample: BM increment variance matches dt within 2 percent") {
    PathLawSpec spec;
    spec.law = LawBM{{0.0}};
    spec.level = 4;
    spec.dim = 1;
    RngStream rng(2, 0);
    std::vector<double> inc2;
    while (inc2.size() < 100000) {
        auto p = sample(spec, rng);
        for (std::size_t k = 0; k < p.steps(); ++k) {
            double d = p.at(k + 1, 0) - p.at(k, 0);
            inc2.push_back(d * d);
        }
    }
    double dt = 1.0 / 16.0;
    auto m = mean_se(inc2);
    CHECK(m.mean > dt * 0.98);
    CHECK(m.mean < dt * 1.02);
}

TEST_CASE("sample: OU stationary lag-1 autocovariance is e^{-1}/2 within 5 percent") {
    PathLawSpec spec;
    spec.law = LawOU{true, {}};
    spec.t0 = 0.0;
    spec.t1 = 4.0;
    spec.level = 2;  // unit grid spacing
    spec.dim = 1;
    RngStream rng(3, 0);
    std::vector<double> prods;
    while (prods.size() < 100000) {
        auto p = sample(spec, rng);
        for (std::size_t k = 0; k < p.steps(); ++k) prods.push_back(p.at(k, 0) * p.at(k + 1, 0));
    }
    double expect = 0.5 * std::exp(-1.0);
    auto m = mean_se(prods);
    CHECK(std::abs(m.mean - expect) < 0.05 * expect);
}

TEST_CASE("sample: bridge midpoint variance is 1/4 within 5 percent") {
    PathLawSpec spec;
    spec.law = LawBridge{{0.0}, {0.0}};
    spec.level = 4;
    spec.dim = 1;
    RngStream rng(4, 0);
    std::vector<double> mids;
    for (int i = 0; i < 100000; ++i) {
        auto p = sample(spec, rng);
        double m = p.at(p.steps() / 2, 0);
        mids.push_back(m * m);
    }
    auto m = mean_se(mids);
    CHECK(std::abs(m.mean - 0.25) < 0.05 * 0.25);
}

TEST_CASE("sample: BM subsampled to level L-1 has the level L-1 law (KS)") {
    PathLawSpec fine;
    fine.law = LawBM{{0.0}};
    fine.level = 6;
    fine.dim = 1;
    PathLawSpec coarse = fine;
    coarse.level = 5;
    RngStream r1(5, 0), r2(5, 1);
    std::vector<double> inc_sub, inc_direct;
    for (int rep = 0; rep < 400; ++rep) {
        auto pf = sample(fine, r1).subsample(5);
        auto pc = sample(coarse, r2);
        for (std::size_t k = 0; k < pf.steps(); ++k) {
            inc_sub.push_back(pf.at(k + 1, 0) - pf.at(k, 0));
            inc_direct.push_back(pc.at(k + 1, 0) - pc.at(k, 0));
        }
    }
    CHECK(ks_two_sample_pvalue(inc_sub, inc_direct) > 0.001);
}

TEST_CASE("sample: stationary OU is reversible (marginals and lag covariance)") {
    PathLawSpec spec;
    spec.law = LawOU{true, {}};
    spec.t0 = 0.0;
    spec.t1 = 2.0;
    spec.level = 5;
    spec.dim = 1;
    RngStream rng(6, 0);
    std::vector<double> fwd_prod, rev_prod, fwd_val, rev_val;
    for (int i = 0; i < 40000; ++i) {
        auto p = sample(spec, rng);
        auto q = p.reversed();
        std::size_t lag = p.steps() / 2;
        fwd_prod.push_back(p.at(0, 0) * p.at(lag, 0));
        rev_prod.push_back(q.at(0, 0) * q.at(lag, 0));
        fwd_val.push_back(p.at(3, 0));
        rev_val.push_back(q.at(3, 0));
    }
    auto mf = mean_se(fwd_prod), mr = mean_se(rev_prod);
    CHECK(std::abs(mf.mean - mr.mean) < 3.0 * std::sqrt(mf.se * mf.se + mr.se * mr.se));
    CHECK(ks_two_sample_pvalue(fwd_val, rev_val) > 0.001);
}

TEST_CASE("ou bridge: endpoints exact and midpoint marginal matches closed form") {
    RngStream rng(7, 0);
    double x = 0.8, y = -0.3, b = 2.0;
    std::vector<double> mids;
    for (int i = 0; i < 60000; ++i) {
        auto p = sample_ou_bridge({x}, {y}, 0.0, b, 4, rng);
        CHECK(p.at(0, 0) == x);
        CHECK(p.at(p.steps(), 0) == y);
        mids.push_back(p.at(p.steps() / 2, 0));
    }
    double mean, var;
    ou_bridge_marginal(x, y, b, b / 2.0, mean, var);
    auto m = mean_se(mids);
    CHECK(std::abs(m.mean - mean) < 4.0 * m.se);
    double evar = 0.0;
    for (double v : mids) evar += (v - mean) * (v - mean);
    evar /= static_cast<double>(mids.size());
    CHECK(std::abs(evar - var) < 0.05 * var);
}

TEST_CASE("ou bridge: matches endpoint-conditioned stationary OU in law (KS)") {
    RngStream rng(8, 0);
    double b = 1.0;
    std::vector<double> bridge_mid, cond_mid;
    for (int i = 0; i < 30000; ++i) {
        auto p = sample_ou_bridge({0.0}, {0.0}, 0.0, b, 3, rng);
        bridge_mid.push_back(p.at(4, 0));
    }
    PathLawSpec spec;
    spec.law = LawOU{true, {}};
    spec.t0 = 0.0;
    spec.t1 = b;
    spec.level = 3;
    spec.dim = 1;
    RngStream rng2(9, 0);
    while (cond_mid.size() < 3000) {
        auto p = sample(spec, rng2);
        if (std::abs(p.at(0, 0)) < 0.05 && std::abs(p.at(p.steps(), 0)) < 0.05)
            cond_mid.push_back(p.at(4, 0));
    }
    // narrow-bin endpoint conditioning smears the law slightly; KS at the
    // 0.1 percent gate still separates real sampler bugs
    CHECK(ks_two_sample_pvalue(bridge_mid, cond_mid) > 0.001);
}

TEST_CASE("n_functional: zero for constant paths, monotone under refinement") {
    GridPath c(0.0, 1.0, 8, 1);
    for (std::size_t k = 0; k < c.points(); ++k) c.at(k, 0) = 2.0;
    auto crp = lift(c, LiftScheme::ItoLift);
    CHECK(n_functional(crp, 0.0, 1.0, 0.4).value == 0.0);

    PathLawSpec spec;
    spec.law = LawBM{{0.0}};
    spec.level = 9;
    spec.dim = 1;
    RngStream rng(10, 0);
    auto p = sample(spec, rng);
    auto fine = lift(p, LiftScheme::ItoLift);
    auto coarse = lift(p.subsample(6), LiftScheme::ItoLift);
    CHECK(n_functional(fine, 0.0, 1.0, 0.4).value >= n_functional(coarse, 0.0, 1.0, 0.4).value);
    CHECK_THROWS(n_functional(fine, 0.0, 0.3, 0.4));  // off-grid endpoint
}

TEST_CASE("n_functional: E[N^3] stable across independent seed batches") {
    auto batch_mean = [](std::uint64_t stream) {
        PathLawSpec spec;
        spec.law = LawBM{{0.0}};
        spec.level = 12;
        spec.dim = 1;
        std::vector<double> n3;
        for (int i = 0; i < 200; ++i) {
            RngStream rng(77, stream * 1000 + i);
            auto rp = lift(sample(spec, rng), LiftScheme::ItoLift);
            double n = n_functional(rp, 0.0, 1.0, 0.4).value;
            n3.push_back(n * n * n);
        }
        return mean_se(n3).mean;
    };
    double m1 = batch_mean(1), m2 = batch_mean(2);
    CHECK(std::abs(m1 - m2) < 0.10 * std::max(m1, m2));
}

TEST_CASE("cal_n: fixtures and seed reproducibility") {
    GridPath c(0.0, 1.0, 6, 1);
    for (std::size_t k = 0; k < c.points(); ++k) c.at(k, 0) = 0.0;
    auto crp = lift(c, LiftScheme::ItoLift);
    std::vector<std::pair<int, NFunctional>> zeros;
    for (int k = -3; k <= 3; ++k) zeros.push_back({k, n_functional(crp, 0.0, 1.0, 0.4)});
    CHECK(cal_n(zeros, 2.0, 3.0).value == 0.0);
    CHECK(cal_n(zeros, 2.0, 3.0).tail_weight > 0.0);

    PathLawSpec spec;
    spec.law = LawOU{true, {}};
    spec.level = 7;
    spec.dim = 1;
    RngStream rng(11, 0);
    auto rp = lift(sample(spec, rng), LiftScheme::ItoLift);
    auto n0 = n_functional(rp, 0.0, 1.0, 0.4);
    auto single = cal_n({{0, n0}}, 2.0, 3.0);
    CHECK(std::abs(single.value - std::pow(n0.value, 3.0)) < 1e-12);

    // OU windows k = -8..8: value reproducible across seeds within 2 SE
    auto window_value = [](std::uint64_t seed) {
        std::vector<double> vals;
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<std::pair<int, NFunctional>> windows;
            for (int k = -8; k <= 8; ++k) {
                PathLawSpec s;
                s.law = LawOU{true, {}};
                s.t0 = static_cast<double>(k);
                s.t1 = static_cast<double>(k) + 1.0;
                s.level = 6;
                s.dim = 1;
                RngStream r(seed, static_cast<std::uint64_t>(rep) * 64 +
                                      static_cast<std::uint64_t>(k + 8));
                windows.push_back(
                    {k, n_functional(lift(sample(s, r), LiftScheme::ItoLift), s.t0, s.t1, 0.4)});
            }
            vals.push_back(cal_n(windows, 2.0, 3.0).value);
        }
        return mean_se(vals);
    };
    auto v1 = window_value(101), v2 = window_value(202);
    CHECK(std::abs(v1.mean - v2.mean) < 2.0 * std::sqrt(v1.se * v1.se + v2.se * v2.se));
    CHECK_THROWS(cal_n({}, 2.0, 3.0));
}

TEST_CASE("PathLawSpec round-trips through JSON") {
    PathLawSpec spec;
    spec.law = LawBridge{{1.0, 2.0}, {-0.5, 0.25}};
    spec.t0 = -2.0;
    spec.t1 = 2.0;
    spec.level = 9;
    spec.dim = 2;
    auto j = spec.to_json();
    auto back = PathLawSpec::from_json(j);
    CHECK(back.to_json() == j);

    PathLawSpec ou;
    ou.law = LawOU{true, {}};
    CHECK(PathLawSpec::from_json(ou.to_json()).to_json() == ou.to_json());

    auto bad = spec.to_json();
    bad["law"] = "levy";
    CHECK_THROWS(PathLawSpec::from_json(bad));
}

TEST_CASE("sample: invalid specs are rejected") {
    PathLawSpec s;
    s.law = LawBM{{0.0, 0.0}};  // dim mismatch
    s.dim = 1;
    RngStream rng(12, 0);
    CHECK_THROWS(sample(s, rng));
    PathLawSpec t;
    t.law = LawBM{{0.0}};
    t.t0 = 1.0;
    t.t1 = 1.0;
    CHECK_THROWS(sample(t, rng));
}
