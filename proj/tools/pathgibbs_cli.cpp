// Batch driver: every pipeline is a subcommand taking JSON config in and
// writing CSV/JSON artifacts plus a run manifest. All numerics live in the
// library; this file only parses, dispatches and serializes.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathgibbs/pathgibbs.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace pathgibbs;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitGateFailure = 1;
constexpr int kExitSchema = 2;
constexpr int kExitIo = 3;

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GateFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_fields(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw SchemaError(where + ": unknown field '" + it.key() + "'");
    }
}

struct RunContext {
    std::string subcommand;
    json config;
    std::uint64_t seed = 0;
    int workers = 1;
    fs::path out_dir = ".";
    std::map<std::string, std::string> output_checksums;
    std::vector<std::string> gate_failures;

    void write_text(const std::string& name, const std::string& content) {
        fs::path p = out_dir / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output " + p.string());
        os << content;
        os.close();
        output_checksums[name] = hex64(fnv1a64(content));
    }

    void gate(bool ok, const std::string& what) {
        if (!ok) gate_failures.push_back(what);
    }
};

void write_manifest(RunContext& ctx, double wall_seconds) {
    json m;
    m["subcommand"] = ctx.subcommand;
    m["config_hash"] = hex64(fnv1a64(ctx.config.dump()));
    m["version"] = kVersion;
    m["wall_time_s"] = wall_seconds;
    m["seed"] = ctx.seed;
    m["workers"] = ctx.workers;
    m["outputs"] = json::object();
    for (const auto& [name, sum] : ctx.output_checksums) m["outputs"][name] = sum;
    m["gate_failures"] = ctx.gate_failures;
    fs::path p = ctx.out_dir / "manifest.json";
    std::ofstream os(p, std::ios::binary);
    os << m.dump(2) << "\n";
}

PathLawSpec law_from_config(const json& j) {
    if (!j.contains("law")) {  // default: planar BM on [0,1] at level 7
        PathLawSpec s;
        s.law = LawBM{{0.0, 0.0}};
        s.level = 7;
        s.dim = 2;
        return s;
    }
    try {
        return PathLawSpec::from_json(j);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("path law: ") + e.what());
    }
}

TestField field_from_config(const json& j, int dim) {
    std::string family = j.at("family").get<std::string>();
    if (family == "constant") {
        require_fields(j, {"family", "c"}, "field");
        return make_constant(j.at("c").get<std::vector<double>>());
    }
    if (family == "linear_coordinate") {
        require_fields(j, {"family", "i", "j"}, "field");
        return make_linear_coordinate(dim, j.at("i").get<int>(), j.at("j").get<int>());
    }
    if (family == "gaussian_envelope") {
        require_fields(j, {"family", "center", "width", "amplitude", "direction"}, "field");
        return make_gaussian_envelope(j.at("center").get<std::vector<double>>(),
                                      j.at("width").get<double>(),
                                      j.at("amplitude").get<double>(),
                                      j.at("direction").get<int>());
    }
    if (family == "fourier_mode") {
        require_fields(j, {"family", "k", "w", "part", "direction"}, "field");
        auto part = j.at("part").get<std::string>() == "sin" ? fields::FourierMode::Part::Sin
                                                             : fields::FourierMode::Part::Cos;
        return make_fourier_mode(j.at("k").get<std::vector<double>>(), j.at("w").get<double>(),
                                 part, j.at("direction").get<int>());
    }
    throw SchemaError("field: unknown family '" + family + "'");
}

LiftScheme scheme_from_string(const std::string& s) {
    if (s == "ito") return LiftScheme::ItoLift;
    if (s == "strat_exact") return LiftScheme::StratExactLift;
    if (s == "strat_trapezoid") return LiftScheme::StratTrapezoidLift;
    throw SchemaError("scheme: expected ito | strat_exact | strat_trapezoid");
}

// --- subcommands -------------------------------------------------------------

void run_sample(RunContext& ctx) {
    require_fields(ctx.config, {"law", "interval", "level", "dim", "start", "x", "y",
                                "stationary", "n_paths", "format"},
                   "sample");
    PathLawSpec law = law_from_config(ctx.config);
    std::size_t n = ctx.config.value("n_paths", std::size_t{1});
    std::string format = ctx.config.value("format", std::string("csv"));
    if (format != "csv" && format != "binary") throw SchemaError("sample: bad format");
    if (format == "csv") {
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng(ctx.seed, i);
            auto p = sample(law, rng);
            std::ostringstream os;
            write_path_csv(p, os);
            ctx.write_text("path_" + std::to_string(i) + ".csv", os.str());
        }
    } else {
        std::ostringstream os(std::ios::binary);
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng(ctx.seed, i);
            auto p = sample(law, rng);
            write_path_binary(p, os);
        }
        ctx.write_text("paths.bin", os.str());
    }
}

void run_lift_check(RunContext& ctx) {
    require_fields(ctx.config, {"law", "interval", "level", "dim", "start", "x", "y",
                                "stationary", "scheme", "n_paths"},
                   "lift-check");
    PathLawSpec law = law_from_config(ctx.config);
    LiftScheme scheme = scheme_from_string(ctx.config.value("scheme", std::string("ito")));
    std::size_t n = ctx.config.value("n_paths", std::size_t{10});
    std::ostringstream os;
    os << "path,certified_bound,sampled_max\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng(ctx.seed, i);
        auto rp = lift(sample(law, rng), scheme);
        double cert = chen_max_defect_certified(rp);
        // sampled triples for the report
        double smax = 0.0;
        RngStream trng(ctx.seed ^ 0xabcdu, i);
        for (int t = 0; t < 2000; ++t) {
            std::size_t a = static_cast<std::size_t>(trng.next_double() * rp.steps());
            std::size_t b = a + static_cast<std::size_t>(trng.next_double() * (rp.steps() - a));
            std::size_t u = a + static_cast<std::size_t>(trng.next_double() * (b - a + 1));
            smax = std::max(smax, chen_defect(rp, a, u, b));
        }
        worst = std::max(worst, std::max(cert, smax));
        os << i << "," << format_double(cert) << "," << format_double(smax) << "\n";
    }
    ctx.write_text("chen_defects.csv", os.str());
    ctx.gate(worst <= 1e-12, "chen defect above 1e-12");
}

void run_integrate(RunContext& ctx) {
    require_fields(ctx.config, {"law", "interval", "level", "dim", "start", "x", "y",
                                "stationary", "scheme", "field", "profile_levels"},
                   "integrate");
    PathLawSpec law = law_from_config(ctx.config);
    LiftScheme scheme = scheme_from_string(ctx.config.value("scheme", std::string("ito")));
    TestField phi = field_from_config(ctx.config.at("field"), law.dim);
    RngStream rng(ctx.seed, 0);
    auto rp = lift(sample(law, rng), scheme);
    double value = rough_integral(rp, phi, 0, rp.steps());
    std::ostringstream os;
    os << "quantity,value\n";
    os << "integral," << format_double(value) << "\n";
    if (ctx.config.contains("profile_levels")) {
        auto levels = ctx.config.at("profile_levels").get<std::vector<int>>();
        auto prof = dyadic_convergence_profile(rp, phi, levels);
        for (std::size_t i = 0; i < prof.size(); ++i)
            os << "profile_diff_L" << levels[i + 1] << "," << format_double(prof[i]) << "\n";
    }
    ctx.write_text("integrate.csv", os.str());
}

void run_energy(RunContext& ctx) {
    require_fields(ctx.config, {"law", "interval", "level", "dim", "start", "x", "y",
                                "stationary", "W", "n_paths", "N_blocks"},
                   "energy");
    PathLawSpec law = law_from_config(ctx.config);
    PairPotential W = ctx.config.contains("W") ? PairPotential::from_json(ctx.config.at("W"))
                                               : PairPotential(1.0, 1.0, 0.5);
    std::size_t n = ctx.config.value("n_paths", std::size_t{10});
    int nb = ctx.config.value("N_blocks", 0);
    PotentialExt ext(HarmonicRef{law.dim});
    std::ostringstream os;
    os << "path,v_energy,w_energy,pair_sum\n";
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng(ctx.seed, i);
        auto p = sample(law, rng);
        auto rp = lift(p, LiftScheme::ItoLift);
        double ve = v_energy(p, ext);
        double we = w_energy(rp, W);
        positive = positive && we >= 0.0;
        double psum = std::numeric_limits<double>::quiet_NaN();
        if (nb >= 2) {
            BlockPartition bp(view_of(p), nb);
            KahanSum acc;
            for (int a = 0; a < nb; ++a)
                for (int b = a + 1; b < nb; ++b) acc.add(w_pair_energy(bp, W, a, b).value);
            psum = acc.value();
        }
        os << i << "," << format_double(ve) << "," << format_double(we) << ","
           << format_double(psum) << "\n";
    }
    ctx.write_text("energy.csv", os.str());
    ctx.gate(positive, "w_energy negative");
}

void run_gibbs(RunContext& ctx) {
    require_fields(ctx.config,
                   {"T", "level", "dim", "lambda", "ext", "W", "reference", "n_paths"},
                   "gibbs");
    json cfg = ctx.config;
    if (!cfg.contains("ext")) cfg["ext"] = PotentialExt(HarmonicRef{1}).to_json();
    if (!cfg.contains("W")) cfg["W"] = PairPotential(1.0, 1.0, 0.5).to_json();
    if (!cfg.contains("reference")) cfg["reference"] = {{"kind", "nu_stationary"}};
    if (!cfg.contains("T")) cfg["T"] = 1.0;
    if (!cfg.contains("level")) cfg["level"] = 6;
    if (!cfg.contains("dim")) cfg["dim"] = 1;
    std::size_t n = cfg.value("n_paths", std::size_t{1000});
    cfg.erase("n_paths");
    GibbsSpec spec;
    try {
        spec = GibbsSpec::from_json(cfg);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("gibbs: ") + e.what());
    }
    auto e = sample_mu_T(spec, n, ctx.seed, ctx.workers);
    json summary;
    summary["z_hat"] = e.z_hat;
    summary["z_se"] = e.z_se;
    summary["ess"] = e.ess;
    summary["ess_collapsed"] = e.ess_collapsed;
    summary["n_paths"] = n;
    ctx.write_text("gibbs_summary.json", summary.dump(2) + "\n");

    std::ostringstream os;
    os << "functional,mean,se\n";
    auto report = [&](const std::string& name, const PathFunctional& f) {
        auto m = e.expectation(f);
        os << name << "," << format_double(m.mean) << "," << format_double(m.se) << "\n";
    };
    report("x0_sq", [](const GridPath& p) {
        double v = p.at(p.index_of_time(0.0), 0);
        return v * v;
    });
    report("x0", [](const GridPath& p) { return p.at(p.index_of_time(0.0), 0); });
    ctx.write_text("gibbs_expectations.csv", os.str());
    ctx.gate(!e.ess_collapsed, "ESS collapse (lambda too large)");
}

void run_cluster(RunContext& ctx) {
    require_fields(ctx.config,
                   {"T", "N", "lambda", "level", "dim", "W", "n_samples", "max_weight", "check"},
                   "cluster");
    double T = ctx.config.value("T", 2.0);
    int N = ctx.config.value("N", 4);
    double lambda = ctx.config.value("lambda", 0.05);
    int level = ctx.config.value("level", 4);
    int dim = ctx.config.value("dim", 1);
    PairPotential W = ctx.config.contains("W") ? PairPotential::from_json(ctx.config.at("W"))
                                               : PairPotential(1.0, 1.0, 0.5);
    std::size_t n = ctx.config.value("n_samples", std::size_t{10000});
    int max_weight = ctx.config.value("max_weight", std::min(N, 6));
    std::string check = ctx.config.value("check", std::string("none"));
    if (check != "none" && check != "z-identity")
        throw SchemaError("cluster: check must be none | z-identity");

    ChiSpec spec{Partition1D(T, N), level, dim, W, lambda};
    auto clusters = enumerate_clusters(spec.part, max_weight);
    auto shared = estimate_activities_shared(clusters, spec, n, ctx.seed, ctx.workers);
    std::ostringstream os;
    write_activity_table(shared.activities, os);
    ctx.write_text("activities.csv", os.str());

    auto zsum = z_cluster_sum(shared.activities);
    json summary;
    summary["n_clusters"] = clusters.size();
    summary["z_cluster_sum"] = zsum.value;
    summary["n_collections"] = zsum.n_collections;
    summary["singletons_only"] = zsum.singletons_only;

    if (check == "z-identity") {
        // direct Monte Carlo of Z under chi against the cluster sum
        HarmonicRef ext{dim};
        std::vector<double> direct(n);
        parallel_for(n, ctx.workers, [&](std::size_t s) {
            RngStream rng(ctx.seed ^ 0x9e3779b9u, s);
            auto cs = sample_chi(spec.part, level, dim, rng);
            ChiPairTable table(cs, W, ext, spec.part.b());
            KahanSum wsum;
            for (int i = 0; i < N; ++i)
                for (int j = i; j < N; ++j) wsum.add((i == j ? 0.5 : 1.0) * table.rect(i, j));
            double pis = 1.0;
            for (int k = 0; k < N; ++k) pis *= table.chain_link(k) + 1.0;
            direct[s] = std::exp(-lambda * wsum.value()) * pis;
        });
        auto md = mean_se(direct);
        double cl_se = zsum.singletons_only ? shared.kappa_total.se : 0.0;
        double pooled = std::sqrt(md.se * md.se + cl_se * cl_se);
        double diff = std::abs(zsum.value - md.mean);
        summary["z_direct"] = md.mean;
        summary["z_direct_se"] = md.se;
        summary["z_cluster_se"] = cl_se;
        summary["diff"] = diff;
        summary["pooled_se"] = pooled;
        ctx.gate(diff <= 3.0 * pooled, "cluster z-identity beyond 3 pooled SE");
    }
    ctx.write_text("cluster_summary.json", summary.dump(2) + "\n");
}

void run_diag(RunContext& ctx) {
    require_fields(ctx.config,
                   {"suite", "level", "n_paths", "dim", "lambda", "n_windows",
                    "paths_per_window", "quantile", "tail_levels", "separations", "window_span",
                    "n_batches", "batch_size"},
                   "diag");
    std::string suite = ctx.config.value("suite", std::string("chen"));
    if (suite == "chen") {
        int level = ctx.config.value("level", 7);
        int dim = ctx.config.value("dim", 2);
        std::size_t n = ctx.config.value("n_paths", std::size_t{10});
        std::ostringstream os;
        os << "path,max_defect\n";
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            PathLawSpec law;
            law.law = LawBM{std::vector<double>(dim, 0.0)};
            law.level = level;
            law.dim = dim;
            RngStream rng(ctx.seed, i);
            auto rp = lift(sample(law, rng), LiftScheme::ItoLift);
            double m = level <= 7 ? chen_max_defect_exhaustive(rp)
                                  : chen_max_defect_certified(rp);
            worst = std::max(worst, m);
            os << i << "," << format_double(m) << "\n";
        }
        ctx.write_text("chen_diag.csv", os.str());
        ctx.gate(worst <= 1e-12, "chen defect above 1e-12");
        return;
    }
    if (suite == "mehler") {
        HarmonicRef h{1};
        std::ostringstream os;
        os << "b,norm_error,sup_dev\n";
        bool ok = true;
        for (double b : {1.0, 2.0, 4.0}) {
            double worst_norm = 0.0;
            for (double x : {-2.0, 0.0, 1.5}) {
                double integral =
                    omega_integral_1d([&](double y) { return mehler_pi(h, b, x, y); });
                worst_norm = std::max(worst_norm, std::abs(integral - 1.0));
            }
            double sup = 0.0;
            for (double x = -1.5; x <= 1.5; x += 0.25)
                for (double y = -1.5; y <= 1.5; y += 0.25)
                    sup = std::max(sup, std::abs(mehler_pi(h, b, x, y) - 1.0));
            ok = ok && worst_norm <= 1e-8;
            os << format_double(b) << "," << format_double(worst_norm) << ","
               << format_double(sup) << "\n";
        }
        ctx.write_text("mehler_diag.csv", os.str());
        ctx.gate(ok, "mehler normalization beyond 1e-8");
        return;
    }
    if (suite == "growth") {
        int n_windows = ctx.config.value("n_windows", 8);
        std::size_t ppw = ctx.config.value("paths_per_window", std::size_t{4000});
        int level = ctx.config.value("level", 6);
        double q = ctx.config.value("quantile", 0.9);
        std::vector<double> tails = ctx.config.contains("tail_levels")
                                        ? ctx.config.at("tail_levels").get<std::vector<double>>()
                                        : std::vector<double>{2.0, 2.5, 3.0};
        auto rep = growth_diagnostic(n_windows, ppw, level, q, tails, ctx.seed, ctx.workers);
        std::ostringstream os;
        os << "window,quantile\n";
        for (std::size_t i = 0; i < rep.window_index.size(); ++i)
            os << rep.window_index[i] << "," << format_double(rep.window_quantile[i]) << "\n";
        os << "fit,slope," << format_double(rep.fit_slope) << "\n";
        os << "fit,r2," << format_double(rep.fit_r2) << "\n";
        for (std::size_t i = 0; i < rep.tail_levels.size(); ++i)
            os << "tail," << format_double(rep.tail_levels[i]) << ","
               << format_double(rep.tail_log_prob[i]) << "\n";
        os << "tail_fit,slope," << format_double(rep.tail_slope) << "\n";
        os << "tail_fit,r2," << format_double(rep.tail_r2) << "\n";
        ctx.write_text("growth_diag.csv", os.str());
        ctx.gate(rep.tail_slope < 0.0 && rep.tail_r2 >= 0.9, "growth tail regression gate");
        return;
    }
    if (suite == "mixing") {
        double lambda = ctx.config.value("lambda", 0.0);
        std::vector<int> seps = ctx.config.contains("separations")
                                    ? ctx.config.at("separations").get<std::vector<int>>()
                                    : std::vector<int>{1, 2, 4};
        int span = ctx.config.value("window_span", 8);
        int lpu = ctx.config.value("level", 3);
        std::size_t n_batches = ctx.config.value("n_batches", std::size_t{12});
        std::size_t batch_size = ctx.config.value("batch_size", std::size_t{2000});
        auto rep = mixing_diagnostic(lambda, PairPotential(1.0, 1.0, 0.5), seps, span, lpu,
                                     n_batches, batch_size, ctx.seed, ctx.workers);
        std::ostringstream os;
        os << "separation,cov_median,cov_mean,cov_se\n";
        for (const auto& row : rep.rows)
            os << row.separation << "," << format_double(row.cov_median) << ","
               << format_double(row.cov_mean) << "," << format_double(row.cov_se) << "\n";
        os << "fit,theta_hat," << format_double(rep.theta_hat) << ",\n";
        ctx.write_text("mixing_diag.csv", os.str());
        ctx.gate(rep.nonincreasing, "mixing medians not nonincreasing");
        return;
    }
    if (suite == "treegraph") {
        RngStream rng(ctx.seed, 0);
        bool ok = true;
        std::ostringstream os;
        os << "r,trial,connected_sum,bound\n";
        for (int r : {3, 4, 5})
            for (int trial = 0; trial < 100; ++trial) {
                std::vector<double> w(static_cast<std::size_t>(r) * (r - 1) / 2);
                for (auto& v : w) v = rng.next_double();
                auto rep = tree_graph_bound_check(r, w);
                ok = ok && rep.holds;
                os << r << "," << trial << "," << format_double(rep.connected_sum) << ","
                   << format_double(rep.product_factor * rep.tree_sum) << "\n";
            }
        ctx.write_text("treegraph_diag.csv", os.str());
        ctx.gate(ok, "tree-graph bound violated");
        return;
    }
    throw SchemaError("diag: unknown suite '" + suite +
                      "' (chen | mehler | treegraph | growth | mixing)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathgibbs: rough-path currents, Gibbs reweighting and cluster expansion"};
    app.require_subcommand(1);

    std::string config_file;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir = ".";

    // env overrides for CI
    if (const char* s = std::getenv("PATHGIBBS_SEED")) seed = std::strtoull(s, nullptr, 10);
    if (const char* s = std::getenv("PATHGIBBS_WORKERS")) workers = std::atoi(s);
    if (const char* s = std::getenv("PATHGIBBS_OUT")) out_dir = s;

    std::map<std::string, json> direct;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "JSON config file");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--workers", workers, "worker threads for batch loops");
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* c_sample = app.add_subcommand("sample", "draw paths from a law");
    CLI::App* c_lift = app.add_subcommand("lift-check", "Chen-relation defect table");
    CLI::App* c_int = app.add_subcommand("integrate", "rough integral of a test field");
    CLI::App* c_energy = app.add_subcommand("energy", "path energies");
    CLI::App* c_gibbs = app.add_subcommand("gibbs", "finite-volume Gibbs ensemble");
    CLI::App* c_cluster = app.add_subcommand("cluster", "cluster enumeration and activities");
    CLI::App* c_diag = app.add_subcommand("diag", "diagnostic suites with gates");
    for (auto* sub : {c_sample, c_lift, c_int, c_energy, c_gibbs, c_cluster, c_diag})
        add_common(sub);

    double flag_lambda = std::numeric_limits<double>::quiet_NaN();
    int flag_n = -1;
    std::string flag_check, flag_suite;
    c_gibbs->add_option("--lambda", flag_lambda, "coupling");
    c_cluster->add_option("--lambda", flag_lambda, "coupling");
    c_cluster->add_option("--N", flag_n, "partition size");
    c_cluster->add_option("--check", flag_check, "none | z-identity");
    c_diag->add_option("--suite", flag_suite, "chen | mehler | treegraph | growth | mixing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitSchema;
    }

    RunContext ctx;
    ctx.seed = seed;
    ctx.workers = workers;
    ctx.out_dir = out_dir;
    auto started = std::chrono::steady_clock::now();

    try {
        if (!config_file.empty()) {
            std::ifstream is(config_file);
            if (!is) {
                std::cerr << "cannot read config " << config_file << "\n";
                return kExitIo;
            }
            try {
                is >> ctx.config;
            } catch (const std::exception& e) {
                std::cerr << "config parse error: " << e.what() << "\n";
                return kExitSchema;
            }
        } else {
            ctx.config = json::object();
        }
        if (!std::isnan(flag_lambda)) ctx.config["lambda"] = flag_lambda;
        if (flag_n >= 0) ctx.config["N"] = flag_n;
        if (!flag_check.empty()) ctx.config["check"] = flag_check;
        if (!flag_suite.empty()) ctx.config["suite"] = flag_suite;

        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        if (ec) {
            std::cerr << "cannot create output directory: " << ec.message() << "\n";
            return kExitIo;
        }

        if (app.got_subcommand(c_sample)) ctx.subcommand = "sample";
        if (app.got_subcommand(c_lift)) ctx.subcommand = "lift-check";
        if (app.got_subcommand(c_int)) ctx.subcommand = "integrate";
        if (app.got_subcommand(c_energy)) ctx.subcommand = "energy";
        if (app.got_subcommand(c_gibbs)) ctx.subcommand = "gibbs";
        if (app.got_subcommand(c_cluster)) ctx.subcommand = "cluster";
        if (app.got_subcommand(c_diag)) ctx.subcommand = "diag";

        if (ctx.subcommand == "sample") run_sample(ctx);
        else if (ctx.subcommand == "lift-check") run_lift_check(ctx);
        else if (ctx.subcommand == "integrate") run_integrate(ctx);
        else if (ctx.subcommand == "energy") run_energy(ctx);
        else if (ctx.subcommand == "gibbs") run_gibbs(ctx);
        else if (ctx.subcommand == "cluster") run_cluster(ctx);
        else if (ctx.subcommand == "diag") run_diag(ctx);
    } catch (const SchemaError& e) {
        std::cerr << "schema violation: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::invalid_argument& e) {
        std::cerr << "schema violation: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                          .count();
        write_manifest(ctx, wall);
        return kExitIo;
    }

    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(ctx, wall);
    if (!ctx.gate_failures.empty()) {
        for (const auto& g : ctx.gate_failures) std::cerr << "gate failure: " << g << "\n";
        return kExitGateFailure;
    }
    return kExitOk;
}
