// Command-line entry point: constructs hosts, estimates Riesz norms, and
// runs the scripted experiments, all reproducibly from a config and a seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rieszlab/config.hpp"
#include "rieszlab/errors.hpp"
#include "rieszlab/experiments.hpp"
#include "rieszlab/kernels.hpp"
#include "rieszlab/lp.hpp"
#include "rieszlab/parallel.hpp"
#include "rieszlab/textio.hpp"

namespace {

using namespace rieszlab;

constexpr int kExitPass = 0;
constexpr int kExitFail = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

constexpr double kTwoPi = 6.283185307179586;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int threads = 1;
};

std::uint64_t require_seed(const RunConfig& cfg, const CommonArgs& args) {
    if (args.seed) return *args.seed;
    if (cfg.has("run", "seed")) return static_cast<std::uint64_t>(cfg.integer("run", "seed", 0));
    throw CLI::ValidationError("a seed is required (config [run] seed or --seed)");
}

std::filesystem::path output_dir(const RunConfig& cfg, const CommonArgs& args) {
    const std::string dir = args.out ? *args.out : cfg.get_or("run", "out", "out");
    std::filesystem::create_directories(dir);
    return dir;
}

ManifoldPtr build_base(const RunConfig& cfg, const std::string& section, const std::string& prefix,
                       std::uint64_t seed) {
    const std::string kind = cfg.get_or(section, prefix + "kind", "cycle");
    if (kind == "cycle") {
        return build_cycle(static_cast<int>(cfg.integer(section, prefix + "n", 16)),
                           cfg.number(section, prefix + "circumference", kTwoPi));
    }
    if (kind == "torus") {
        return build_torus(static_cast<int>(cfg.integer(section, prefix + "d", 2)),
                           static_cast<int>(cfg.integer(section, prefix + "n", 8)),
                           cfg.number(section, prefix + "side", kTwoPi));
    }
    if (kind == "random") {
        return build_random_graph(static_cast<int>(cfg.integer(section, prefix + "n", 32)), seed);
    }
    throw std::invalid_argument("unknown base kind: " + kind);
}

struct BuiltHost {
    ManifoldPtr graph; // what norm estimation runs on
    std::optional<CylinderGraph> cylinder;
    std::optional<GluedManifold> glued;
    std::vector<EmbeddingRecord> embeddings; // populated for glued inputs
};

PilotGluedConfig pilot_config(const RunConfig& cfg, const std::string& section) {
    PilotGluedConfig pilot;
    std::vector<long> base_n = cfg.integer_list(section, "piece_n", {16, 16});
    pilot.base_n.assign(base_n.begin(), base_n.end());
    pilot.base_circumference = cfg.number(section, "piece_circumference", kTwoPi);
    pilot.piece_axis_steps = static_cast<int>(cfg.integer(section, "piece_axis_steps", 64));
    pilot.backbone_n = static_cast<int>(cfg.integer(section, "backbone_n", 16));
    pilot.backbone_axis_steps = static_cast<int>(cfg.integer(section, "backbone_axis_steps", 24));
    pilot.spacing = cfg.number(section, "spacing", 0.0);
    pilot.iso_offset = static_cast<int>(cfg.integer(section, "iso_offset", 2));
    return pilot;
}

BuiltHost build_host(const RunConfig& cfg, std::uint64_t seed) {
    BuiltHost host;
    const std::string kind = cfg.get_or("manifold", "kind", "cycle");
    if (kind == "cycle" || kind == "torus" || kind == "random") {
        host.graph = build_base(cfg, "manifold", "", seed);
        return host;
    }
    if (kind == "cylinder") {
        const ManifoldPtr base = build_base(cfg, "manifold", "base_", seed);
        const double spacing = cfg.number("manifold", "axis_spacing",
                                          std::pow(base->mu(0), 1.0 / base->dim_hint()));
        const std::string boundary = cfg.get_or("manifold", "axis_boundary", "periodic");
        host.cylinder = build_cylinder(
            base, static_cast<int>(cfg.integer("manifold", "axis_steps", 24)), spacing,
            boundary == "reflecting" ? AxisBoundary::Reflecting : AxisBoundary::Periodic);
        host.graph = host.cylinder->graph();
        return host;
    }
    if (kind == "glued") {
        host.glued = build_pilot_glued(pilot_config(cfg, "manifold"));
        host.graph = host.glued->ambient();
        host.embeddings = host.glued->embeddings();
        return host;
    }
    if (kind == "file") {
        std::ifstream is(cfg.get("manifold", "path"));
        if (!is) throw std::runtime_error("cannot open: " + cfg.get("manifold", "path"));
        LoadedGlued loaded = read_glued(is);
        host.graph = loaded.ambient;
        host.embeddings = std::move(loaded.embeddings);
        return host;
    }
    throw std::invalid_argument("unknown manifold kind: " + kind);
}

int cmd_build(const RunConfig& cfg, const CommonArgs& args) {
    const std::uint64_t seed =
        cfg.get_or("manifold", "kind", "cycle") == "random" ? require_seed(cfg, args) : 0;
    const BuiltHost host = build_host(cfg, seed);
    const auto dir = output_dir(cfg, args);
    const auto path = dir / "graph.txt";
    {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write: " + path.string());
        if (host.glued) {
            write_glued(os, *host.glued);
        } else if (!host.embeddings.empty()) {
            write_glued(os, *host.graph, host.embeddings);
        } else {
            write_manifold(os, *host.graph);
        }
    }
    const SpectralDecomposition d = decompose(host.graph);
    std::cout << "vertices " << host.graph->vertex_count() << "\n"
              << "edges " << host.graph->edge_count() << "\n"
              << "spectral_gap " << fmt12(d.spectral_gap()) << "\n"
              << "file " << path.string() << "\n";
    return kExitPass;
}

int cmd_riesz_norm(const RunConfig& cfg, const CommonArgs& args) {
    const std::uint64_t seed = require_seed(cfg, args);
    const BuiltHost host = build_host(cfg, seed);
    std::vector<double> p_values = cfg.number_list("estimator", "p_values", {});
    if (p_values.empty() && cfg.has("estimator", "p"))
        p_values.push_back(cfg.number("estimator", "p", 2.0));
    if (p_values.empty()) throw std::invalid_argument("riesz-norm needs [estimator] p or p_values");

    OpNormOptions options;
    options.restarts = static_cast<int>(cfg.integer("estimator", "restarts", 32));
    options.max_iterations = static_cast<int>(cfg.integer("estimator", "max_iterations", 500));

    const SpectralDecomposition d = decompose(host.graph);
    const auto dir = output_dir(cfg, args);
    std::ofstream csv(dir / "estimates.csv");
    csv << "host_id,p,value,restarts,converged,witness_file\n";
    bool all_converged = true;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        const OperatorNormEstimate est = riesz_norm(d, p_values[i], options, seed);
        const std::string witness_name = "witness_" + std::to_string(i) + ".txt";
        write_field_file((dir / witness_name).string(), est.witness);
        csv << host.graph->label() << "," << fmt12(p_values[i]) << "," << fmt12(est.value) << ","
            << est.restarts << "," << (est.converged ? 1 : 0) << "," << witness_name << "\n";
        std::cout << "p=" << fmt12(p_values[i]) << " value=" << fmt12(est.value)
                  << (est.converged ? "" : " (not converged)") << "\n";
        all_converged = all_converged && est.converged;
    }
    std::ofstream verdict(dir / "verdict.txt");
    verdict << (all_converged ? "pass" : "inconclusive") << "\n";
    return all_converged ? kExitPass : kExitInconclusive;
}

ScalarField bump_on_piece(const CylinderGraph& piece, int site_level, const RunConfig& cfg) {
    const int nb = piece.base()->vertex_count();
    const int m = piece.axis_steps();
    const int cx = static_cast<int>(cfg.integer("experiment", "bump_x", nb / 2));
    const int ct = static_cast<int>(
        (site_level + cfg.integer("experiment", "bump_t_offset", 4)) % m);
    const int hwx = static_cast<int>(cfg.integer("experiment", "bump_halfwidth_x", 2));
    const int hwt = static_cast<int>(cfg.integer("experiment", "bump_halfwidth_t", 2));
    Eigen::VectorXd values = tensor_values(piece, cosine_bump(nb, cx, hwx, true),
                                           cosine_bump(m, ct, hwt, true));
    return make_field(piece.graph(), std::move(values));
}

int cmd_experiment(const RunConfig& cfg, const CommonArgs& args) {
    const std::uint64_t seed = require_seed(cfg, args);
    const std::string id = cfg.get_or("run", "experiment", "");
    const auto dir = output_dir(cfg, args);

    ExperimentReport report;
    if (id == "cylinder") {
        const ManifoldPtr base = build_base(cfg, "experiment", "base_", seed);
        CylinderDominationOptions opt;
        opt.axis_steps = static_cast<int>(cfg.integer("experiment", "axis_steps", 24));
        opt.axis_spacing = cfg.number("experiment", "axis_spacing", 0.0);
        opt.restarts = static_cast<int>(cfg.integer("experiment", "restarts", 24));
        report = exp_cylinder_domination(base, cfg.number("experiment", "p", 3.0), seed, opt);
    } else if (id == "rescale") {
        const ManifoldPtr base = build_base(cfg, "experiment", "base_", seed);
        RescalingOptions opt;
        opt.axis_steps = static_cast<int>(cfg.integer("experiment", "axis_steps", 64));
        opt.axis_spacing = cfg.number("experiment", "axis_spacing", 0.4);
        opt.lambda_grid =
            cfg.number_list("experiment", "lambda_grid", {1.0, 0.5, 0.25, 0.125, 0.0625});
        opt.rho_halfwidth = static_cast<int>(cfg.integer("experiment", "rho_halfwidth", 6));
        const double p = cfg.number("experiment", "p", 3.0);
        const ScalarField f = random_mean_zero_field(base, seed);
        Eigen::VectorXd rho =
            cosine_bump(opt.axis_steps, opt.axis_steps / 2, opt.rho_halfwidth, true);
        // Unit p-norm against the axis measure (mu = spacing per level).
        double sum = 0.0;
        for (int t = 0; t < rho.size(); ++t) sum += opt.axis_spacing * std::pow(rho[t], p);
        rho /= std::pow(sum, 1.0 / p);
        report = exp_rescaling(base, f, rho, p, opt);
    } else if (id == "localize") {
        const GluedManifold glued = build_pilot_glued(pilot_config(cfg, "experiment"));
        const int piece = static_cast<int>(cfg.integer("experiment", "piece", 0));
        const auto& rec = glued.embeddings()[static_cast<std::size_t>(piece)];
        const ScalarField h =
            bump_on_piece(glued.pieces()[static_cast<std::size_t>(piece)], rec.site_level, cfg);
        LocalizationOptions opt;
        opt.seed = seed;
        std::vector<long> s_grid = cfg.integer_list("experiment", "s_grid", {});
        if (!s_grid.empty()) opt.s_grid.assign(s_grid.begin(), s_grid.end());
        report = exp_localization(glued, piece, h, cfg.number("experiment", "p", 3.0), opt);
    } else if (id == "heat") {
        const GluedManifold glued = build_pilot_glued(pilot_config(cfg, "experiment"));
        const int piece = static_cast<int>(cfg.integer("experiment", "piece", 0));
        const auto& rec = glued.embeddings()[static_cast<std::size_t>(piece)];
        const ScalarField f =
            bump_on_piece(glued.pieces()[static_cast<std::size_t>(piece)], rec.site_level, cfg);
        HeatConvergenceOptions opt;
        std::vector<long> s_grid = cfg.integer_list("experiment", "s_grid", {});
        if (!s_grid.empty()) opt.s_grid.assign(s_grid.begin(), s_grid.end());
        report = exp_heat_convergence(
            glued, piece, f, cfg.number("experiment", "sigma", 0.5),
            static_cast<int>(cfg.integer("experiment", "mc_samples", 100000)), seed, opt);
    } else if (id == "sigma-bounds") {
        const ManifoldPtr base = build_base(cfg, "experiment", "base_", seed);
        const CylinderGraph cyl = build_cylinder(
            base, static_cast<int>(cfg.integer("experiment", "axis_steps", 24)),
            cfg.number("experiment", "axis_spacing", std::pow(base->mu(0), 1.0 / base->dim_hint())));
        SigmaBoundsOptions opt;
        opt.sigma_min = cfg.number("experiment", "sigma_min", 1e-3);
        opt.sigma_max = cfg.number("experiment", "sigma_max", 1e3);
        opt.grid_points = static_cast<int>(cfg.integer("experiment", "sigma_grid_points", 50));
        const ScalarField h = random_mean_zero_field(cyl.graph(), seed, 0);
        const ScalarField g_field = random_mean_zero_field(cyl.graph(), seed, 1);
        report = exp_sigma_bounds(cyl, h, g_field, opt);
    } else if (id == "dichotomy") {
        DichotomyOptions opt;
        opt.base_circumference = cfg.number("experiment", "piece_circumference", kTwoPi);
        opt.piece_axis_steps = static_cast<int>(cfg.integer("experiment", "piece_axis_steps", 24));
        opt.backbone_n = static_cast<int>(cfg.integer("experiment", "backbone_n", 16));
        opt.backbone_axis_steps =
            static_cast<int>(cfg.integer("experiment", "backbone_axis_steps", 24));
        opt.restarts = static_cast<int>(cfg.integer("experiment", "restarts", 24));
        std::vector<ManifoldPtr> bases;
        for (long n : cfg.integer_list("experiment", "piece_n", {8, 16, 32})) {
            bases.push_back(build_cycle(static_cast<int>(n), opt.base_circumference));
        }
        report = exp_dichotomy(bases, cfg.number("experiment", "p", 3.0), seed, opt);
    } else {
        throw CLI::ValidationError("unknown experiment id: '" + id + "'");
    }

    {
        std::ofstream csv(dir / "report.csv");
        report.write_csv(csv);
        std::ofstream verdict(dir / "verdict.txt");
        verdict << report.verdict_string() << "\n";
    }
    std::cout << id << ": " << report.verdict_string() << "\n";
    switch (report.verdict) {
        case ExperimentReport::Verdict::Pass: return kExitPass;
        case ExperimentReport::Verdict::Fail: return kExitFail;
        default: return kExitInconclusive;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Riesz transforms on weighted-graph manifolds"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&args](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "run configuration file")->required();
        sub->add_option("--seed", args.seed, "seed override");
        sub->add_option("--out", args.out, "output directory override");
        sub->add_option("--threads", args.threads, "worker threads")->default_val(1);
    };
    CLI::App* build = app.add_subcommand("build", "construct a manifold, write interchange file");
    CLI::App* norm = app.add_subcommand("riesz-norm", "estimate R_p lower bounds");
    CLI::App* experiment = app.add_subcommand("experiment", "run a scripted experiment");
    add_common(build);
    add_common(norm);
    add_common(experiment);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        set_thread_count(args.threads);
        const RunConfig cfg = RunConfig::load(args.config_path);
        if (build->parsed()) return cmd_build(cfg, args);
        if (norm->parsed()) return cmd_riesz_norm(cfg, args);
        return cmd_experiment(cfg, args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ResourceLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
