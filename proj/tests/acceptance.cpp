// Acceptance suite: runs the numbered criteria end to end and prints one
// pass/fail line each. Invoke with --criterion N for a single criterion or
// with no arguments for all of them.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "rieszlab/experiments.hpp"
#include "rieszlab/lp.hpp"
#include "rieszlab/walks.hpp"

using namespace rieszlab;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct HostSet {
    std::vector<std::pair<std::string, ManifoldPtr>> hosts;
};

HostSet standard_hosts() {
    HostSet set;
    set.hosts.emplace_back("cycle", build_cycle(16, kTwoPi));
    set.hosts.emplace_back("torus", build_torus(2, 6, kTwoPi));
    set.hosts.emplace_back("cylinder",
                           build_cylinder(build_cycle(12, kTwoPi), 12, kTwoPi / 12).graph());
    {
        PilotGluedConfig cfg;
        cfg.base_n = {8, 8};
        cfg.piece_axis_steps = 16;
        cfg.backbone_n = 8;
        cfg.backbone_axis_steps = 12;
        set.hosts.emplace_back("glued", build_pilot_glued(cfg).ambient());
    }
    set.hosts.emplace_back("random", build_random_graph(40, 99));
    return set;
}

GluedManifold figure1_pilot() {
    PilotGluedConfig cfg; // two C16 pieces on a C16 backbone
    return build_pilot_glued(cfg);
}

ScalarField pilot_bump(const GluedManifold& g, int piece_index) {
    const auto& piece = g.pieces()[static_cast<std::size_t>(piece_index)];
    const auto& rec = g.embeddings()[static_cast<std::size_t>(piece_index)];
    const int nb = piece.base()->vertex_count();
    const int m = piece.axis_steps();
    return make_field(piece.graph(),
                      tensor_values(piece, cosine_bump(nb, nb / 2, 2, true),
                                    cosine_bump(m, (rec.site_level + 4) % m, 2, true)));
}

// ------------------------------------------------------------- criteria

bool criterion_1(std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    for (const auto& [name, host] : standard_hosts().hosts) {
        OpNormOptions opt;
        opt.restarts = 8;
        const OperatorNormEstimate est = riesz_norm(host, 2.0, opt, 7);
        const bool good = std::fabs(est.value - 1.0) <= 1e-6;
        ok = ok && good;
        os << name << "=" << est.value << (good ? " " : "(!) ");
    }
    detail = os.str();
    return ok;
}

bool criterion_2(std::string& detail) {
    bool ok = true;
    double worst = 0.0;
    for (const auto& [name, host] : standard_hosts().hosts) {
        const SpectralDecomposition d = decompose(host);
        for (std::uint64_t c = 0; c < 20; ++c) {
            const ScalarField f = random_mean_zero_field(host, 17, c);
            const ScalarField a = inv_sqrt_spectral(d, f);
            const ScalarField b = inv_sqrt_subordination(d, f);
            const double rel =
                std::sqrt(host->mu_vector().dot((a.values - b.values).cwiseAbs2())) /
                std::sqrt(host->mu_vector().dot(a.values.cwiseAbs2()));
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-6;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst relative L2 gap %.3e", worst);
    detail = buf;
    return ok;
}

bool criterion_3(std::string& detail) {
    const double target = 1.0 + std::sqrt(2.0);
    const double lo = target * 0.85;
    const double hi = target * 1.15;
    OpNormOptions opt;
    opt.restarts = 32;

    std::vector<double> values;
    for (int n : {16, 32, 64}) {
        values.push_back(riesz_norm(build_cycle(n, kTwoPi), 4.0, opt, 1).value);
    }
    const bool monotone = values[0] <= values[1] + 1e-12 && values[1] <= values[2] + 1e-12;
    const bool in_window = values[2] >= lo && values[2] <= hi;
    const double dual = riesz_norm(build_cycle(64, kTwoPi), 4.0 / 3.0, opt, 1).value;
    const bool dual_in_window = dual >= lo && dual <= hi;

    std::ostringstream os;
    os << "p=4 values {" << values[0] << ", " << values[1] << ", " << values[2]
       << "} monotone=" << (monotone ? "yes" : "no") << "; window [" << lo << ", " << hi
       << "]; n=64 in-window=" << (in_window ? "yes" : "no") << "; dual p=4/3 value " << dual
       << " in-window=" << (dual_in_window ? "yes" : "no");
    detail = os.str();
    return monotone && in_window && dual_in_window;
}

bool criterion_4(std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    const std::vector<std::pair<std::string, ManifoldPtr>> bases = {
        {"C16", build_cycle(16, kTwoPi)}, {"T8x8", build_torus(2, 8, kTwoPi)}};
    for (const auto& [name, base] : bases) {
        for (double p : {1.5, 3.0}) {
            const ExperimentReport rep = exp_cylinder_domination(base, p, 7, {});
            const bool good = rep.verdict == ExperimentReport::Verdict::Pass;
            ok = ok && good;
            os << name << "@p=" << p << ":" << rep.verdict_string() << " ";
        }
    }
    detail = os.str();
    return ok;
}

bool criterion_5(std::string& detail) {
    const auto base = build_cycle(16, kTwoPi);
    const ScalarField f = random_mean_zero_field(base, 42);
    RescalingOptions opt; // axis 64, spacing 0.4, lambda 1 .. 1/16
    Eigen::VectorXd rho = cosine_bump(opt.axis_steps, opt.axis_steps / 2, opt.rho_halfwidth, true);
    const double p = 3.0;
    double sum = 0.0;
    for (int t = 0; t < rho.size(); ++t) sum += opt.axis_spacing * std::pow(rho[t], p);
    rho /= std::pow(sum, 1.0 / p);
    const ExperimentReport rep = exp_rescaling(base, f, rho, p, opt);
    std::ostringstream os;
    os << "final deviation " << rep.rows.back()[3] * 100.0 << "% (tolerance 5%), verdict "
       << rep.verdict_string();
    detail = os.str();
    return rep.verdict == ExperimentReport::Verdict::Pass;
}

bool criterion_6(std::string& detail) {
    const GluedManifold g = figure1_pilot();
    const ScalarField f = pilot_bump(g, 0);
    const ExperimentReport rep = exp_heat_convergence(g, 0, f, 0.5, 100000, 9, {});
    double final_absdiff = 0.0;
    for (const auto& row : rep.rows) {
        if (row[0] == rep.rows.back()[0]) final_absdiff = std::max(final_absdiff, row[4]);
    }
    std::ostringstream os;
    os << "verdict " << rep.verdict_string() << ", final max |A-B| = " << final_absdiff;
    detail = os.str();
    return rep.verdict == ExperimentReport::Verdict::Pass;
}

bool criterion_7(std::string& detail) {
    const GluedManifold g = figure1_pilot();
    const ScalarField h = pilot_bump(g, 0);
    LocalizationOptions opt;
    opt.seed = 3;
    const ExperimentReport rep = exp_localization(g, 0, h, 3.0, opt);
    double worst_push = 0.0;
    for (const auto& row : rep.rows) worst_push = std::max(worst_push, std::fabs(row[4] - 1.0));
    const bool push_const = worst_push <= 1e-12;
    std::ostringstream os;
    os << "verdict " << rep.verdict_string() << ", final gap "
       << rep.rows.back()[3] / rep.rows.back()[2] * 100.0 << "% of piece norm, pushforward norm"
       << " deviation " << worst_push;
    detail = os.str();
    return rep.verdict == ExperimentReport::Verdict::Pass && push_const;
}

bool criterion_8(std::string& detail) {
    const std::vector<ManifoldPtr> bases = {build_cycle(8, kTwoPi), build_cycle(16, kTwoPi),
                                            build_cycle(32, kTwoPi)};
    const ExperimentReport rep = exp_dichotomy(bases, 3.0, 3, {});
    double max_piece = 0.0, glued = 0.0;
    for (const auto& row : rep.rows) {
        if (row[0] == 0.0) max_piece = std::max(max_piece, row[2]);
        if (row[0] == 1.0) glued = row[2];
    }
    std::ostringstream os;
    os << "glued " << glued << " vs max piece " << max_piece << ", verdict "
       << rep.verdict_string();
    detail = os.str();
    return rep.verdict == ExperimentReport::Verdict::Pass;
}

bool criterion_9(std::string& detail) {
    const CylinderGraph c = build_cylinder(build_cycle(16, kTwoPi), 24, kTwoPi / 16);
    const ScalarField h = random_mean_zero_field(c.graph(), 5, 0);
    const ScalarField g = random_mean_zero_field(c.graph(), 5, 1);
    SigmaBoundsOptions opt; // 50-point log grid over [1e-3, 1e3]
    const ExperimentReport rep = exp_sigma_bounds(c, h, g, opt);
    double worst1 = 0.0, worst2 = 0.0;
    for (const auto& row : rep.rows) {
        worst1 = std::max(worst1, row[1]);
        worst2 = std::max(worst2, row[2]);
    }
    std::ostringstream os;
    os << "max ratios " << worst1 << " (<= 1) and " << worst2 << " (<= " << std::exp(-1.0)
       << "), verdict " << rep.verdict_string();
    detail = os.str();
    return rep.verdict == ExperimentReport::Verdict::Pass;
}

bool criterion_10(std::string& detail) {
    bool ok = true;
    double worst = 0.0;
    for (const auto& [name, host] : standard_hosts().hosts) {
        const SpectralDecomposition d = decompose(host);
        for (std::uint64_t c = 0; c < 20; ++c) {
            const ScalarField f = random_mean_zero_field(host, 23, c);
            const ScalarField u = solve_poisson(d, f);
            const Eigen::VectorXd residual = host->laplacian(u.values) - f.values;
            const double rel = std::sqrt(host->mu_vector().dot(residual.cwiseAbs2())) /
                               std::sqrt(host->mu_vector().dot(f.values.cwiseAbs2()));
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-10;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst relative residual %.3e", worst);
    detail = buf;
    return ok;
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

bool criterion_11(std::string& detail) {
    const fs::path tmp =
        fs::temp_directory_path() / ("rieszlab-acc11-" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    {
        std::ofstream cfg(tmp / "rescale.ini");
        cfg << "[run]\ncommand = experiment\nexperiment = rescale\nseed = 11\n\n"
            << "[experiment]\nbase_n = 16\naxis_steps = 32\naxis_spacing = 0.4\np = 3\n";
    }
    {
        std::ofstream cfg(tmp / "heat.ini");
        cfg << "[run]\ncommand = experiment\nexperiment = heat\nseed = 4\n\n"
            << "[experiment]\npiece_n = 8,8\npiece_axis_steps = 16\nbackbone_n = 8\n"
            << "backbone_axis_steps = 12\nmc_samples = 5000\ns_grid = 0,2,4\n";
    }
    {
        std::ofstream cfg(tmp / "norm.ini");
        cfg << "[run]\ncommand = riesz-norm\nseed = 5\n\n[manifold]\nkind = cycle\nn = 16\n"
            << "circumference = 6.283185307179586\n\n[estimator]\np_values = 2,3\nrestarts = 8\n";
    }
    auto run = [&tmp](const std::string& sub, const std::string& cfg, const std::string& out,
                      int threads) {
        const std::string cmd = std::string(RIESZLAB_CLI_PATH) + " " + sub + " --config " +
                                (tmp / cfg).string() + " --out " + (tmp / out).string() +
                                " --threads " + std::to_string(threads) + " >/dev/null 2>&1";
        return std::system(cmd.c_str());
    };

    bool ok = true;
    std::ostringstream os;
    run("experiment", "rescale.ini", "r1", 1);
    run("experiment", "rescale.ini", "r2", 2);
    ok = ok && slurp(tmp / "r1" / "report.csv") == slurp(tmp / "r2" / "report.csv");
    os << "rescale=" << (ok ? "identical" : "DIFFERS");

    run("experiment", "heat.ini", "h1", 1);
    run("experiment", "heat.ini", "h2", 2);
    const bool heat_same = slurp(tmp / "h1" / "report.csv") == slurp(tmp / "h2" / "report.csv");
    ok = ok && heat_same;
    os << " heat=" << (heat_same ? "identical" : "DIFFERS");

    run("riesz-norm", "norm.ini", "n1", 2);
    run("riesz-norm", "norm.ini", "n2", 1);
    const bool norm_same =
        slurp(tmp / "n1" / "estimates.csv") == slurp(tmp / "n2" / "estimates.csv") &&
        slurp(tmp / "n1" / "witness_0.txt") == slurp(tmp / "n2" / "witness_0.txt") &&
        slurp(tmp / "n1" / "witness_1.txt") == slurp(tmp / "n2" / "witness_1.txt");
    ok = ok && norm_same;
    os << " riesz-norm=" << (norm_same ? "identical" : "DIFFERS");

    fs::remove_all(tmp);
    detail = os.str();
    return ok;
}

struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "L2 isometry of the Riesz transform", criterion_1},
        {2, "subordination route matches the spectral route", criterion_2},
        {3, "Pichorides target on growing cycles", criterion_3},
        {4, "cylinder norm dominates the base norm", criterion_4},
        {5, "rescaled operator converges to the base transform", criterion_5},
        {6, "heat-flow coupling on the glued pilot", criterion_6},
        {7, "localization of transported lower bounds", criterion_7},
        {8, "glued manifold dominates every piece", criterion_8},
        {9, "sigma-integrand bounds", criterion_9},
        {10, "generator range solves the Poisson problem", criterion_10},
        {11, "byte-identical reruns", criterion_11},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[i + 1]);
            ++i;
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 64;
        }
    }

    int failures = 0;
    for (const auto& c : criteria()) {
        if (only != 0 && c.number != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %2d (%s): %s%s%s\n", c.number, c.name, ok ? "PASS" : "FAIL",
                    detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
