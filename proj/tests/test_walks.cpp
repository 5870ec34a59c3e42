#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rieszlab/experiments.hpp"
#include "rieszlab/spectral.hpp"
#include "rieszlab/walks.hpp"

using namespace rieszlab;

namespace {

ManifoldPtr unit_path2() {
    return std::make_shared<WeightedGraphManifold>(std::vector<double>{1.0, 1.0},
                                                   std::vector<Edge>{{0, 1, 1.0, -1}}, 1,
                                                   std::vector<std::string>{}, "p2");
}

GluedManifold toy_glued() {
    std::vector<CylinderGraph> pieces = {build_cylinder(build_cycle(8, 8.0), 16, 1.0)};
    CylinderGraph backbone = build_cylinder(build_cycle(8, 8.0), 12, 1.0);
    const auto sites = default_glue_sites(pieces, backbone);
    return glue(pieces, backbone, sites);
}

} // namespace

TEST_CASE("walk mechanics") {
    const auto m = build_random_graph(15, 4);
    Rng rng(1, "walk-test");

    SUBCASE("zero horizon stays put") {
        const WalkPath path = sample_walk(*m, 3, 0.0, rng);
        CHECK(path.events.empty());
        CHECK(path.position_at_end() == 3);
    }
    SUBCASE("event times increase and stay inside the horizon") {
        const WalkPath path = sample_walk(*m, 0, 5.0, rng);
        double prev = 0.0;
        for (const auto& [t, v] : path.events) {
            CHECK(t > prev);
            CHECK(t <= 5.0);
            prev = t;
        }
    }
    SUBCASE("consecutive vertices are adjacent") {
        const WalkPath path = sample_walk(*m, 0, 5.0, rng);
        int prev = path.start;
        for (const auto& [t, v] : path.events) {
            const auto nb = m->neighbors(prev);
            bool adjacent = false;
            for (int k = 0; k < nb.count; ++k) adjacent = adjacent || nb.vertex[k] == v;
            CHECK(adjacent);
            prev = v;
        }
    }
}

TEST_CASE("walk csv dump") {
    const auto m = build_cycle(5, 5.0);
    Rng rng(2, "dump");
    const WalkPath path = sample_walk(*m, 1, 2.0, rng);
    std::ostringstream os;
    write_walk_csv(os, path);
    const std::string text = os.str();
    CHECK(text.rfind("time,vertex\n0,1\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') ==
          static_cast<long>(path.events.size()) + 2);
}

TEST_CASE("holding rate matches the generator normalization") {
    // Rate at a vertex is weighted_degree / (2 mu); on the unit path, 1/2.
    const auto p2 = unit_path2();
    const int samples = 100000;
    const double h = 0.05;
    int jumps = 0;
    for (int i = 0; i < samples; ++i) {
        Rng rng(9, "rate-test", static_cast<std::uint64_t>(i));
        jumps += static_cast<int>(sample_walk(*p2, 0, h, rng).events.size());
    }
    const double mean_jumps = static_cast<double>(jumps) / samples;
    const double expect = 0.5 * h;
    const double stderr_est = std::sqrt(expect / samples);
    CHECK(std::fabs(mean_jumps - expect) <= 3.0 * stderr_est + 1e-3 * expect);
}

TEST_CASE("mc_heat against the spectral semigroup") {
    const auto p2 = unit_path2();
    const auto d = decompose(p2);
    Eigen::VectorXd pm(2);
    pm << 1.0, -1.0;
    const ScalarField f{p2, pm, true};
    const double sigma = 0.4;

    const McField mc = mc_heat(p2, f, sigma, 100000, 11);
    const ScalarField exact = heat_semigroup(d, sigma, f);
    for (int v = 0; v < 2; ++v) {
        CHECK(std::fabs(mc.estimate[v] - exact.values[v]) <= 3.0 * mc.stderr_[v]);
    }
    // Spec closed form: semigroup value e^{-2 sigma} f.
    CHECK(exact.values[0] == doctest::Approx(std::exp(-0.8)).epsilon(1e-12));

    SUBCASE("constant fields are exact with zero stderr") {
        const ScalarField one{p2, Eigen::VectorXd::Ones(2), false};
        const McField mcc = mc_heat(p2, one, 0.7, 2000, 12);
        CHECK(mcc.estimate[0] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(mcc.stderr_[0] <= 1e-13);
    }
    SUBCASE("stderr scales like the inverse square root of samples") {
        const auto m = build_cycle(6, 6.0);
        const ScalarField g = random_mean_zero_field(m, 31);
        const McField small = mc_heat(m, g, 0.5, 10000, 13);
        const McField large = mc_heat(m, g, 0.5, 40000, 13);
        const double ratio = small.stderr_[0] / large.stderr_[0];
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
    }
}

TEST_CASE("mc_heat matches spectral on a wider host") {
    const auto m = build_cycle(10, 5.0);
    const auto d = decompose(m);
    const ScalarField f = random_mean_zero_field(m, 77);
    const McField mc = mc_heat(m, f, 0.3, 20000, 21);
    const ScalarField exact = heat_semigroup(d, 0.3, f);
    int outliers = 0;
    for (int v = 0; v < m->vertex_count(); ++v) {
        if (std::fabs(mc.estimate[v] - exact.values[v]) > 3.0 * (mc.stderr_[v] + 1e-12))
            ++outliers;
    }
    // Componentwise 3-sigma can flicker once across 10 vertices.
    CHECK(outliers <= 1);
}

TEST_CASE("exit probabilities") {
    const CylinderGraph c = build_cylinder(build_cycle(6, 6.0), 16, 1.0);
    const StoppingRule band = level_band_rule(c, 0, 1);

    SUBCASE("start inside the region is rejected") {
        Rng rng(0, "x");
        CHECK_THROWS_AS(exit_probability(*c.graph(), c.vertex_of(0, 1), band, 1.0, 10, 3),
                        std::invalid_argument);
    }
    SUBCASE("vanishing horizon cannot reach a distant region") {
        const ProbabilityEstimate est =
            exit_probability(*c.graph(), c.vertex_of(0, 8), band, 1e-6, 2000, 3);
        CHECK(est.p_hat == 0.0);
    }
    SUBCASE("monotone in the horizon") {
        const int start = c.vertex_of(0, 4);
        const ProbabilityEstimate shorter =
            exit_probability(*c.graph(), start, band, 1.0, 30000, 5);
        const ProbabilityEstimate longer =
            exit_probability(*c.graph(), start, band, 4.0, 30000, 5);
        CHECK(longer.p_hat >= shorter.p_hat);
    }
    SUBCASE("nonincreasing in the start height") {
        double prev = 1.0;
        for (int t : {3, 5, 7}) {
            const ProbabilityEstimate est =
                exit_probability(*c.graph(), c.vertex_of(0, t), band, 2.0, 30000, 7);
            CHECK(est.p_hat <= prev);
            prev = est.p_hat;
        }
    }
    SUBCASE("translation invariance of shifted regions") {
        // Shifting start and region together changes nothing but labels.
        const ProbabilityEstimate a =
            exit_probability(*c.graph(), c.vertex_of(2, 5), level_band_rule(c, 0, 1), 2.0,
                             30000, 9);
        const ProbabilityEstimate b =
            exit_probability(*c.graph(), c.vertex_of(2, 9), level_band_rule(c, 4, 1), 2.0,
                             30000, 9);
        const double joint = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
        CHECK(std::fabs(a.p_hat - b.p_hat) <= 3.0 * joint + 1e-12);
    }
}

TEST_CASE("coupled walk") {
    const GluedManifold g = toy_glued();
    const auto& piece = g.pieces()[0];
    const auto& rec = g.embeddings()[0];
    const int start_piece = piece.vertex_of(4, (rec.site_level + 6) % piece.axis_steps());

    SUBCASE("start outside the domain is rejected") {
        Rng rng(0, "c");
        CHECK_THROWS_AS(coupled_walk(g, 0, rec.piece_site, 1.0, rng), std::invalid_argument);
    }
    SUBCASE("paths that never reach the break set follow the embedded piece walk") {
        // Replay the piece walk with the same stream and compare.
        for (int i = 0; i < 50; ++i) {
            Rng rng_a(33, "coupled", static_cast<std::uint64_t>(i));
            Rng rng_b(33, "coupled", static_cast<std::uint64_t>(i));
            const WalkPath coupled = coupled_walk(g, 0, start_piece, 1.5, rng_a);
            const WalkPath plain = sample_walk(*piece.graph(), start_piece, 1.5, rng_b);
            bool hit_break = false;
            {
                std::vector<char> breaks(static_cast<std::size_t>(piece.graph()->vertex_count()), 0);
                for (int v : coupling_break_set(g, 0)) breaks[static_cast<std::size_t>(v)] = 1;
                int at = start_piece;
                hit_break = breaks[static_cast<std::size_t>(at)] != 0;
                for (const auto& [t, v] : plain.events) {
                    at = v;
                    hit_break = hit_break || breaks[static_cast<std::size_t>(at)] != 0;
                }
            }
            if (hit_break) continue;
            REQUIRE(coupled.events.size() == plain.events.size());
            for (std::size_t k = 0; k < plain.events.size(); ++k) {
                CHECK(coupled.events[k].second ==
                      rec.to_ambient[static_cast<std::size_t>(plain.events[k].second)]);
                CHECK(coupled.events[k].first == plain.events[k].first);
            }
        }
    }
    SUBCASE("marginal law matches the spectral ambient semigroup") {
        const auto d = decompose(g.ambient());
        const ScalarField f = random_mean_zero_field(g.ambient(), 41);
        const double sigma = 0.35;
        const int samples = 40000;
        const int start_ambient = rec.to_ambient[static_cast<std::size_t>(start_piece)];
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < samples; ++i) {
            Rng rng(71, "coupled-mc", static_cast<std::uint64_t>(i));
            const WalkPath path = coupled_walk(g, 0, start_piece, 2.0 * sigma, rng);
            const double x = f.values[path.position_at_end()];
            sum += x;
            sumsq += x * x;
        }
        const double mean = sum / samples;
        const double se = std::sqrt(std::max(0.0, sumsq / samples - mean * mean) / samples);
        const ScalarField exact = heat_semigroup(d, sigma, f);
        CHECK(std::fabs(mean - exact.values[start_ambient]) <= 3.0 * se);
    }
    SUBCASE("stopping fraction matches exit_probability") {
        // The same event estimated two ways: piece walk hitting the break
        // set, and the band rule built from its vertices.
        StoppingRule rule;
        rule.region.assign(static_cast<std::size_t>(piece.graph()->vertex_count()), 0);
        for (int v : coupling_break_set(g, 0)) rule.region[static_cast<std::size_t>(v)] = 1;
        rule.description = "break set";
        const double horizon = 3.0;
        const int samples = 30000;
        const ProbabilityEstimate direct =
            exit_probability(*piece.graph(), start_piece, rule, horizon, samples, 55);

        int hits = 0;
        for (int i = 0; i < samples; ++i) {
            Rng rng(55, "coupled-hit", static_cast<std::uint64_t>(i));
            const WalkPath path = coupled_walk(g, 0, start_piece, horizon, rng);
            // The coupled path switches to ambient dynamics exactly at the
            // break set; detect the switch by leaving the embedded image.
            std::vector<char> image(static_cast<std::size_t>(g.ambient()->vertex_count()), 0);
            for (int v = 0; v < piece.graph()->vertex_count(); ++v) {
                if (rec.in_domain(v)) image[static_cast<std::size_t>(rec.to_ambient[static_cast<std::size_t>(v)])] = 1;
            }
            std::vector<char> breaks(static_cast<std::size_t>(g.ambient()->vertex_count()), 0);
            for (int v : coupling_break_set(g, 0))
                breaks[static_cast<std::size_t>(rec.to_ambient[static_cast<std::size_t>(v)])] = 1;
            for (const auto& [t, v] : path.events) {
                if (!image[static_cast<std::size_t>(v)] || breaks[static_cast<std::size_t>(v)]) {
                    ++hits;
                    break;
                }
            }
        }
        const double p_walk = static_cast<double>(hits) / samples;
        const double joint = std::sqrt(direct.stderr_ * direct.stderr_ +
                                       p_walk * (1.0 - p_walk) / samples);
        CHECK(std::fabs(p_walk - direct.p_hat) <= 3.0 * joint + 1e-12);
    }
}
