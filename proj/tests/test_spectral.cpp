#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rieszlab/errors.hpp"
#include "rieszlab/experiments.hpp"
#include "rieszlab/lp.hpp"
#include "rieszlab/spectral.hpp"

using namespace rieszlab;

namespace {

ManifoldPtr unit_path2() {
    return std::make_shared<WeightedGraphManifold>(std::vector<double>{1.0, 1.0},
                                                   std::vector<Edge>{{0, 1, 1.0, -1}}, 1,
                                                   std::vector<std::string>{}, "p2");
}

} // namespace

TEST_CASE("decompose small hosts") {
    SUBCASE("unit path") {
        const auto p2 = unit_path2();
        const auto d = decompose(p2);
        CHECK(d.eigenvalues()[0] == 0.0);
        CHECK(d.eigenvalues()[1] == doctest::Approx(2.0));
        CHECK(d.kernel_dim() == 1);
        // Eigenvectors proportional to (1,1) and (1,-1), mu-normalized.
        CHECK(d.eigenvectors()(0, 0) == doctest::Approx(d.eigenvectors()(1, 0)));
        CHECK(d.eigenvectors()(0, 1) == doctest::Approx(-d.eigenvectors()(1, 1)));
        CHECK(std::fabs(d.eigenvectors()(0, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    }
    SUBCASE("cycle of four, unit spacing") {
        const auto d = decompose(build_cycle(4, 4.0));
        CHECK(d.eigenvalues()[0] == 0.0);
        CHECK(d.eigenvalues()[1] == doctest::Approx(2.0));
        CHECK(d.eigenvalues()[2] == doctest::Approx(2.0));
        CHECK(d.eigenvalues()[3] == doctest::Approx(4.0));
    }
    SUBCASE("constant kernel vector on any host") {
        const auto m = build_random_graph(18, 3);
        const auto d = decompose(m);
        const double expect = 1.0 / std::sqrt(m->total_volume());
        for (int v = 0; v < m->vertex_count(); ++v)
            CHECK(d.eigenvectors()(v, 0) == doctest::Approx(expect));
    }
    SUBCASE("size cap") {
        CHECK_THROWS_AS(decompose(build_cycle(40, 1.0), 10), ResourceLimitError);
    }
}

TEST_CASE("decomposition invariants") {
    for (const auto& m :
         {build_cycle(9, 2.0), build_torus(2, 4, 4.0), build_random_graph(25, 17)}) {
        const auto d = decompose(m);
        const int n = m->vertex_count();
        REQUIRE(d.kernel_dim() == 1);
        for (int k = 0; k < n; ++k) {
            CHECK(d.eigenvalues()[k] >= 0.0);
            // Reconstruction: (-generator) v_k = lambda_k v_k in the mu norm.
            const Eigen::VectorXd v = d.eigenvectors().col(k);
            const Eigen::VectorXd residual = -m->laplacian(v) - d.eigenvalues()[k] * v;
            const double err = std::sqrt(m->mu_vector().dot(residual.cwiseProduct(residual)));
            CHECK(err <= 1e-9);
        }
        // mu-orthonormality spot check.
        for (int k = 0; k < std::min(4, n); ++k) {
            for (int j = 0; j <= k; ++j) {
                const double ip = m->mu_vector().dot(
                    d.eigenvectors().col(k).cwiseProduct(d.eigenvectors().col(j)));
                CHECK(ip == doctest::Approx(k == j ? 1.0 : 0.0).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("heat semigroup") {
    const auto p2 = unit_path2();
    const auto d = decompose(p2);
    Eigen::VectorXd pm(2);
    pm << 1.0, -1.0;
    const ScalarField f{p2, pm, true};

    SUBCASE("sigma zero is the identity") {
        const ScalarField out = heat_semigroup(d, 0.0, f);
        CHECK(out.values[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.values[1] == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("eigenvalue two decays as exp(-2 sigma)") {
        const ScalarField out = heat_semigroup(d, 0.5, f);
        CHECK(out.values[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(out.values[1] == doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));
    }
    SUBCASE("constants are fixed") {
        const ScalarField one{p2, Eigen::VectorXd::Ones(2), false};
        const ScalarField out = heat_semigroup(d, 3.0, one);
        CHECK(out.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("negative sigma rejected") {
        CHECK_THROWS_AS(heat_semigroup(d, -0.1, f), std::invalid_argument);
    }
}

TEST_CASE("heat semigroup properties on a random host") {
    const auto m = build_random_graph(20, 77);
    const auto d = decompose(m);
    const ScalarField f = random_mean_zero_field(m, 5);

    SUBCASE("semigroup composition") {
        const ScalarField ab = heat_semigroup(d, 0.3, heat_semigroup(d, 0.7, f));
        const ScalarField whole = heat_semigroup(d, 1.0, f);
        const double scale = whole.values.cwiseAbs().maxCoeff() + 1.0;
        CHECK((ab.values - whole.values).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
    SUBCASE("range stays inside the input range") {
        for (double sigma : {0.01, 0.5, 5.0}) {
            const ScalarField out = heat_semigroup(d, sigma, f);
            CHECK(out.values.maxCoeff() <= f.values.maxCoeff() + 1e-9);
            CHECK(out.values.minCoeff() >= f.values.minCoeff() - 1e-9);
        }
    }
    SUBCASE("mean preserved") {
        ScalarField shifted = f;
        shifted.values.array() += 0.5;
        shifted.mean_zero = false;
        const double before = mean_integral(shifted);
        const double after = mean_integral(heat_semigroup(d, 0.9, shifted));
        CHECK(after == doctest::Approx(before).epsilon(1e-10));
    }
    SUBCASE("sigma generator semigroup norm bound e^{-1}") {
        for (double sigma : {1e-3, 1e-1, 1.0, 10.0, 1e3}) {
            const ScalarField heated = heat_semigroup(d, sigma, f);
            const Eigen::VectorXd out = sigma * m->laplacian(heated.values);
            const double ratio = std::sqrt(m->mu_vector().dot(out.cwiseProduct(out))) /
                                 std::sqrt(m->mu_vector().dot(f.values.cwiseProduct(f.values)));
            CHECK(ratio <= std::exp(-1.0) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("inverse square root, spectral route") {
    const auto p2 = unit_path2();
    const auto d = decompose(p2);
    Eigen::VectorXd pm(2);
    pm << 1.0, -1.0;

    SUBCASE("closed form on the path") {
        const ScalarField out = inv_sqrt_spectral(d, ScalarField{p2, pm, true});
        CHECK(out.values[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(out.values[1] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("rejects non-mean-zero input") {
        Eigen::VectorXd bad(2);
        bad << 1.0, 0.0;
        CHECK_THROWS_AS(inv_sqrt_spectral(d, ScalarField{p2, bad, false}), std::invalid_argument);
    }

    const auto m = build_torus(2, 4, 4.0);
    const auto dm = decompose(m);
    SUBCASE("eigenvector maps to lambda^{-1/2} eigenvector") {
        const int k = 3;
        const ScalarField vk{m, dm.eigenvectors().col(k), true};
        const ScalarField out = inv_sqrt_spectral(dm, vk);
        const Eigen::VectorXd want = dm.eigenvectors().col(k) / std::sqrt(dm.eigenvalues()[k]);
        CHECK((out.values - want).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("square of the operator inverts the negated generator") {
        const ScalarField f = random_mean_zero_field(m, 21);
        const ScalarField twice = inv_sqrt_spectral(dm, inv_sqrt_spectral(dm, f));
        const Eigen::VectorXd back = -m->laplacian(twice.values);
        CHECK((back - f.values).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("subordination quadrature") {
    SUBCASE("scalar identities") {
        // Integral value lambda^{-1/2}: 1 at lambda=1, 1/2 at lambda=4.
        CHECK(subordination_symbol(1.0, 1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(subordination_symbol(4.0, 1.0, 4.0) == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("symbol accuracy across a wide spectrum") {
        const double gap = 0.37;
        const double top = 2400.0;
        for (double lambda : {0.37, 1.0, 10.0, 300.0, 2400.0}) {
            const double got = subordination_symbol(lambda, gap, top);
            CHECK(got == doctest::Approx(1.0 / std::sqrt(lambda)).epsilon(1e-8));
        }
    }
    SUBCASE("matches the spectral route on a cycle") {
        const auto m = build_cycle(4, 4.0);
        const auto d = decompose(m);
        const ScalarField f = random_mean_zero_field(m, 31);
        const ScalarField a = inv_sqrt_spectral(d, f);
        const ScalarField b = inv_sqrt_subordination(d, f);
        const double rel = std::sqrt(m->mu_vector().dot((a.values - b.values).cwiseAbs2())) /
                           std::sqrt(m->mu_vector().dot(a.values.cwiseAbs2()));
        CHECK(rel <= 1e-6);
    }
    SUBCASE("no spectral gap rejected") {
        const auto one = std::make_shared<WeightedGraphManifold>(
            std::vector<double>{1.0}, std::vector<Edge>{}, 1, std::vector<std::string>{}, "pt");
        const auto d = decompose(one);
        const ScalarField z{one, Eigen::VectorXd::Zero(1), true};
        CHECK_THROWS_AS(inv_sqrt_subordination(d, z), std::invalid_argument);
    }
}

TEST_CASE("solve_poisson") {
    const auto m = product(build_cycle(4, 4.0), build_cycle(8, 8.0));
    const auto d = decompose(m);
    SUBCASE("eigenvector closed form") {
        const int k = 5;
        const ScalarField vk{m, d.eigenvectors().col(k), true};
        const ScalarField u = solve_poisson(d, vk);
        const Eigen::VectorXd want = -d.eigenvectors().col(k) / d.eigenvalues()[k];
        CHECK((u.values - want).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("zero maps to zero") {
        const ScalarField z{m, Eigen::VectorXd::Zero(m->vertex_count()), true};
        CHECK(solve_poisson(d, z).values.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("residual on random mean-zero data") {
        for (std::uint64_t c = 0; c < 5; ++c) {
            const ScalarField f = random_mean_zero_field(m, 100 + c);
            const ScalarField u = solve_poisson(d, f);
            const Eigen::VectorXd residual = m->laplacian(u.values) - f.values;
            const double rel = std::sqrt(m->mu_vector().dot(residual.cwiseAbs2())) /
                               std::sqrt(m->mu_vector().dot(f.values.cwiseAbs2()));
            CHECK(rel <= 1e-10);
        }
    }
}

TEST_CASE("gradient magnitude") {
    const auto m = build_random_graph(22, 8);
    SUBCASE("constants have zero gradient") {
        const ScalarField one{m, Eigen::VectorXd::Ones(m->vertex_count()), false};
        CHECK(gradient_magnitude(one).values.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("energy identity") {
        const ScalarField f = random_mean_zero_field(m, 55);
        const GradientMagnitudeField g = gradient_magnitude(f);
        const double lhs = m->mu_vector().dot(g.values.cwiseAbs2());
        const double rhs = -m->mu_vector().dot(f.values.cwiseProduct(m->laplacian(f.values)));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
    SUBCASE("unknown tag rejected") {
        const ScalarField f = random_mean_zero_field(m, 56);
        CHECK_THROWS_AS(gradient_magnitude(f, "axis"), std::invalid_argument);
    }
    SUBCASE("restriction never exceeds the full magnitude") {
        const CylinderGraph c = build_cylinder(build_cycle(5, 5.0), 6, 1.0);
        const ScalarField f = random_mean_zero_field(c.graph(), 57);
        const GradientMagnitudeField full = gradient_magnitude(f);
        const GradientMagnitudeField base = gradient_magnitude(f, "base");
        const GradientMagnitudeField axis = gradient_magnitude(f, "axis");
        for (int v = 0; v < full.values.size(); ++v) {
            CHECK(base.values[v] <= full.values[v] + 1e-14);
            CHECK(axis.values[v] <= full.values[v] + 1e-14);
        }
    }
}

TEST_CASE("riesz transform") {
    SUBCASE("path closed form") {
        const auto p2 = unit_path2();
        const auto d = decompose(p2);
        Eigen::VectorXd pm(2);
        pm << 1.0, -1.0;
        const GradientMagnitudeField r = riesz_transform(d, ScalarField{p2, pm, true});
        CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lp_norm(r, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("eigenvectors map isometrically in L2") {
        const auto m = build_random_graph(20, 4);
        const auto d = decompose(m);
        for (int k : {1, 3, 7}) {
            const ScalarField vk{m, d.eigenvectors().col(k), true};
            const GradientMagnitudeField r = riesz_transform(d, vk);
            CHECK(lp_norm(r, 2.0) == doctest::Approx(lp_norm(vk, 2.0)).epsilon(1e-9));
        }
    }
    SUBCASE("commutes with axis translation on a periodic cylinder") {
        const CylinderGraph c = build_cylinder(build_cycle(5, 5.0), 8, 0.7);
        const auto d = decompose(c.graph());
        const ScalarField f = random_mean_zero_field(c.graph(), 61);
        const GradientMagnitudeField lhs =
            riesz_transform(d, translate(c, f, 3));
        const GradientMagnitudeField rf = riesz_transform(d, f);
        const ScalarField shifted =
            translate(c, ScalarField{c.graph(), rf.values, false}, 3);
        CHECK((lhs.values - shifted.values).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("edge differences factor the generator") {
    const auto m = build_random_graph(19, 6);
    const EdgeDifference diff(m);
    const ScalarField f = random_mean_zero_field(m, 71);
    const ScalarField g = random_mean_zero_field(m, 72);

    // Adjointness: <Ef, eta> = <f, E* eta>_mu.
    const Eigen::VectorXd eta = diff.apply(g.values);
    const double lhs = diff.apply(f.values).dot(eta);
    const double rhs = m->mu_vector().dot(f.values.cwiseProduct(diff.apply_adjoint(eta)));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));

    // E* E = negated generator.
    const Eigen::VectorXd via_edges = diff.apply_adjoint(diff.apply(f.values));
    const Eigen::VectorXd direct = -m->laplacian(f.values);
    CHECK((via_edges - direct).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("rescaled riesz family") {
    const CylinderGraph c = build_cylinder(build_cycle(6, 6.0), 12, 0.8);
    const CylinderSpectral cs(c);
    const ScalarField f = random_mean_zero_field(c.base(), 81);
    Eigen::VectorXd rho = cosine_bump(12, 6, 3, true);
    const ScalarField big = make_field(c.graph(), tensor_values(c, f.values, rho));

    SUBCASE("lambda = 1 equals the base-restricted transform on the product") {
        const auto d = decompose(c.graph());
        const GradientMagnitudeField reference = riesz_transform(d, big, "base");
        const GradientMagnitudeField scaled = rescaled_riesz(cs, 1.0, big);
        CHECK((reference.values - scaled.values).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("L2 norm is nondecreasing as lambda decreases") {
        double previous = -1.0;
        for (double lambda : {1.0, 0.5, 0.25, 0.125}) {
            const double value = lp_norm(rescaled_riesz(cs, lambda, big), 2.0);
            if (previous >= 0.0) CHECK(value >= previous - 1e-12);
            previous = value;
        }
    }
    SUBCASE("limit recovers the base transform tensor rho") {
        const GradientMagnitudeField tiny = rescaled_riesz(cs, 1e-4, big);
        const GradientMagnitudeField base_r = riesz_transform(cs.base(), f);
        Eigen::VectorXd want(c.graph()->vertex_count());
        for (int x = 0; x < c.base()->vertex_count(); ++x)
            for (int t = 0; t < c.axis_steps(); ++t)
                want[c.vertex_of(x, t)] = base_r.values[x] * std::fabs(rho[t]);
        CHECK((tiny.values - want).cwiseAbs().maxCoeff() <= 1e-5);
    }
    SUBCASE("invalid lambda rejected") {
        CHECK_THROWS_AS(rescaled_riesz(cs, 0.0, big), std::invalid_argument);
        CHECK_THROWS_AS(rescaled_riesz(cs, -1.0, big), std::invalid_argument);
    }
}

TEST_CASE("kronecker spectrum cross-check") {
    const auto a = build_cycle(4, 4.0);
    const auto p2 = unit_path2();
    const auto ab = product(a, p2);
    const auto da = decompose(a);
    const auto db = decompose(p2);
    const auto dab = decompose(ab);
    std::vector<double> sums;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) sums.push_back(da.eigenvalues()[i] + db.eigenvalues()[j]);
    std::sort(sums.begin(), sums.end());
    for (int k = 0; k < 8; ++k)
        CHECK(dab.eigenvalues()[k] == doctest::Approx(sums[static_cast<std::size_t>(k)]).epsilon(1e-9));
}

TEST_CASE("spectral cache round trip") {
    const auto m = build_cycle(6, 3.0);
    const auto d = decompose(m);
    std::ostringstream os;
    d.save(os);
    std::istringstream is(os.str());
    const auto back = SpectralDecomposition::load(is, m);
    CHECK((back.eigenvalues() - d.eigenvalues()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.eigenvectors() - d.eigenvectors()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.kernel_dim() == d.kernel_dim());
}
