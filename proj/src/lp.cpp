#include "rieszlab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rieszlab/kernels.hpp"
#include "rieszlab/parallel.hpp"
#include "rieszlab/rng.hpp"

namespace rieszlab {

double lp_norm_values(const WeightedGraphManifold& host, const Eigen::VectorXd& vals, double p) {
    if (vals.size() != host.vertex_count())
        throw std::invalid_argument("field size does not match host");
    if (std::isinf(p)) return vals.cwiseAbs().maxCoeff();
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");
    const auto n = static_cast<std::size_t>(vals.size());
    const double* mu = host.mu_vector().data();
    double sum;
    if (p == std::floor(p) && p <= 8.0) {
        sum = kernels::wpow_int(vals.data(), mu, static_cast<int>(p), n);
    } else {
        sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += mu[i] * std::pow(std::fabs(vals[static_cast<Eigen::Index>(i)]), p);
    }
    return std::pow(sum, 1.0 / p);
}

double lp_norm(const ScalarField& f, double p) { return lp_norm_values(*f.host, f.values, p); }

double lp_norm(const GradientMagnitudeField& g, double p) {
    return lp_norm_values(*g.host, g.values, p);
}

ScalarField project_mean_zero(const ScalarField& f) {
    const double mean = mean_integral(f) / f.host->total_volume();
    ScalarField out{f.host, f.values.array() - mean, true};
    return out;
}

double hilbert_reference(double p) {
    if (!(p > 1.0) || std::isinf(p))
        throw std::invalid_argument("hilbert_reference needs p in (1, infinity)");
    const double angle = 3.14159265358979323846 / (2.0 * p);
    return std::max(std::tan(angle), 1.0 / std::tan(angle));
}

namespace {

// |x|^{q-1} sgn(x), the duality map between L^p and L^{p'} spaces.
Eigen::VectorXd duality_map(const Eigen::VectorXd& x, double q) {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::fabs(x[i]);
        out[i] = a > 0.0 ? std::copysign(std::pow(a, q - 1.0), x[i]) : 0.0;
    }
    return out;
}

Eigen::VectorXd project_values_mean_zero(const WeightedGraphManifold& host,
                                         const Eigen::VectorXd& vals) {
    const double mean = host.mu_vector().dot(vals) / host.total_volume();
    return vals.array() - mean;
}

} // namespace

MatrixOperator::MatrixOperator(ManifoldPtr host, Eigen::MatrixXd a, bool mean_zero_domain)
    : host_(std::move(host)), a_(std::move(a)), mean_zero_(mean_zero_domain) {
    const Eigen::VectorXd& mu = host_->mu_vector();
    adjoint_ = mu.cwiseInverse().asDiagonal() * a_.transpose() * mu.asDiagonal();
}

Eigen::VectorXd MatrixOperator::apply(const Eigen::VectorXd& f) const { return a_ * f; }

PNormOperator::AscentStep MatrixOperator::value_and_ascent(const Eigen::VectorXd& f,
                                                           double p) const {
    Eigen::VectorXd y = a_ * f;
    const double value = lp_norm_values(*host_, y, p);
    return {value, adjoint_ * duality_map(y, p)};
}

RieszOperator::RieszOperator(const SpectralDecomposition* decomposition,
                             std::string_view restrict_tag)
    : decomposition_(decomposition), diff_(decomposition->host(), restrict_tag) {}

Eigen::VectorXd RieszOperator::inv_sqrt(const Eigen::VectorXd& f) const {
    return decomposition_->apply_multiplier(
        [](double lambda) { return lambda > 0.0 ? 1.0 / std::sqrt(lambda) : 0.0; }, f);
}

Eigen::VectorXd RieszOperator::apply(const Eigen::VectorXd& f) const {
    const Eigen::VectorXd u = inv_sqrt(f);
    const Eigen::VectorXd eta = diff_.apply(u);
    const auto& host = *decomposition_->host();
    Eigen::VectorXd energy = Eigen::VectorXd::Zero(host.vertex_count());
    const auto& edges = host.edges();
    for (std::size_t i = 0; i < diff_.edge_indices().size(); ++i) {
        const Edge& e = edges[static_cast<std::size_t>(diff_.edge_indices()[i])];
        const double sq = eta[static_cast<Eigen::Index>(i)] * eta[static_cast<Eigen::Index>(i)];
        energy[e.u] += sq;
        energy[e.v] += sq;
    }
    Eigen::VectorXd out(host.vertex_count());
    for (int v = 0; v < host.vertex_count(); ++v) out[v] = std::sqrt(energy[v] / (2.0 * host.mu(v)));
    return out;
}

PNormOperator::AscentStep RieszOperator::value_and_ascent(const Eigen::VectorXd& f,
                                                          double p) const {
    const auto& host = *decomposition_->host();
    const Eigen::VectorXd u = inv_sqrt(f);
    const Eigen::VectorXd eta = diff_.apply(u);

    Eigen::VectorXd energy = Eigen::VectorXd::Zero(host.vertex_count());
    const auto& edges = host.edges();
    for (std::size_t i = 0; i < diff_.edge_indices().size(); ++i) {
        const Edge& e = edges[static_cast<std::size_t>(diff_.edge_indices()[i])];
        const double sq = eta[static_cast<Eigen::Index>(i)] * eta[static_cast<Eigen::Index>(i)];
        energy[e.u] += sq;
        energy[e.v] += sq;
    }
    Eigen::VectorXd magnitude(host.vertex_count());
    for (int v = 0; v < host.vertex_count(); ++v)
        magnitude[v] = std::sqrt(energy[v] / (2.0 * host.mu(v)));
    const double value = lp_norm_values(host, magnitude, p);

    // d ||g||_p^p / d eta_e = p eta_e (g(u)^{p-2} + g(v)^{p-2}) / 2; the
    // floor keeps p < 2 finite where the magnitude vanishes (the product
    // eta * g^{p-2} -> 0 there anyway).
    Eigen::VectorXd power(host.vertex_count());
    for (int v = 0; v < host.vertex_count(); ++v) {
        power[v] = magnitude[v] > 1e-200 ? std::pow(magnitude[v], p - 2.0) : 0.0;
    }
    Eigen::VectorXd dual_edges(diff_.edge_count());
    for (std::size_t i = 0; i < diff_.edge_indices().size(); ++i) {
        const Edge& e = edges[static_cast<std::size_t>(diff_.edge_indices()[i])];
        dual_edges[static_cast<Eigen::Index>(i)] =
            eta[static_cast<Eigen::Index>(i)] * 0.5 * (power[e.u] + power[e.v]);
    }
    return {value, inv_sqrt(diff_.apply_adjoint(dual_edges))};
}

namespace {

struct RestartResult {
    double value = -1.0;
    Eigen::VectorXd witness;
    int iterations = 0;
    bool converged = false;
};

RestartResult run_restart(const PNormOperator& op, double p, Eigen::VectorXd f,
                          const OpNormOptions& options) {
    const auto& domain = *op.domain();
    const double p_dual = p / (p - 1.0);

    RestartResult result;
    if (op.mean_zero_domain()) f = project_values_mean_zero(domain, f);
    double norm = lp_norm_values(domain, f, p);
    if (!(norm > 0.0)) return result;
    f /= norm;

    double previous = -1.0;
    int stable = 0;
    for (int it = 0; it < options.max_iterations; ++it) {
        const auto step = op.value_and_ascent(f, p);
        result.iterations = it + 1;
        if (step.value > result.value) {
            result.value = step.value;
            result.witness = f;
        }
        if (step.value <= 0.0) {
            // Zero output: nothing to ascend along.
            result.converged = true;
            break;
        }
        if (previous >= 0.0 &&
            std::fabs(step.value - previous) <= options.rel_tol * std::fabs(step.value)) {
            if (++stable >= options.stable_iterations) {
                result.converged = true;
                break;
            }
        } else {
            stable = 0;
        }
        previous = step.value;

        Eigen::VectorXd direction = step.direction;
        if (op.mean_zero_domain()) direction = project_values_mean_zero(domain, direction);
        Eigen::VectorXd next = duality_map(direction, p_dual);
        if (op.mean_zero_domain()) next = project_values_mean_zero(domain, next);
        norm = lp_norm_values(domain, next, p);
        if (!(norm > 0.0)) break;
        f = next / norm;
    }
    return result;
}

} // namespace

OperatorNormEstimate op_norm_lower_bound(const PNormOperator& op, double p,
                                         const OpNormOptions& options, std::uint64_t seed,
                                         const std::vector<Eigen::VectorXd>& extra_starts) {
    if (!(p > 1.0) || std::isinf(p))
        throw std::invalid_argument("operator norm estimation needs p in (1, infinity)");
    const auto& domain = *op.domain();
    const int n = domain.vertex_count();
    const int bumps = std::min(4, n);
    const std::size_t total =
        extra_starts.size() + static_cast<std::size_t>(std::max(1, options.restarts));

    // start(i) depends only on i and the seed, so enlarging the restart
    // budget never changes earlier starts (best-so-far monotonicity).
    auto make_start = [&](std::size_t i) -> Eigen::VectorXd {
        if (i < extra_starts.size()) return extra_starts[i];
        const std::size_t j = i - extra_starts.size();
        if (j < static_cast<std::size_t>(bumps)) {
            Eigen::VectorXd bump = Eigen::VectorXd::Zero(n);
            bump[static_cast<Eigen::Index>((j * static_cast<std::size_t>(n)) /
                                           static_cast<std::size_t>(bumps))] = 1.0;
            return bump;
        }
        Rng rng(seed, "opnorm-start", i);
        Eigen::VectorXd f(n);
        for (int v = 0; v < n; ++v) f[v] = rng.normal();
        return f;
    };

    std::vector<RestartResult> results(total);
    parallel_for(total, [&](std::size_t i) {
        results[i] = run_restart(op, p, make_start(i), options);
    });

    OperatorNormEstimate estimate;
    estimate.p = p;
    estimate.restarts = static_cast<int>(total);
    std::size_t best = total;
    for (std::size_t i = 0; i < total; ++i) {
        if (results[i].value >= 0.0 && (best == total || results[i].value > results[best].value))
            best = i;
    }
    if (best == total) {
        // Every start collapsed to zero; report the zero bound.
        estimate.value = 0.0;
        estimate.converged = true;
        estimate.witness = ScalarField{op.domain(), Eigen::VectorXd::Zero(n), true};
        return estimate;
    }

    const RestartResult& winner = results[best];
    estimate.iterations = winner.iterations;
    estimate.converged = winner.converged;
    estimate.witness = ScalarField{op.domain(), winner.witness, op.mean_zero_domain()};
    // Recompute from the witness so the reported value is certified.
    const double witness_norm = lp_norm_values(domain, winner.witness, p);
    estimate.value =
        lp_norm_values(*op.range(), op.apply(winner.witness), p) / witness_norm;
    return estimate;
}

OperatorNormEstimate riesz_norm(const SpectralDecomposition& d, double p,
                                const OpNormOptions& options, std::uint64_t seed,
                                const std::vector<Eigen::VectorXd>& extra_starts) {
    RieszOperator op(&d);
    std::vector<Eigen::VectorXd> starts = extra_starts;
    const int n = d.host()->vertex_count();
    for (int k = d.kernel_dim(); k < std::min<int>(d.kernel_dim() + 4, n); ++k) {
        starts.push_back(d.eigenvectors().col(k));
    }
    return op_norm_lower_bound(op, p, options, seed, starts);
}

OperatorNormEstimate riesz_norm(const ManifoldPtr& m, double p, const OpNormOptions& options,
                                std::uint64_t seed) {
    const SpectralDecomposition d = decompose(m);
    return riesz_norm(d, p, options, seed);
}

OperatorNormEstimate riesz_norm(const CylinderGraph& c, double p, const OpNormOptions& options,
                                std::uint64_t seed) {
    return riesz_norm(c.graph(), p, options, seed);
}

OperatorNormEstimate riesz_norm(const GluedManifold& g, double p, const OpNormOptions& options,
                                std::uint64_t seed) {
    return riesz_norm(g.ambient(), p, options, seed);
}

} // namespace rieszlab
