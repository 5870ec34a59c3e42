#include "rieszlab/spectral.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "rieszlab/errors.hpp"
#include "rieszlab/kernels.hpp"
#include "rieszlab/textio.hpp"

namespace rieszlab {

void require_mean_zero(const ScalarField& f, double rel_tol) {
    if (!is_mean_zero(f, rel_tol))
        throw std::invalid_argument("field must have mean zero");
}

double SpectralDecomposition::spectral_gap() const {
    if (kernel_dim_ >= eigenvalues_.size()) return 0.0;
    return eigenvalues_[kernel_dim_];
}

Eigen::VectorXd SpectralDecomposition::analyze(const Eigen::VectorXd& f) const {
    const auto n = static_cast<std::size_t>(f.size());
    Eigen::VectorXd weighted(f.size());
    kernels::mul(f.data(), host_->mu_vector().data(), weighted.data(), n);
    Eigen::VectorXd coeffs(eigenvalues_.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        coeffs[k] = kernels::dot(eigenvectors_.col(k).data(), weighted.data(), n);
    }
    return coeffs;
}

Eigen::VectorXd SpectralDecomposition::synthesize(const Eigen::VectorXd& coeffs) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(eigenvectors_.rows());
    const auto n = static_cast<std::size_t>(out.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != 0.0) kernels::axpy(coeffs[k], eigenvectors_.col(k).data(), out.data(), n);
    }
    return out;
}

Eigen::VectorXd SpectralDecomposition::apply_multiplier(const std::function<double(double)>& phi,
                                                        const Eigen::VectorXd& f) const {
    Eigen::VectorXd coeffs = analyze(f);
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs[k] *= phi(eigenvalues_[k]);
    return synthesize(coeffs);
}

SpectralDecomposition decompose(const ManifoldPtr& m, int size_cap) {
    const int n = m->vertex_count();
    if (n > size_cap)
        throw ResourceLimitError("host has " + std::to_string(n) +
                                 " vertices, above the dense decomposition cap of " +
                                 std::to_string(size_cap));

    // Symmetrized operator S = D^{-1/2} (Deg - W) D^{-1/2}; eigenpairs map
    // back through D^{-1/2} to mu-orthonormal eigenvectors of the generator.
    Eigen::VectorXd inv_sqrt_mu(n);
    for (int v = 0; v < n; ++v) inv_sqrt_mu[v] = 1.0 / std::sqrt(m->mu(v));
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int v = 0; v < n; ++v) s(v, v) = m->weighted_degree(v) / m->mu(v);
    for (const Edge& e : m->edges()) {
        const double coupling = e.w * inv_sqrt_mu[e.u] * inv_sqrt_mu[e.v];
        s(e.u, e.v) -= coupling;
        s(e.v, e.u) -= coupling;
    }
    for (const Edge& e : m->edges()) {
        if (s(e.u, e.v) != s(e.v, e.u))
            throw InternalError("symmetrized generator is not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    if (solver.info() != Eigen::Success) throw InternalError("eigensolver failed to converge");

    SpectralDecomposition d;
    d.host_ = m;
    d.eigenvalues_ = solver.eigenvalues();
    d.eigenvectors_ = solver.eigenvectors();
    for (int v = 0; v < n; ++v) d.eigenvectors_.row(v) *= inv_sqrt_mu[v];

    const double lambda_max = d.eigenvalues_[n - 1];
    const double kernel_tol = 1e-12 * std::max(1.0, lambda_max);
    int kernel_dim = 0;
    for (int k = 0; k < n; ++k) {
        if (d.eigenvalues_[k] < -1e-10)
            throw InternalError("negative eigenvalue from a positive semidefinite operator");
        if (d.eigenvalues_[k] <= kernel_tol) {
            d.eigenvalues_[k] = 0.0;
            ++kernel_dim;
        }
    }
    d.kernel_dim_ = kernel_dim;
    if (kernel_dim != 1)
        throw InternalError("connected host must have a one-dimensional kernel");
    // The kernel eigenvector is the constant; store it exactly.
    d.eigenvectors_.col(0).setConstant(1.0 / std::sqrt(m->total_volume()));
    return d;
}

ScalarField heat_semigroup(const SpectralDecomposition& d, double sigma, const ScalarField& f) {
    if (f.host != d.host()) throw std::invalid_argument("field host does not match decomposition");
    if (sigma < 0.0) throw std::invalid_argument("heat semigroup needs sigma >= 0");
    Eigen::VectorXd out =
        d.apply_multiplier([sigma](double lambda) { return std::exp(-sigma * lambda); }, f.values);
    return {f.host, std::move(out), f.mean_zero};
}

ScalarField inv_sqrt_spectral(const SpectralDecomposition& d, const ScalarField& f) {
    if (f.host != d.host()) throw std::invalid_argument("field host does not match decomposition");
    require_mean_zero(f);
    Eigen::VectorXd out = d.apply_multiplier(
        [](double lambda) { return lambda > 0.0 ? 1.0 / std::sqrt(lambda) : 0.0; }, f.values);
    return {f.host, std::move(out), true};
}

namespace {

// Nodes and weights of n-point Gauss-Legendre on [-1, 1] by Newton iteration
// on the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double deriv = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            deriv = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / deriv;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

struct QuadratureRule {
    std::vector<double> t;
    std::vector<double> w;
};

// Composite rule for Int_0^T g(t) dt with panels graded toward 0 so the
// narrow Gaussians of the largest eigenvalues are resolved.
QuadratureRule subordination_rule(double gap, double lambda_max, const SubordinationQuadrature& q) {
    if (!(gap > 0.0)) throw std::invalid_argument("spectral gap estimate must be positive");
    const double t_max = std::sqrt(std::log(1.0 / q.trunc_eps) / gap);
    const double smallest_needed = 0.5 / std::sqrt(std::max(lambda_max, gap));
    int panels = q.min_panels;
    while (t_max * std::pow(q.panel_ratio, panels - 1) > smallest_needed && panels < 200) ++panels;

    std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
    breaks[0] = 0.0;
    for (int j = 1; j <= panels; ++j) {
        breaks[static_cast<std::size_t>(j)] = t_max * std::pow(q.panel_ratio, panels - j);
    }

    std::vector<double> gl_nodes, gl_weights;
    gauss_legendre(q.nodes_per_panel, gl_nodes, gl_weights);

    QuadratureRule rule;
    for (int j = 0; j < panels; ++j) {
        const double a = breaks[static_cast<std::size_t>(j)];
        const double b = breaks[static_cast<std::size_t>(j) + 1];
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        for (int i = 0; i < q.nodes_per_panel; ++i) {
            rule.t.push_back(mid + half * gl_nodes[static_cast<std::size_t>(i)]);
            rule.w.push_back(half * gl_weights[static_cast<std::size_t>(i)]);
        }
    }
    return rule;
}

double symbol_from_rule(double lambda, const QuadratureRule& rule) {
    // After sigma = t^2 the integrand is 2 pi^{-1/2} e^{-lambda t^2}.
    constexpr double two_over_sqrt_pi = 1.1283791670955125738961589031;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.t.size(); ++i) {
        acc += rule.w[i] * std::exp(-lambda * rule.t[i] * rule.t[i]);
    }
    return two_over_sqrt_pi * acc;
}

} // namespace

double subordination_symbol(double lambda, double gap, double lambda_max,
                            const SubordinationQuadrature& q) {
    const QuadratureRule rule = subordination_rule(gap, lambda_max, q);
    return symbol_from_rule(lambda, rule);
}

ScalarField inv_sqrt_subordination(const SpectralDecomposition& d, const ScalarField& f,
                                   const SubordinationQuadrature& q) {
    if (f.host != d.host()) throw std::invalid_argument("field host does not match decomposition");
    require_mean_zero(f);
    const double gap = d.spectral_gap();
    if (!(gap > 0.0)) throw std::invalid_argument("spectral gap estimate must be positive");
    const double lambda_max = d.eigenvalues()[d.eigenvalues().size() - 1];
    const QuadratureRule rule = subordination_rule(gap, lambda_max, q);
    Eigen::VectorXd out = d.apply_multiplier(
        [&rule](double lambda) { return lambda > 0.0 ? symbol_from_rule(lambda, rule) : 0.0; },
        f.values);
    return {f.host, std::move(out), true};
}

ScalarField solve_poisson(const SpectralDecomposition& d, const ScalarField& f) {
    if (f.host != d.host()) throw std::invalid_argument("field host does not match decomposition");
    require_mean_zero(f);
    Eigen::VectorXd out = d.apply_multiplier(
        [](double lambda) { return lambda > 0.0 ? -1.0 / lambda : 0.0; }, f.values);
    return {f.host, std::move(out), true};
}

GradientMagnitudeField gradient_magnitude(const ScalarField& f, std::string_view restrict_tag) {
    const auto& m = *f.host;
    int tag = -1;
    if (!restrict_tag.empty()) {
        tag = m.tag_index(restrict_tag);
        if (tag < 0)
            throw std::invalid_argument("unknown factor tag: " + std::string(restrict_tag));
    }
    Eigen::VectorXd energy = Eigen::VectorXd::Zero(m.vertex_count());
    for (const Edge& e : m.edges()) {
        if (tag >= 0 && e.tag != tag) continue;
        const double diff = f.values[e.u] - f.values[e.v];
        const double contribution = e.w * diff * diff;
        energy[e.u] += contribution;
        energy[e.v] += contribution;
    }
    Eigen::VectorXd out(m.vertex_count());
    for (int v = 0; v < m.vertex_count(); ++v) {
        out[v] = std::sqrt(energy[v] / (2.0 * m.mu(v)));
    }
    return {f.host, std::move(out), std::string(restrict_tag)};
}

GradientMagnitudeField riesz_transform(const SpectralDecomposition& d, const ScalarField& f,
                                       std::string_view restrict_tag) {
    return gradient_magnitude(inv_sqrt_spectral(d, f), restrict_tag);
}

EdgeDifference::EdgeDifference(ManifoldPtr host, std::string_view restrict_tag)
    : host_(std::move(host)) {
    int tag = -1;
    if (!restrict_tag.empty()) {
        tag = host_->tag_index(restrict_tag);
        if (tag < 0)
            throw std::invalid_argument("unknown factor tag: " + std::string(restrict_tag));
    }
    const auto& edges = host_->edges();
    for (int e = 0; e < host_->edge_count(); ++e) {
        if (tag >= 0 && edges[static_cast<std::size_t>(e)].tag != tag) continue;
        edge_index_.push_back(e);
        sqrt_w_.push_back(std::sqrt(edges[static_cast<std::size_t>(e)].w));
    }
}

Eigen::VectorXd EdgeDifference::apply(const Eigen::VectorXd& f) const {
    Eigen::VectorXd out(edge_count());
    const auto& edges = host_->edges();
    for (std::size_t i = 0; i < edge_index_.size(); ++i) {
        const Edge& e = edges[static_cast<std::size_t>(edge_index_[i])];
        out[static_cast<Eigen::Index>(i)] = sqrt_w_[i] * (f[e.u] - f[e.v]);
    }
    return out;
}

Eigen::VectorXd EdgeDifference::apply_adjoint(const Eigen::VectorXd& eta) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(host_->vertex_count());
    const auto& edges = host_->edges();
    for (std::size_t i = 0; i < edge_index_.size(); ++i) {
        const Edge& e = edges[static_cast<std::size_t>(edge_index_[i])];
        const double flux = sqrt_w_[i] * eta[static_cast<Eigen::Index>(i)];
        out[e.u] += flux;
        out[e.v] -= flux;
    }
    for (int v = 0; v < out.size(); ++v) out[v] /= host_->mu(v);
    return out;
}

Eigen::VectorXd divergence(const EdgeDifference& e, const Eigen::VectorXd& eta) {
    return -e.apply_adjoint(eta);
}

CylinderSpectral::CylinderSpectral(const CylinderGraph& c, int size_cap)
    : cylinder_(c), base_(decompose(c.base(), size_cap)), axis_(decompose(c.axis(), size_cap)) {}

ScalarField CylinderSpectral::inv_sqrt_rescaled(const ScalarField& f, double lambda) const {
    if (f.host != cylinder_.graph())
        throw std::invalid_argument("field host is not this cylinder");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    require_mean_zero(f);

    const int nb = cylinder_.base()->vertex_count();
    const int m = cylinder_.axis_steps();
    Eigen::MatrixXd values(nb, m);
    for (int x = 0; x < nb; ++x)
        for (int t = 0; t < m; ++t) values(x, t) = f.values[cylinder_.vertex_of(x, t)];

    // Tensor coefficients c_{jk} = a_j^T D_base F D_axis b_k.
    const Eigen::MatrixXd base_weighted =
        cylinder_.base()->mu_vector().asDiagonal() * base_.eigenvectors();
    const Eigen::MatrixXd axis_weighted =
        cylinder_.axis()->mu_vector().asDiagonal() * axis_.eigenvectors();
    Eigen::MatrixXd coeffs = base_weighted.transpose() * values * axis_weighted;

    const double scale = base_.eigenvalues()[nb - 1] + lambda * lambda * axis_.eigenvalues()[m - 1];
    for (int j = 0; j < nb; ++j) {
        for (int k = 0; k < m; ++k) {
            const double symbol_arg =
                base_.eigenvalues()[j] + lambda * lambda * axis_.eigenvalues()[k];
            if (symbol_arg <= 1e-14 * std::max(1.0, scale)) {
                if (std::fabs(coeffs(j, k)) > 1e-10 * f.values.norm())
                    throw std::invalid_argument(
                        "field has a component on the zero mode of the rescaled operator");
                coeffs(j, k) = 0.0;
            } else {
                coeffs(j, k) /= std::sqrt(symbol_arg);
            }
        }
    }

    const Eigen::MatrixXd u = base_.eigenvectors() * coeffs * axis_.eigenvectors().transpose();
    Eigen::VectorXd out(f.values.size());
    for (int x = 0; x < nb; ++x)
        for (int t = 0; t < m; ++t) out[cylinder_.vertex_of(x, t)] = u(x, t);
    return {f.host, std::move(out), true};
}

GradientMagnitudeField rescaled_riesz(const CylinderSpectral& cs, double lambda,
                                      const ScalarField& f) {
    return gradient_magnitude(cs.inv_sqrt_rescaled(f, lambda), "base");
}

GradientMagnitudeField rescaled_riesz(const CylinderGraph& c, double lambda,
                                      const ScalarField& f) {
    return rescaled_riesz(CylinderSpectral(c), lambda, f);
}

void SpectralDecomposition::save(std::ostream& os) const {
    const int n = static_cast<int>(eigenvalues_.size());
    os << "rieszlab-spectral 1\n";
    os << "size " << n << "\n";
    os << "kernel_dim " << kernel_dim_ << "\n";
    for (int k = 0; k < n; ++k) os << fmt17(eigenvalues_[k]) << "\n";
    for (int k = 0; k < n; ++k) {
        for (int v = 0; v < n; ++v) {
            if (v) os << " ";
            os << fmt17(eigenvectors_(v, k));
        }
        os << "\n";
    }
}

SpectralDecomposition SpectralDecomposition::load(std::istream& is, ManifoldPtr host) {
    std::string line;
    auto need_line = [&is, &line]() {
        if (!std::getline(is, line)) throw std::runtime_error("spectral cache truncated");
    };
    need_line();
    if (line != "rieszlab-spectral 1") throw std::runtime_error("not a spectral cache file");
    need_line();
    auto fields = split_fields(line);
    if (fields.size() != 2 || fields[0] != "size") throw std::runtime_error("bad size line");
    const int n = static_cast<int>(parse_long(fields[1]));
    if (n != host->vertex_count())
        throw std::runtime_error("spectral cache does not match the host size");
    need_line();
    fields = split_fields(line);
    if (fields.size() != 2 || fields[0] != "kernel_dim")
        throw std::runtime_error("bad kernel_dim line");

    SpectralDecomposition d;
    d.host_ = std::move(host);
    d.kernel_dim_ = static_cast<int>(parse_long(fields[1]));
    d.eigenvalues_.resize(n);
    for (int k = 0; k < n; ++k) {
        need_line();
        d.eigenvalues_[k] = parse_double(line);
    }
    d.eigenvectors_.resize(n, n);
    for (int k = 0; k < n; ++k) {
        need_line();
        fields = split_fields(line);
        if (static_cast<int>(fields.size()) != n) throw std::runtime_error("bad eigenvector line");
        for (int v = 0; v < n; ++v) d.eigenvectors_(v, k) = parse_double(fields[static_cast<std::size_t>(v)]);
    }
    return d;
}

} // namespace rieszlab
