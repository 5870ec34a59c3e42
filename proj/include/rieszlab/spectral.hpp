#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rieszlab/cylinder.hpp"
#include "rieszlab/graph.hpp"

namespace rieszlab {

/// Full eigendecomposition of the negated generator, mu-orthonormal
/// eigenvectors, eigenvalues ascending with the kernel clamped to exactly 0.
class SpectralDecomposition {
public:
    static constexpr int kDefaultSizeCap = 6000;

    const ManifoldPtr& host() const { return host_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// Column k is the k-th eigenvector.
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
    int kernel_dim() const { return kernel_dim_; }
    /// Smallest nonzero eigenvalue; 0 when there is none.
    double spectral_gap() const;

    /// Coefficients <f, v_k>_mu.
    Eigen::VectorXd analyze(const Eigen::VectorXd& f) const;
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
    /// sum_k phi(lambda_k) <f, v_k>_mu v_k
    Eigen::VectorXd apply_multiplier(const std::function<double(double)>& phi,
                                     const Eigen::VectorXd& f) const;

    void save(std::ostream& os) const;
    static SpectralDecomposition load(std::istream& is, ManifoldPtr host);

private:
    friend SpectralDecomposition decompose(const ManifoldPtr&, int);
    ManifoldPtr host_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    int kernel_dim_ = 0;
};

/// Dense symmetric eigensolve of the mu-symmetrized generator, mapped back.
/// Throws ResourceLimitError above the size cap.
SpectralDecomposition decompose(const ManifoldPtr& m,
                                int size_cap = SpectralDecomposition::kDefaultSizeCap);

/// e^{sigma * generator} f; sigma >= 0.
ScalarField heat_semigroup(const SpectralDecomposition& d, double sigma, const ScalarField& f);

/// Inverse square root of the negated generator on the mean-zero subspace,
/// straight from the eigendecomposition.
ScalarField inv_sqrt_spectral(const SpectralDecomposition& d, const ScalarField& f);

/// Quadrature settings for the heat-subordination route. The integral is
/// taken in the substituted variable t (sigma = t^2), which removes the
/// endpoint singularity; panels are graded geometrically toward 0 so every
/// spectral scale is resolved, and the truncation T satisfies
/// exp(-gap * T^2) <= trunc_eps.
struct SubordinationQuadrature {
    double trunc_eps = 1e-10;
    int nodes_per_panel = 16;
    double panel_ratio = 0.6;
    int min_panels = 8;
};

/// Quadrature value of pi^{-1/2} Int_0^inf s^{-1/2} e^{-lambda s} ds
/// (exact value: lambda^{-1/2}); exposed for direct testing.
double subordination_symbol(double lambda, double gap, double lambda_max,
                            const SubordinationQuadrature& q = {});

/// Same operator as inv_sqrt_spectral but through the subordination
/// integral of the heat semigroup; the two routes are compared in tests.
ScalarField inv_sqrt_subordination(const SpectralDecomposition& d, const ScalarField& f,
                                   const SubordinationQuadrature& q = {});

/// u with (generator u) = f, both mean-zero.
ScalarField solve_poisson(const SpectralDecomposition& d, const ScalarField& f);

/// Pointwise gradient length by the carre-du-champ form:
/// |grad f|(v)^2 = (2 mu(v))^{-1} sum_{u~v} w(uv) (f(u)-f(v))^2,
/// optionally restricted to edges carrying one factor tag.
struct GradientMagnitudeField {
    ManifoldPtr host;
    Eigen::VectorXd values;
    std::string restriction; // empty = all edges
};

GradientMagnitudeField gradient_magnitude(const ScalarField& f, std::string_view restrict_tag = {});

/// Gradient magnitude of the inverse square root: the Riesz transform.
GradientMagnitudeField riesz_transform(const SpectralDecomposition& d, const ScalarField& f,
                                       std::string_view restrict_tag = {});

/// Signed edge differences (E f)(e) = sqrt(w_e) (f(u_e) - f(v_e)) and the
/// mu-adjoint back to vertices; E* E is the negated generator. Used by the
/// norm-ascent chain rule and the discrete divergence.
class EdgeDifference {
public:
    explicit EdgeDifference(ManifoldPtr host, std::string_view restrict_tag = {});

    int edge_count() const { return static_cast<int>(edge_index_.size()); }
    const std::vector<int>& edge_indices() const { return edge_index_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
    Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& eta) const;

    const ManifoldPtr& host() const { return host_; }

private:
    ManifoldPtr host_;
    std::vector<int> edge_index_; // included edges (subset when restricted)
    std::vector<double> sqrt_w_;
};

/// Divergence of an edge field: the negated mu-adjoint of EdgeDifference.
Eigen::VectorXd divergence(const EdgeDifference& e, const Eigen::VectorXd& eta);

/// Separable functional calculus on a cylinder: eigendecompositions of the
/// base and axis factors, applied in the tensor basis. Powers the rescaled
/// operator family without decomposing the product graph.
class CylinderSpectral {
public:
    explicit CylinderSpectral(const CylinderGraph& c,
                              int size_cap = SpectralDecomposition::kDefaultSizeCap);

    const CylinderGraph& cylinder() const { return cylinder_; }
    const SpectralDecomposition& base() const { return base_; }
    const SpectralDecomposition& axis() const { return axis_; }

    /// (neg base generator + lambda^2 * neg axis generator)^{-1/2} F.
    ScalarField inv_sqrt_rescaled(const ScalarField& f, double lambda) const;

private:
    CylinderGraph cylinder_;
    SpectralDecomposition base_;
    SpectralDecomposition axis_;
};

/// Base-restricted gradient magnitude of the rescaled inverse square root.
GradientMagnitudeField rescaled_riesz(const CylinderSpectral& cs, double lambda,
                                      const ScalarField& f);
GradientMagnitudeField rescaled_riesz(const CylinderGraph& c, double lambda,
                                      const ScalarField& f);

/// Throws std::invalid_argument unless f integrates to zero within
/// rel_tol * (L1 mass).
void require_mean_zero(const ScalarField& f, double rel_tol = 1e-12);

} // namespace rieszlab
