#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace rieszlab {

struct Edge {
    int u;
    int v;
    double w;
    int tag; // index into tag_names(), -1 when untagged
};

class WeightedGraphManifold;
using ManifoldPtr = std::shared_ptr<const WeightedGraphManifold>;

/// Finite weighted graph standing in for a Riemannian manifold: vertex
/// volumes mu and edge conductances w. The generator is
///   (Lf)(v) = mu(v)^{-1} sum_{u~v} w(uv) (f(u) - f(v)),
/// self-adjoint for <f,g>_mu = sum_v mu(v) f(v) g(v) and annihilating
/// constants. Immutable after construction; share freely across threads.
class WeightedGraphManifold {
public:
    WeightedGraphManifold(std::vector<double> mu, std::vector<Edge> edges, int dim_hint,
                          std::vector<std::string> tag_names, std::string label);

    int vertex_count() const { return static_cast<int>(mu_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    double mu(int v) const { return mu_[static_cast<std::size_t>(v)]; }
    const Eigen::VectorXd& mu_vector() const { return mu_eigen_; }
    const std::vector<Edge>& edges() const { return edges_; }
    int dim_hint() const { return dim_hint_; }
    double total_volume() const { return total_volume_; }
    const std::string& label() const { return label_; }

    const std::vector<std::string>& tag_names() const { return tag_names_; }
    /// -1 when the tag is not present.
    int tag_index(std::string_view name) const;

    /// sum_{u~v} w(uv)
    double weighted_degree(int v) const { return weighted_degree_[static_cast<std::size_t>(v)]; }

    /// Neighbors of v as parallel spans into CSR storage.
    struct NeighborRange {
        const int* vertex;
        const double* weight;
        const int* edge; // index into edges()
        int count;
    };
    NeighborRange neighbors(int v) const;

    /// out = generator applied to f (the graph Laplace-Beltrami analogue).
    void apply_laplacian(const double* f, double* out) const;
    Eigen::VectorXd laplacian(const Eigen::VectorXd& f) const;

private:
    std::vector<double> mu_;
    Eigen::VectorXd mu_eigen_;
    std::vector<Edge> edges_;
    int dim_hint_;
    std::vector<std::string> tag_names_;
    std::string label_;
    double total_volume_ = 0.0;
    std::vector<double> weighted_degree_;
    // CSR adjacency
    std::vector<int> adj_offset_;
    std::vector<int> adj_vertex_;
    std::vector<double> adj_weight_;
    std::vector<int> adj_edge_;
};

/// Vertex-indexed function on a host manifold. mean_zero asserts
/// |sum mu f| <= 1e-12 * sum mu |f|.
struct ScalarField {
    ManifoldPtr host;
    Eigen::VectorXd values;
    bool mean_zero = false;
};

ScalarField make_field(ManifoldPtr host, Eigen::VectorXd values);

/// sum_v mu(v) f(v)
double mean_integral(const ScalarField& f);
bool is_mean_zero(const ScalarField& f, double rel_tol = 1e-12);

// ------------------------------------------------------------ constructors

/// Discrete circle: n vertices, spacing h = circumference / n, mu = h,
/// conductance 1/h. Throws std::invalid_argument for n < 3.
ManifoldPtr build_cycle(int n, double circumference);

/// d-fold product of build_cycle(n, side).
ManifoldPtr build_torus(int d, int n, double side);

/// Product graph with mu(a,b) = mu_A(a) mu_B(b) and conductances scaled by
/// the opposite factor's volume, so the generator is the Kronecker sum.
/// Vertex (a,b) gets index a * |B| + b. When retag_a/retag_b are nonempty
/// every edge inherited from that factor is relabeled; otherwise factor
/// tags carry over unchanged.
ManifoldPtr product(const ManifoldPtr& a, const ManifoldPtr& b,
                    std::string_view retag_a = {}, std::string_view retag_b = {});

/// Connected random-weight host (ring plus random chords, random mu):
/// exercises code paths away from the symmetric model graphs.
ManifoldPtr build_random_graph(int n, std::uint64_t seed);

// -------------------------------------------------------------- interchange

/// Plain-text graph interchange; see README for the layout. Values
/// round-trip exactly (17 significant digits).
void write_manifold(std::ostream& os, const WeightedGraphManifold& m);
ManifoldPtr read_manifold(std::istream& is, std::string label = "file");
void write_manifold_file(const std::string& path, const WeightedGraphManifold& m);
ManifoldPtr read_manifold_file(const std::string& path);

/// Field files: one "vertex_id value" line per vertex.
void write_field(std::ostream& os, const ScalarField& f);
Eigen::VectorXd read_field_values(std::istream& is, int expected_size);
void write_field_file(const std::string& path, const ScalarField& f);

} // namespace rieszlab
