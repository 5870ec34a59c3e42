#include "rieszlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rieszlab/errors.hpp"
#include "rieszlab/rng.hpp"
#include "rieszlab/textio.hpp"

namespace rieszlab {

WeightedGraphManifold::WeightedGraphManifold(std::vector<double> mu, std::vector<Edge> edges,
                                             int dim_hint, std::vector<std::string> tag_names,
                                             std::string label)
    : mu_(std::move(mu)),
      edges_(std::move(edges)),
      dim_hint_(dim_hint),
      tag_names_(std::move(tag_names)),
      label_(std::move(label)) {
    const int n = vertex_count();
    if (n == 0) throw std::invalid_argument("manifold needs at least one vertex");
    for (double m : mu_) {
        if (!(m > 0.0)) throw std::invalid_argument("vertex volumes must be positive");
    }
    for (const Edge& e : edges_) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
        if (!(e.w > 0.0)) throw std::invalid_argument("edge conductances must be positive");
        if (e.tag < -1 || e.tag >= static_cast<int>(tag_names_.size()))
            throw std::invalid_argument("edge tag out of range");
    }

    mu_eigen_ = Eigen::Map<const Eigen::VectorXd>(mu_.data(), n);
    total_volume_ = mu_eigen_.sum();

    // CSR adjacency (both directions per edge), fixed order for determinism.
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    for (const Edge& e : edges_) {
        ++degree[static_cast<std::size_t>(e.u)];
        ++degree[static_cast<std::size_t>(e.v)];
    }
    adj_offset_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int v = 0; v < n; ++v) adj_offset_[static_cast<std::size_t>(v) + 1] = adj_offset_[static_cast<std::size_t>(v)] + degree[static_cast<std::size_t>(v)];
    adj_vertex_.resize(static_cast<std::size_t>(adj_offset_.back()));
    adj_weight_.resize(adj_vertex_.size());
    adj_edge_.resize(adj_vertex_.size());
    // Row order: entries where the vertex is the edge head first, then the
    // tail side, each in edge order. The classification is preserved by the
    // symmetry maps of the model graphs (axis translation in particular), so
    // generator sums commute with them bit for bit.
    std::vector<int> cursor(adj_offset_.begin(), adj_offset_.end() - 1);
    for (int idx = 0; idx < edge_count(); ++idx) {
        const Edge& e = edges_[static_cast<std::size_t>(idx)];
        const int slot = cursor[static_cast<std::size_t>(e.v)]++;
        adj_vertex_[static_cast<std::size_t>(slot)] = e.u;
        adj_weight_[static_cast<std::size_t>(slot)] = e.w;
        adj_edge_[static_cast<std::size_t>(slot)] = idx;
    }
    for (int idx = 0; idx < edge_count(); ++idx) {
        const Edge& e = edges_[static_cast<std::size_t>(idx)];
        const int slot = cursor[static_cast<std::size_t>(e.u)]++;
        adj_vertex_[static_cast<std::size_t>(slot)] = e.v;
        adj_weight_[static_cast<std::size_t>(slot)] = e.w;
        adj_edge_[static_cast<std::size_t>(slot)] = idx;
    }

    weighted_degree_.assign(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v) {
        double acc = 0.0;
        const auto nb = neighbors(v);
        for (int k = 0; k < nb.count; ++k) acc += nb.weight[k];
        weighted_degree_[static_cast<std::size_t>(v)] = acc;
    }

    // Connectivity (BFS).
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto nb = neighbors(queue[head]);
        for (int k = 0; k < nb.count; ++k) {
            if (!seen[static_cast<std::size_t>(nb.vertex[k])]) {
                seen[static_cast<std::size_t>(nb.vertex[k])] = 1;
                queue.push_back(nb.vertex[k]);
            }
        }
    }
    if (static_cast<int>(queue.size()) != n)
        throw std::invalid_argument("manifold must be connected");
}

int WeightedGraphManifold::tag_index(std::string_view name) const {
    for (std::size_t i = 0; i < tag_names_.size(); ++i) {
        if (tag_names_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

WeightedGraphManifold::NeighborRange WeightedGraphManifold::neighbors(int v) const {
    const int begin = adj_offset_[static_cast<std::size_t>(v)];
    const int end = adj_offset_[static_cast<std::size_t>(v) + 1];
    return {adj_vertex_.data() + begin, adj_weight_.data() + begin, adj_edge_.data() + begin,
            end - begin};
}

void WeightedGraphManifold::apply_laplacian(const double* f, double* out) const {
    const int n = vertex_count();
    for (int v = 0; v < n; ++v) {
        const auto nb = neighbors(v);
        double acc = 0.0;
        for (int k = 0; k < nb.count; ++k) {
            acc += nb.weight[k] * (f[nb.vertex[k]] - f[v]);
        }
        out[v] = acc / mu_[static_cast<std::size_t>(v)];
    }
}

Eigen::VectorXd WeightedGraphManifold::laplacian(const Eigen::VectorXd& f) const {
    Eigen::VectorXd out(vertex_count());
    apply_laplacian(f.data(), out.data());
    return out;
}

ScalarField make_field(ManifoldPtr host, Eigen::VectorXd values) {
    if (!host) throw std::invalid_argument("field requires a host");
    if (values.size() != host->vertex_count())
        throw std::invalid_argument("field size does not match host");
    ScalarField f{std::move(host), std::move(values), false};
    f.mean_zero = is_mean_zero(f);
    return f;
}

double mean_integral(const ScalarField& f) {
    return f.host->mu_vector().dot(f.values);
}

bool is_mean_zero(const ScalarField& f, double rel_tol) {
    const double l1 = f.host->mu_vector().dot(f.values.cwiseAbs());
    return std::fabs(mean_integral(f)) <= rel_tol * l1;
}

// ------------------------------------------------------------ constructors

ManifoldPtr build_cycle(int n, double circumference) {
    if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
    if (!(circumference > 0.0)) throw std::invalid_argument("circumference must be positive");
    const double h = circumference / n;
    std::vector<double> mu(static_cast<std::size_t>(n), h);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        edges.push_back({v, (v + 1) % n, 1.0 / h, -1});
    }
    return std::make_shared<WeightedGraphManifold>(
        std::move(mu), std::move(edges), 1, std::vector<std::string>{},
        "cycle" + std::to_string(n));
}

ManifoldPtr build_torus(int d, int n, double side) {
    if (d < 1) throw std::invalid_argument("torus needs d >= 1");
    ManifoldPtr m = build_cycle(n, side);
    for (int k = 1; k < d; ++k) {
        m = product(m, build_cycle(n, side));
    }
    return std::make_shared<WeightedGraphManifold>(
        std::vector<double>(m->mu_vector().data(), m->mu_vector().data() + m->vertex_count()),
        m->edges(), d, m->tag_names(), "torus" + std::to_string(d) + "x" + std::to_string(n));
}

ManifoldPtr product(const ManifoldPtr& a, const ManifoldPtr& b,
                    std::string_view retag_a, std::string_view retag_b) {
    const int na = a->vertex_count();
    const int nb = b->vertex_count();
    std::vector<double> mu(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb));
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            mu[static_cast<std::size_t>(i) * nb + j] = a->mu(i) * b->mu(j);

    // Unified tag table: factor tags carry over by name unless retagged.
    std::vector<std::string> tags;
    auto intern = [&tags](std::string_view name) {
        for (std::size_t i = 0; i < tags.size(); ++i)
            if (tags[i] == name) return static_cast<int>(i);
        tags.emplace_back(name);
        return static_cast<int>(tags.size() - 1);
    };
    auto map_tag = [&](const ManifoldPtr& src, int tag, std::string_view retag) -> int {
        if (!retag.empty()) return intern(retag);
        if (tag < 0) return -1;
        return intern(src->tag_names()[static_cast<std::size_t>(tag)]);
    };

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(a->edge_count()) * nb +
                  static_cast<std::size_t>(b->edge_count()) * na);
    for (const Edge& e : a->edges()) {
        const int tag = map_tag(a, e.tag, retag_a);
        for (int j = 0; j < nb; ++j) {
            edges.push_back({e.u * nb + j, e.v * nb + j, e.w * b->mu(j), tag});
        }
    }
    for (const Edge& e : b->edges()) {
        const int tag = map_tag(b, e.tag, retag_b);
        for (int i = 0; i < na; ++i) {
            edges.push_back({i * nb + e.u, i * nb + e.v, e.w * a->mu(i), tag});
        }
    }
    return std::make_shared<WeightedGraphManifold>(
        std::move(mu), std::move(edges), a->dim_hint() + b->dim_hint(), std::move(tags),
        a->label() + "*" + b->label());
}

ManifoldPtr build_random_graph(int n, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("random graph needs n >= 3");
    Rng rng(seed, "random-graph");
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (double& m : mu) m = rng.uniform(0.5, 2.0);
    std::vector<Edge> edges;
    for (int v = 0; v < n; ++v) {
        edges.push_back({v, (v + 1) % n, rng.uniform(0.5, 2.0), -1});
    }
    // Chords; duplicates against the ring or each other are skipped.
    auto has_edge = [&edges](int u, int v) {
        return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
            return (e.u == u && e.v == v) || (e.u == v && e.v == u);
        });
    };
    const int chords = n / 2;
    for (int c = 0; c < chords; ++c) {
        const int u = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        const int v = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        const double w = rng.uniform(0.5, 2.0);
        if (u == v || has_edge(u, v)) continue;
        edges.push_back({std::min(u, v), std::max(u, v), w, -1});
    }
    return std::make_shared<WeightedGraphManifold>(std::move(mu), std::move(edges), 1,
                                                   std::vector<std::string>{},
                                                   "random" + std::to_string(n));
}

// -------------------------------------------------------------- interchange

void write_manifold(std::ostream& os, const WeightedGraphManifold& m) {
    os << "rieszlab-graph 1\n";
    os << "dim_hint " << m.dim_hint() << "\n";
    os << "vertices " << m.vertex_count() << "\n";
    os << "edges " << m.edge_count() << "\n";
    for (int v = 0; v < m.vertex_count(); ++v) {
        os << v << " " << fmt17(m.mu(v)) << "\n";
    }
    for (const Edge& e : m.edges()) {
        os << e.u << " " << e.v << " " << fmt17(e.w) << " "
           << (e.tag < 0 ? std::string("-") : m.tag_names()[static_cast<std::size_t>(e.tag)])
           << "\n";
    }
}

namespace {

std::string next_line(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("graph file truncated");
    return line;
}

long header_value(std::istream& is, std::string_view key) {
    const std::string line = next_line(is);
    const auto fields = split_fields(line);
    if (fields.size() != 2 || fields[0] != key)
        throw std::runtime_error("expected '" + std::string(key) + "' header line");
    return parse_long(fields[1]);
}

} // namespace

ManifoldPtr read_manifold(std::istream& is, std::string label) {
    const std::string magic = next_line(is);
    if (split_fields(magic) != std::vector<std::string_view>{"rieszlab-graph", "1"})
        throw std::runtime_error("not a rieszlab graph file");
    const int dim_hint = static_cast<int>(header_value(is, "dim_hint"));
    const int n = static_cast<int>(header_value(is, "vertices"));
    const int m = static_cast<int>(header_value(is, "edges"));

    std::vector<double> mu(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        const std::string line = next_line(is);
        const auto fields = split_fields(line);
        if (fields.size() != 2 || parse_long(fields[0]) != v)
            throw std::runtime_error("bad vertex line");
        mu[static_cast<std::size_t>(v)] = parse_double(fields[1]);
    }
    std::vector<std::string> tags;
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e) {
        const std::string line = next_line(is);
        const auto fields = split_fields(line);
        if (fields.size() != 4) throw std::runtime_error("bad edge line");
        int tag = -1;
        if (fields[3] != "-") {
            for (std::size_t i = 0; i < tags.size(); ++i)
                if (tags[i] == fields[3]) tag = static_cast<int>(i);
            if (tag < 0) {
                tags.emplace_back(fields[3]);
                tag = static_cast<int>(tags.size() - 1);
            }
        }
        edges.push_back({static_cast<int>(parse_long(fields[0])),
                         static_cast<int>(parse_long(fields[1])), parse_double(fields[2]), tag});
    }
    return std::make_shared<WeightedGraphManifold>(std::move(mu), std::move(edges), dim_hint,
                                                   std::move(tags), std::move(label));
}

void write_manifold_file(const std::string& path, const WeightedGraphManifold& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_manifold(os, m);
}

ManifoldPtr read_manifold_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string label = path;
    if (const auto slash = label.find_last_of('/'); slash != std::string::npos)
        label = label.substr(slash + 1);
    return read_manifold(is, label);
}

void write_field(std::ostream& os, const ScalarField& f) {
    for (int v = 0; v < f.values.size(); ++v) {
        os << v << " " << fmt17(f.values[v]) << "\n";
    }
}

Eigen::VectorXd read_field_values(std::istream& is, int expected_size) {
    Eigen::VectorXd values(expected_size);
    for (int v = 0; v < expected_size; ++v) {
        const std::string line = next_line(is);
        const auto fields = split_fields(line);
        if (fields.size() != 2 || parse_long(fields[0]) != v)
            throw std::runtime_error("bad field line");
        values[v] = parse_double(fields[1]);
    }
    return values;
}

void write_field_file(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_field(os, f);
}

} // namespace rieszlab
