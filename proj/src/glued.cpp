#include "rieszlab/glued.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rieszlab/errors.hpp"
#include "rieszlab/textio.hpp"

namespace rieszlab {

int EmbeddingRecord::level_distance_to_site(int piece_vertex) const {
    int d = std::abs(level_of(piece_vertex) - site_level);
    if (periodic) d = std::min(d, axis_steps - d);
    return d;
}

namespace {

std::vector<int> neighbor_list(const WeightedGraphManifold& m, int v) {
    std::vector<int> out;
    const auto nb = m.neighbors(v);
    for (int k = 0; k < nb.count; ++k) out.push_back(nb.vertex[k]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

} // namespace

GluedManifold glue(std::vector<CylinderGraph> pieces, CylinderGraph backbone,
                   const std::vector<GlueSite>& sites, BridgePolicy policy, int iso_offset) {
    if (policy != BridgePolicy::CompleteBipartite)
        throw std::invalid_argument("unknown bridge policy");
    if (pieces.empty()) throw std::invalid_argument("glue needs at least one piece");
    if (sites.size() != pieces.size())
        throw std::invalid_argument("one glue site per piece required");

    const auto& bb = *backbone.graph();

    // Backbone sites: distinct, with pairwise disjoint closed neighborhoods.
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const int si = sites[i].backbone_vertex;
        if (si < 0 || si >= bb.vertex_count())
            throw std::invalid_argument("backbone site out of range");
        for (std::size_t j = i + 1; j < sites.size(); ++j) {
            const int sj = sites[j].backbone_vertex;
            auto ni = neighbor_list(bb, si);
            ni.push_back(si);
            auto nj = neighbor_list(bb, sj);
            nj.push_back(sj);
            std::sort(ni.begin(), ni.end());
            std::sort(nj.begin(), nj.end());
            std::vector<int> common;
            std::set_intersection(ni.begin(), ni.end(), nj.begin(), nj.end(),
                                  std::back_inserter(common));
            if (!common.empty())
                throw std::invalid_argument("backbone sites must have disjoint neighborhoods");
        }
    }

    // Piece sites: inside the middle band of the axis.
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& piece = pieces[k];
        const int site = sites[k].piece_vertex;
        if (site < 0 || site >= piece.graph()->vertex_count())
            throw std::invalid_argument("piece site out of range");
        const int mid = piece.axis_steps() / 2;
        if (piece.level_distance(piece.level_of(site), mid) > piece.axis_steps() / 4)
            throw std::invalid_argument("piece site must sit in the middle band of the axis");
    }

    // Ambient vertex numbering: surviving backbone vertices first, then each
    // piece's surviving vertices in order.
    const int nb_total = bb.vertex_count();
    std::vector<int> backbone_map(static_cast<std::size_t>(nb_total));
    std::vector<char> backbone_removed(static_cast<std::size_t>(nb_total), 0);
    for (const auto& s : sites) backbone_removed[static_cast<std::size_t>(s.backbone_vertex)] = 1;
    int next_id = 0;
    std::vector<double> mu;
    for (int v = 0; v < nb_total; ++v) {
        backbone_map[static_cast<std::size_t>(v)] = backbone_removed[static_cast<std::size_t>(v)] ? -1 : next_id++;
        if (!backbone_removed[static_cast<std::size_t>(v)]) mu.push_back(bb.mu(v));
    }

    std::vector<EmbeddingRecord> embeddings(pieces.size());
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& pg = *pieces[k].graph();
        auto& rec = embeddings[k];
        rec.piece_site = sites[k].piece_vertex;
        rec.site_level = pieces[k].level_of(rec.piece_site);
        rec.axis_steps = pieces[k].axis_steps();
        rec.periodic = pieces[k].boundary() == AxisBoundary::Periodic;
        rec.iso_offset = iso_offset;
        rec.to_ambient.assign(static_cast<std::size_t>(pg.vertex_count()), -1);
        for (int v = 0; v < pg.vertex_count(); ++v) {
            if (v == rec.piece_site) continue;
            rec.to_ambient[static_cast<std::size_t>(v)] = next_id++;
            mu.push_back(pg.mu(v));
        }
    }
    const int n_ambient = next_id;

    // Unified tag table.
    std::vector<std::string> tags;
    auto intern = [&tags](std::string_view name) {
        for (std::size_t i = 0; i < tags.size(); ++i)
            if (tags[i] == name) return static_cast<int>(i);
        tags.emplace_back(name);
        return static_cast<int>(tags.size() - 1);
    };

    std::vector<Edge> edges;
    auto copy_edges = [&](const WeightedGraphManifold& src, const std::vector<int>& map) {
        for (const Edge& e : src.edges()) {
            const int u = map[static_cast<std::size_t>(e.u)];
            const int v = map[static_cast<std::size_t>(e.v)];
            if (u < 0 || v < 0) continue;
            const int tag = e.tag < 0 ? -1 : intern(src.tag_names()[static_cast<std::size_t>(e.tag)]);
            edges.push_back({u, v, e.w, tag});
        }
    };
    copy_edges(bb, backbone_map);
    for (std::size_t k = 0; k < pieces.size(); ++k) copy_edges(*pieces[k].graph(), embeddings[k].to_ambient);

    // Bridges: total junction conductance matches the removed stars.
    const int bridge_tag = intern("bridge");
    std::vector<GlueRecord> records;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& pg = *pieces[k].graph();
        GlueRecord rec;
        rec.piece_index = static_cast<int>(k);
        rec.piece_site = sites[k].piece_vertex;
        rec.backbone_site = sites[k].backbone_vertex;
        rec.piece_boundary = neighbor_list(pg, rec.piece_site);
        rec.backbone_boundary = neighbor_list(bb, rec.backbone_site);
        const double star_piece = pg.weighted_degree(rec.piece_site);
        const double star_backbone = bb.weighted_degree(rec.backbone_site);
        rec.junction_conductance = 0.5 * (star_piece + star_backbone);
        const double per_edge =
            rec.junction_conductance /
            (static_cast<double>(rec.piece_boundary.size()) * static_cast<double>(rec.backbone_boundary.size()));
        for (int pv : rec.piece_boundary) {
            for (int bv : rec.backbone_boundary) {
                edges.push_back({embeddings[k].to_ambient[static_cast<std::size_t>(pv)],
                                 backbone_map[static_cast<std::size_t>(bv)], per_edge, bridge_tag});
            }
        }
        records.push_back(std::move(rec));
    }

    // Surgery must leave everything connected.
    UnionFind uf(n_ambient);
    for (const Edge& e : edges) uf.unite(e.u, e.v);
    for (int v = 1; v < n_ambient; ++v) {
        if (uf.find(v) != uf.find(0))
            throw SurgeryFailure("gluing left the ambient manifold disconnected");
    }

    std::string label = "glued[";
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (k) label += ",";
        label += pieces[k].graph()->label();
    }
    label += "]";

    GluedManifold out;
    out.ambient_ = std::make_shared<WeightedGraphManifold>(std::move(mu), std::move(edges),
                                                           bb.dim_hint(), std::move(tags),
                                                           std::move(label));
    out.backbone_ = std::move(backbone);
    out.pieces_ = std::move(pieces);
    out.embeddings_ = std::move(embeddings);
    out.glue_records_ = std::move(records);
    out.backbone_map_ = std::move(backbone_map);
    return out;
}

std::vector<GlueSite> default_glue_sites(const std::vector<CylinderGraph>& pieces,
                                         const CylinderGraph& backbone) {
    const int nb = backbone.base()->vertex_count();
    const int level = backbone.axis_steps() / 2;
    std::vector<GlueSite> sites;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const int base_vertex =
            static_cast<int>((k * static_cast<std::size_t>(nb)) / pieces.size());
        sites.push_back({pieces[k].vertex_of(0, pieces[k].axis_steps() / 2),
                         backbone.vertex_of(base_vertex, level)});
    }
    return sites;
}

ScalarField pushforward(const GluedManifold& g, int piece_index, const ScalarField& f) {
    const auto& rec = g.embeddings().at(static_cast<std::size_t>(piece_index));
    const auto& piece = g.pieces()[static_cast<std::size_t>(piece_index)];
    if (f.host != piece.graph()) throw std::invalid_argument("field host is not this piece");
    if (f.values[rec.piece_site] != 0.0)
        throw std::invalid_argument("pushforward input supported outside the embedding domain");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.ambient()->vertex_count());
    for (int v = 0; v < f.values.size(); ++v) {
        if (rec.in_domain(v)) out[rec.to_ambient[static_cast<std::size_t>(v)]] = f.values[v];
    }
    return {g.ambient(), std::move(out), f.mean_zero};
}

ScalarField pullback(const GluedManifold& g, int piece_index, const ScalarField& ambient_field) {
    const auto& rec = g.embeddings().at(static_cast<std::size_t>(piece_index));
    const auto& piece = g.pieces()[static_cast<std::size_t>(piece_index)];
    if (ambient_field.host != g.ambient())
        throw std::invalid_argument("field host is not the ambient manifold");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(piece.graph()->vertex_count());
    for (int v = 0; v < out.size(); ++v) {
        if (rec.in_domain(v)) out[v] = ambient_field.values[rec.to_ambient[static_cast<std::size_t>(v)]];
    }
    return make_field(piece.graph(), std::move(out));
}

// ---------------------------------------------------- glued interchange

void write_glued(std::ostream& os, const WeightedGraphManifold& ambient,
                 const std::vector<EmbeddingRecord>& embeddings) {
    write_manifold(os, ambient);
    os << "embeddings " << embeddings.size() << "\n";
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
        const auto& rec = embeddings[k];
        int domain = 0;
        for (int a : rec.to_ambient)
            if (a >= 0) ++domain;
        os << "embedding " << k << " piece_vertices " << rec.to_ambient.size() << " domain "
           << domain << " site " << rec.piece_site << " site_level " << rec.site_level
           << " axis_steps " << rec.axis_steps << " periodic " << (rec.periodic ? 1 : 0)
           << " iso_offset " << rec.iso_offset << "\n";
        for (std::size_t v = 0; v < rec.to_ambient.size(); ++v) {
            if (rec.to_ambient[v] >= 0) os << v << " " << rec.to_ambient[v] << "\n";
        }
    }
}

void write_glued(std::ostream& os, const GluedManifold& g) {
    write_glued(os, *g.ambient(), g.embeddings());
}

LoadedGlued read_glued(std::istream& is, std::string label) {
    LoadedGlued out;
    out.ambient = read_manifold(is, std::move(label));
    std::string line;
    if (!std::getline(is, line)) return out;
    auto fields = split_fields(line);
    if (fields.size() != 2 || fields[0] != "embeddings")
        throw std::runtime_error("expected 'embeddings' section");
    const long count = parse_long(fields[1]);
    for (long k = 0; k < count; ++k) {
        if (!std::getline(is, line)) throw std::runtime_error("truncated embeddings section");
        fields = split_fields(line);
        if (fields.size() != 16 || fields[0] != "embedding" || parse_long(fields[1]) != k)
            throw std::runtime_error("bad embedding header");
        EmbeddingRecord rec;
        const long piece_vertices = parse_long(fields[3]);
        const long domain = parse_long(fields[5]);
        rec.piece_site = static_cast<int>(parse_long(fields[7]));
        rec.site_level = static_cast<int>(parse_long(fields[9]));
        rec.axis_steps = static_cast<int>(parse_long(fields[11]));
        rec.periodic = parse_long(fields[13]) != 0;
        rec.iso_offset = static_cast<int>(parse_long(fields[15]));
        rec.to_ambient.assign(static_cast<std::size_t>(piece_vertices), -1);
        for (long i = 0; i < domain; ++i) {
            if (!std::getline(is, line)) throw std::runtime_error("truncated embedding map");
            const auto pair = split_fields(line);
            if (pair.size() != 2) throw std::runtime_error("bad embedding map line");
            rec.to_ambient[static_cast<std::size_t>(parse_long(pair[0]))] =
                static_cast<int>(parse_long(pair[1]));
        }
        out.embeddings.push_back(std::move(rec));
    }
    return out;
}

} // namespace rieszlab
