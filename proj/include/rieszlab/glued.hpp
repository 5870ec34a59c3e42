#pragma once

#include <iosfwd>

#include "rieszlab/cylinder.hpp"

namespace rieszlab {

/// Injective map from the surviving vertices of one glued piece into the
/// ambient manifold. Volume-preserving everywhere; conductance-preserving
/// (an isometry onto its image) away from the surgery, flagged per vertex
/// via the axis-level cut.
struct EmbeddingRecord {
    int piece_site = -1;   // removed piece vertex
    int site_level = 0;    // its axis level
    int axis_steps = 0;
    bool periodic = true;
    int iso_offset = 2;    // isometric once this many levels from the site
    std::vector<int> to_ambient; // piece vertex -> ambient vertex, -1 at the site

    bool in_domain(int piece_vertex) const {
        return to_ambient[static_cast<std::size_t>(piece_vertex)] >= 0;
    }
    int level_of(int piece_vertex) const { return piece_vertex % axis_steps; }
    int level_distance_to_site(int piece_vertex) const;
    /// True where the embedding preserves the local geometry exactly.
    bool isometric(int piece_vertex) const {
        return in_domain(piece_vertex) && level_distance_to_site(piece_vertex) >= iso_offset;
    }
};

struct GlueRecord {
    int piece_index;
    int piece_site;                    // piece vertex removed
    int backbone_site;                 // backbone vertex removed
    std::vector<int> piece_boundary;   // piece ids of the site's neighbors
    std::vector<int> backbone_boundary;
    double junction_conductance;       // total conductance of the bridges
};

struct GlueSite {
    int piece_vertex;
    int backbone_vertex;
};

enum class BridgePolicy {
    /// All boundary pairs bridged, total junction conductance = average of
    /// the two removed stars.
    CompleteBipartite,
};

/// Backbone-plus-cylinders composite built by glue().
class GluedManifold {
public:
    const ManifoldPtr& ambient() const { return ambient_; }
    const CylinderGraph& backbone() const { return backbone_; }
    const std::vector<CylinderGraph>& pieces() const { return pieces_; }
    const std::vector<EmbeddingRecord>& embeddings() const { return embeddings_; }
    const std::vector<GlueRecord>& glue_records() const { return glue_records_; }
    int backbone_to_ambient(int v) const {
        return backbone_map_[static_cast<std::size_t>(v)];
    }

private:
    friend GluedManifold glue(std::vector<CylinderGraph>, CylinderGraph,
                              const std::vector<GlueSite>&, BridgePolicy, int);
    ManifoldPtr ambient_;
    CylinderGraph backbone_;
    std::vector<CylinderGraph> pieces_;
    std::vector<EmbeddingRecord> embeddings_;
    std::vector<GlueRecord> glue_records_;
    std::vector<int> backbone_map_;
};

/// Removes each site pair and bridges the two neighbor sets. Backbone sites
/// must have pairwise disjoint closed neighborhoods; piece sites must sit in
/// the middle band of their axis. Throws SurgeryFailure if a removal
/// disconnects anything.
GluedManifold glue(std::vector<CylinderGraph> pieces, CylinderGraph backbone,
                   const std::vector<GlueSite>& sites,
                   BridgePolicy policy = BridgePolicy::CompleteBipartite, int iso_offset = 2);

/// Default site choices: every piece glued at (base vertex 0, middle level),
/// backbone sites spread around its base at the middle level.
std::vector<GlueSite> default_glue_sites(const std::vector<CylinderGraph>& pieces,
                                         const CylinderGraph& backbone);

/// Extension by zero through the embedding. F must vanish at the removed
/// site (support inside the domain).
ScalarField pushforward(const GluedManifold& g, int piece_index, const ScalarField& f);

/// Composition with the embedding; zero at the removed site.
ScalarField pullback(const GluedManifold& g, int piece_index, const ScalarField& ambient_field);

// ---------------------------------------------------- glued interchange

struct LoadedGlued {
    ManifoldPtr ambient;
    std::vector<EmbeddingRecord> embeddings;
};

void write_glued(std::ostream& os, const WeightedGraphManifold& ambient,
                 const std::vector<EmbeddingRecord>& embeddings);
void write_glued(std::ostream& os, const GluedManifold& g);

/// Reads either a plain graph file (embeddings empty) or a glued one.
LoadedGlued read_glued(std::istream& is, std::string label = "file");

} // namespace rieszlab
