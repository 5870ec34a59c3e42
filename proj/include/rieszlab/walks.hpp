#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rieszlab/glued.hpp"
#include "rieszlab/graph.hpp"
#include "rieszlab/rng.hpp"

namespace rieszlab {

/// One trajectory of the continuous-time chain with generator half the
/// graph generator: holding rate at v is weighted_degree(v) / (2 mu(v)),
/// jumps proportional to conductance. Walk duration 2 sigma matches
/// semigroup time sigma.
struct WalkPath {
    int start = -1;
    double horizon = 0.0;
    std::vector<std::pair<double, int>> events; // (jump time, arrived vertex)

    int position_at_end() const { return events.empty() ? start : events.back().second; }
};

/// Vertex region whose first hitting time stops a walk.
struct StoppingRule {
    std::vector<char> region; // indicator per vertex
    std::string description;

    bool contains(int v) const { return region[static_cast<std::size_t>(v)] != 0; }
};

/// Band of cylinder levels within the given distance of a site level; the
/// discrete analogue of the low half-space below the glue region.
StoppingRule level_band_rule(const CylinderGraph& c, int site_level, int radius);

WalkPath sample_walk(const WeightedGraphManifold& m, int start, double horizon, Rng& rng);

struct McField {
    Eigen::VectorXd estimate;
    Eigen::VectorXd stderr_; // per-vertex standard error of the mean
};

/// Per-vertex Monte Carlo estimate of the heat semigroup at time sigma.
/// Sampling is counter-keyed per (vertex, sample); chunked fixed-order
/// aggregation keeps results identical for every thread count.
McField mc_heat(const ManifoldPtr& m, const ScalarField& f, double sigma, int samples,
                std::uint64_t seed);

struct ProbabilityEstimate {
    double p_hat = 0.0;
    double stderr_ = 0.0;
    int samples = 0;
};

/// Fraction of walks from start that enter the region before the horizon.
ProbabilityEstimate exit_probability(const WeightedGraphManifold& m, int start,
                                     const StoppingRule& rule, double horizon, int samples,
                                     std::uint64_t seed);

/// Piece walk carried through the embedding until it first reaches a vertex
/// whose star the surgery changed, then continued as an ambient walk from
/// the hit point. Marginally an ambient walk started at the embedded start.
WalkPath coupled_walk(const GluedManifold& g, int piece_index, int start_in_piece, double horizon,
                      Rng& rng);

/// Piece-side vertices where the piece and ambient generators differ (the
/// removed site's neighbors).
std::vector<int> coupling_break_set(const GluedManifold& g, int piece_index);

/// Debug dump: "time,vertex" rows, starting position at time 0.
void write_walk_csv(std::ostream& os, const WalkPath& path);

} // namespace rieszlab
