#pragma once

#include "rieszlab/graph.hpp"

namespace rieszlab {

enum class AxisBoundary { Periodic, Reflecting };

/// Product of a base manifold with a discretized line: vertex (x, t) has
/// mu = mu_base(x) * h, base edges at each level carry w_base * h and tag
/// "base", axis edges carry mu_base(x) / h and tag "axis". The generator is
/// then the Kronecker sum of the base generator and the 1-d axis generator.
class CylinderGraph {
public:
    CylinderGraph() = default;
    CylinderGraph(ManifoldPtr base, ManifoldPtr axis, ManifoldPtr graph, int axis_steps,
                  double spacing, AxisBoundary boundary)
        : base_(std::move(base)), axis_(std::move(axis)), graph_(std::move(graph)),
          axis_steps_(axis_steps), spacing_(spacing), boundary_(boundary) {}

    const ManifoldPtr& graph() const { return graph_; }
    const ManifoldPtr& base() const { return base_; }
    const ManifoldPtr& axis() const { return axis_; }
    int axis_steps() const { return axis_steps_; }
    double spacing() const { return spacing_; }
    AxisBoundary boundary() const { return boundary_; }

    int vertex_of(int base_vertex, int level) const { return base_vertex * axis_steps_ + level; }
    int base_of(int v) const { return v / axis_steps_; }
    int level_of(int v) const { return v % axis_steps_; }

    /// Steps between two levels along the axis (wrapping when periodic).
    int level_distance(int s, int t) const;

private:
    ManifoldPtr base_;
    ManifoldPtr axis_;
    ManifoldPtr graph_;
    int axis_steps_ = 0;
    double spacing_ = 0.0;
    AxisBoundary boundary_ = AxisBoundary::Periodic;
};

/// axis_steps >= 3 for a periodic axis, >= 2 for a reflecting one.
CylinderGraph build_cylinder(const ManifoldPtr& base, int axis_steps, double spacing,
                             AxisBoundary boundary = AxisBoundary::Periodic);

/// (translate_s F)(x, t) = F(x, t - s). On a periodic axis this is an exact
/// relabeling; on a reflecting axis the shifted support must stay at least
/// one step inside the ends (std::out_of_range otherwise).
ScalarField translate(const CylinderGraph& c, const ScalarField& f, int s);

} // namespace rieszlab
