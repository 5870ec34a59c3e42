#include "rieszlab/cylinder.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rieszlab {

namespace {

ManifoldPtr build_path_axis(int steps, double spacing) {
    std::vector<double> mu(static_cast<std::size_t>(steps), spacing);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(steps) - 1);
    for (int t = 0; t + 1 < steps; ++t) {
        edges.push_back({t, t + 1, 1.0 / spacing, -1});
    }
    return std::make_shared<WeightedGraphManifold>(std::move(mu), std::move(edges), 1,
                                                   std::vector<std::string>{},
                                                   "path" + std::to_string(steps));
}

} // namespace

int CylinderGraph::level_distance(int s, int t) const {
    int d = std::abs(s - t);
    if (boundary_ == AxisBoundary::Periodic) d = std::min(d, axis_steps_ - d);
    return d;
}

CylinderGraph build_cylinder(const ManifoldPtr& base, int axis_steps, double spacing,
                             AxisBoundary boundary) {
    if (!base) throw std::invalid_argument("cylinder needs a base");
    if (!(spacing > 0.0)) throw std::invalid_argument("axis spacing must be positive");
    if (boundary == AxisBoundary::Periodic && axis_steps < 3)
        throw std::invalid_argument("periodic axis needs >= 3 steps");
    if (boundary == AxisBoundary::Reflecting && axis_steps < 2)
        throw std::invalid_argument("reflecting axis needs >= 2 steps");

    ManifoldPtr axis = boundary == AxisBoundary::Periodic
                           ? build_cycle(axis_steps, axis_steps * spacing)
                           : build_path_axis(axis_steps, spacing);
    ManifoldPtr graph = product(base, axis, "base", "axis");
    return CylinderGraph(base, std::move(axis), std::move(graph), axis_steps, spacing, boundary);
}

ScalarField translate(const CylinderGraph& c, const ScalarField& f, int s) {
    if (f.host != c.graph()) throw std::invalid_argument("field host is not this cylinder");
    const int m = c.axis_steps();
    const int nb = c.base()->vertex_count();
    Eigen::VectorXd out(f.values.size());

    if (c.boundary() == AxisBoundary::Periodic) {
        const int shift = ((s % m) + m) % m;
        for (int x = 0; x < nb; ++x) {
            for (int t = 0; t < m; ++t) {
                out[c.vertex_of(x, t)] = f.values[c.vertex_of(x, (t - shift + m) % m)];
            }
        }
    } else {
        for (int x = 0; x < nb; ++x) {
            for (int t = 0; t < m; ++t) {
                if (f.values[c.vertex_of(x, t)] == 0.0) continue;
                const int target = t + s;
                if (target < 1 || target > m - 2)
                    throw std::out_of_range("translated support leaves the reflecting axis");
            }
        }
        out.setZero();
        for (int x = 0; x < nb; ++x) {
            for (int t = 0; t < m; ++t) {
                const int source = t - s;
                if (source >= 0 && source < m) out[c.vertex_of(x, t)] = f.values[c.vertex_of(x, source)];
            }
        }
    }
    return {f.host, std::move(out), f.mean_zero};
}

} // namespace rieszlab
