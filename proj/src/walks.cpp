#include "rieszlab/walks.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rieszlab/parallel.hpp"
#include "rieszlab/textio.hpp"

namespace rieszlab {

StoppingRule level_band_rule(const CylinderGraph& c, int site_level, int radius) {
    StoppingRule rule;
    rule.region.assign(static_cast<std::size_t>(c.graph()->vertex_count()), 0);
    for (int v = 0; v < c.graph()->vertex_count(); ++v) {
        if (c.level_distance(c.level_of(v), site_level) <= radius)
            rule.region[static_cast<std::size_t>(v)] = 1;
    }
    rule.description =
        "levels within " + std::to_string(radius) + " of " + std::to_string(site_level);
    return rule;
}

namespace {

int jump_to_neighbor(const WeightedGraphManifold& m, int v, double u01) {
    const auto nb = m.neighbors(v);
    const double target = u01 * m.weighted_degree(v);
    double acc = 0.0;
    for (int k = 0; k < nb.count; ++k) {
        acc += nb.weight[k];
        if (target < acc) return nb.vertex[k];
    }
    return nb.vertex[nb.count - 1];
}

} // namespace

WalkPath sample_walk(const WeightedGraphManifold& m, int start, double horizon, Rng& rng) {
    if (horizon < 0.0) throw std::invalid_argument("walk horizon must be >= 0");
    if (start < 0 || start >= m.vertex_count())
        throw std::invalid_argument("walk start out of range");
    WalkPath path;
    path.start = start;
    path.horizon = horizon;
    int v = start;
    double t = 0.0;
    while (true) {
        const double rate = m.weighted_degree(v) / (2.0 * m.mu(v));
        t += rng.exponential(rate);
        if (t > horizon) break;
        v = jump_to_neighbor(m, v, rng.uniform());
        path.events.emplace_back(t, v);
    }
    return path;
}

namespace {

constexpr int kMcChunk = 1024;

// Chunked two-pass aggregation: chunk partials are combined serially in
// chunk order, so estimates do not depend on the thread count.
template <typename PerSample>
void chunked_mean_var(int samples, const PerSample& value_of, double& mean, double& variance) {
    const int chunks = (samples + kMcChunk - 1) / kMcChunk;
    std::vector<double> sum(static_cast<std::size_t>(chunks), 0.0);
    std::vector<double> sumsq(static_cast<std::size_t>(chunks), 0.0);
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        const int begin = static_cast<int>(c) * kMcChunk;
        const int end = std::min(samples, begin + kMcChunk);
        double s = 0.0;
        double s2 = 0.0;
        for (int i = begin; i < end; ++i) {
            const double x = value_of(i);
            s += x;
            s2 += x * x;
        }
        sum[c] = s;
        sumsq[c] = s2;
    });
    double total = 0.0;
    double total_sq = 0.0;
    for (int c = 0; c < chunks; ++c) {
        total += sum[static_cast<std::size_t>(c)];
        total_sq += sumsq[static_cast<std::size_t>(c)];
    }
    mean = total / samples;
    variance = std::max(0.0, total_sq / samples - mean * mean);
}

int endpoint_of_walk(const WeightedGraphManifold& m, int start, double horizon, Rng& rng) {
    int v = start;
    double t = 0.0;
    while (true) {
        const double rate = m.weighted_degree(v) / (2.0 * m.mu(v));
        t += rng.exponential(rate);
        if (t > horizon) return v;
        v = jump_to_neighbor(m, v, rng.uniform());
    }
}

} // namespace

McField mc_heat(const ManifoldPtr& m, const ScalarField& f, double sigma, int samples,
                std::uint64_t seed) {
    if (f.host != m) throw std::invalid_argument("field host mismatch");
    if (samples < 1) throw std::invalid_argument("mc_heat needs samples >= 1");
    if (sigma < 0.0) throw std::invalid_argument("mc_heat needs sigma >= 0");
    const int n = m->vertex_count();
    McField out;
    out.estimate.resize(n);
    out.stderr_.resize(n);
    const double horizon = 2.0 * sigma;
    for (int v = 0; v < n; ++v) {
        double mean = 0.0;
        double variance = 0.0;
        chunked_mean_var(
            samples,
            [&](int i) {
                Rng rng(seed, "mc-heat", (static_cast<std::uint64_t>(v) << 32) ^
                                             static_cast<std::uint64_t>(i));
                return f.values[endpoint_of_walk(*m, v, horizon, rng)];
            },
            mean, variance);
        out.estimate[v] = mean;
        out.stderr_[v] = std::sqrt(variance / samples);
    }
    return out;
}

ProbabilityEstimate exit_probability(const WeightedGraphManifold& m, int start,
                                     const StoppingRule& rule, double horizon, int samples,
                                     std::uint64_t seed) {
    if (rule.region.size() != static_cast<std::size_t>(m.vertex_count()))
        throw std::invalid_argument("stopping rule size mismatch");
    if (rule.contains(start)) throw std::invalid_argument("walk start lies inside the region");
    if (samples < 1) throw std::invalid_argument("exit_probability needs samples >= 1");

    double mean = 0.0;
    double variance = 0.0;
    chunked_mean_var(
        samples,
        [&](int i) -> double {
            Rng rng(seed, "exit-prob", static_cast<std::uint64_t>(i));
            int v = start;
            double t = 0.0;
            while (true) {
                const double rate = m.weighted_degree(v) / (2.0 * m.mu(v));
                t += rng.exponential(rate);
                if (t > horizon) return 0.0;
                v = jump_to_neighbor(m, v, rng.uniform());
                if (rule.contains(v)) return 1.0;
            }
        },
        mean, variance);

    ProbabilityEstimate est;
    est.p_hat = mean;
    est.stderr_ = std::sqrt(mean * (1.0 - mean) / samples);
    est.samples = samples;
    return est;
}

std::vector<int> coupling_break_set(const GluedManifold& g, int piece_index) {
    return g.glue_records().at(static_cast<std::size_t>(piece_index)).piece_boundary;
}

void write_walk_csv(std::ostream& os, const WalkPath& path) {
    os << "time,vertex\n";
    os << "0," << path.start << "\n";
    for (const auto& [t, v] : path.events) os << fmt12(t) << "," << v << "\n";
}

WalkPath coupled_walk(const GluedManifold& g, int piece_index, int start_in_piece, double horizon,
                      Rng& rng) {
    const auto& rec = g.embeddings().at(static_cast<std::size_t>(piece_index));
    const auto& piece = *g.pieces()[static_cast<std::size_t>(piece_index)].graph();
    const auto& ambient = *g.ambient();
    if (start_in_piece < 0 || start_in_piece >= piece.vertex_count() ||
        !rec.in_domain(start_in_piece))
        throw std::invalid_argument("coupled walk must start inside the embedding domain");

    std::vector<char> breaks(static_cast<std::size_t>(piece.vertex_count()), 0);
    for (int v : coupling_break_set(g, piece_index)) breaks[static_cast<std::size_t>(v)] = 1;

    WalkPath path;
    path.start = rec.to_ambient[static_cast<std::size_t>(start_in_piece)];
    path.horizon = horizon;

    int v = start_in_piece;
    double t = 0.0;
    // Piece dynamics through the embedding until the star first differs.
    while (breaks[static_cast<std::size_t>(v)] == 0) {
        const double rate = piece.weighted_degree(v) / (2.0 * piece.mu(v));
        t += rng.exponential(rate);
        if (t > horizon) return path;
        v = jump_to_neighbor(piece, v, rng.uniform());
        path.events.emplace_back(t, rec.to_ambient[static_cast<std::size_t>(v)]);
    }
    // Ambient dynamics from the hit point.
    int a = rec.to_ambient[static_cast<std::size_t>(v)];
    while (true) {
        const double rate = ambient.weighted_degree(a) / (2.0 * ambient.mu(a));
        t += rng.exponential(rate);
        if (t > horizon) return path;
        a = jump_to_neighbor(ambient, a, rng.uniform());
        path.events.emplace_back(t, a);
    }
}

} // namespace rieszlab
