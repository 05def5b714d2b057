#pragma once

// Random-walk transition models and the per-step random stream.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <wharf/codec.hpp>

namespace wharf {

enum class ModelKind : std::uint8_t { deepwalk, node2vec, ppr };

struct WalkModel {
    ModelKind kind = ModelKind::deepwalk;
    double p = 1.0;       // node2vec return parameter
    double q = 1.0;       // node2vec in-out parameter
    double alpha = 0.15;  // ppr restart probability

    static WalkModel deepwalk() { return {}; }
    static WalkModel node2vec(double p, double q);
    static WalkModel ppr(double alpha);

    int order() const noexcept { return kind == ModelKind::node2vec ? 2 : 1; }
    /// Throws ContractError on p, q <= 0 or alpha outside (0, 1).
    void validate() const;
    std::string name() const;

    friend bool operator==(WalkModel const&, WalkModel const&) = default;
};

/// Parses "deepwalk", "node2vec", "ppr" (parameters set separately).
ModelKind parse_model_kind(std::string const& s);

/// Counter-based stream keyed by (seed, walk, epoch, position): the draws for one step of
/// one walk do not depend on which thread runs it or what was sampled before.
class WalkRng {
public:
    WalkRng(std::uint64_t seed, WalkId walk, std::uint64_t epoch, std::uint32_t position) noexcept;
    explicit WalkRng(std::uint64_t key) noexcept : state_(key) {}

    std::uint64_t next() noexcept;
    /// Uniform in [0, n); n > 0. Exact (rejection on the biased zone).
    std::uint64_t uniform_index(std::uint64_t n) noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept;

private:
    std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct Step {
    enum Kind : std::uint8_t { move, stop, dead_end };
    Kind kind = move;
    VertexId vertex = 0;  // valid when kind == move
};

/// node2vec unnormalized weight of moving to `candidate` given the previous vertex.
template <class Adjacency>
double node2vec_weight(WalkModel const& m, VertexId candidate, VertexId previous, Adjacency const& prev_adj)
{
    if (candidate == previous) {
        return 1.0 / m.p;
    }
    return prev_adj.contains(candidate) ? 1.0 : 1.0 / m.q;
}

/// One transition from `current`. `Graph` provides adjacency(v) returning an object with
/// size(), operator[](k) (k-th smallest neighbor) and contains(v).
template <class Graph>
Step sample_next(WalkModel const& m, Graph const& g, VertexId current, std::optional<VertexId> previous,
                 WalkRng& rng)
{
    auto const adj = g.adjacency(current);
    std::size_t const d = adj.size();
    if (d == 0) {
        return {Step::dead_end, 0};
    }
    if (m.kind == ModelKind::ppr && rng.uniform01() < m.alpha) {
        return {Step::stop, 0};
    }
    if (m.kind != ModelKind::node2vec || !previous) {
        return {Step::move, adj[rng.uniform_index(d)]};
    }
    // Rejection over the three weight classes; the envelope is the largest weight.
    auto const prev_adj = g.adjacency(*previous);
    double const wmax = std::max({1.0 / m.p, 1.0, 1.0 / m.q});
    for (;;) {
        VertexId const x = adj[rng.uniform_index(d)];
        double const w = node2vec_weight(m, x, *previous, prev_adj);
        if (w >= wmax || rng.uniform01() * wmax < w) {
            return {Step::move, x};
        }
    }
}

/// Exact next-vertex distribution given that the walk moves (for ppr: conditional on not
/// restarting). Sorted by vertex; empty for a dead end.
template <class Graph>
std::vector<std::pair<VertexId, double>> transition_probabilities(WalkModel const& m, Graph const& g,
                                                                  VertexId current,
                                                                  std::optional<VertexId> previous)
{
    auto const adj = g.adjacency(current);
    std::size_t const d = adj.size();
    std::vector<std::pair<VertexId, double>> out;
    out.reserve(d);
    if (m.kind != ModelKind::node2vec || !previous) {
        for (std::size_t k = 0; k < d; ++k) {
            out.emplace_back(adj[k], 1.0 / static_cast<double>(d));
        }
        return out;
    }
    auto const prev_adj = g.adjacency(*previous);
    double sum = 0;
    for (std::size_t k = 0; k < d; ++k) {
        double const w = node2vec_weight(m, adj[k], *previous, prev_adj);
        out.emplace_back(adj[k], w);
        sum += w;
    }
    for (auto& kv : out) {
        kv.second /= sum;
    }
    return out;
}

struct EmpiricalDistribution {
    std::map<VertexId, double> frequency;  // moves only, normalized by trials
    double stop = 0;                       // fraction of restarts (ppr)
    double dead_end = 0;
};

template <class Graph>
EmpiricalDistribution empirical_distribution(WalkModel const& m, Graph const& g, VertexId current,
                                             std::optional<VertexId> previous, std::size_t trials,
                                             std::uint64_t seed)
{
    if (trials == 0) {
        throw ContractError("empirical_distribution needs at least one trial");
    }
    EmpiricalDistribution out;
    std::map<VertexId, std::size_t> counts;
    std::size_t stops = 0;
    std::size_t dead = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        WalkRng rng(seed, static_cast<WalkId>(t), t >> 32, 0);
        Step const s = sample_next(m, g, current, previous, rng);
        if (s.kind == Step::move) {
            ++counts[s.vertex];
        } else if (s.kind == Step::stop) {
            ++stops;
        } else {
            ++dead;
        }
    }
    double const n = static_cast<double>(trials);
    for (auto const& [v, c] : counts) {
        out.frequency[v] = static_cast<double>(c) / n;
    }
    out.stop = static_cast<double>(stops) / n;
    out.dead_end = static_cast<double>(dead) / n;
    return out;
}

/// Continues a walk. On entry `path` holds positions 0..from (from = path.size() - 1); on exit
/// it holds `length` vertices. A restart or dead end pads the rest with the last vertex.
/// The step from position p draws from WalkRng(seed, walk, epoch, p).
/// Returns the position at which the walk stopped moving (length - 1 for a full walk).
template <class Graph>
std::uint32_t extend_walk(WalkModel const& m, Graph const& g, std::uint64_t seed, WalkId walk,
                          std::uint64_t epoch, std::uint32_t length, std::vector<VertexId>& path,
                          bool* dead_end = nullptr)
{
    if (path.empty() || path.size() > length) {
        throw ContractError("extend_walk: path must hold 1..length vertices");
    }
    auto p = static_cast<std::uint32_t>(path.size() - 1);
    for (; p + 1 < length; ++p) {
        std::optional<VertexId> prev;
        if (p > 0) {
            prev = path[p - 1];
        }
        WalkRng rng(seed, walk, epoch, p);
        Step const s = sample_next(m, g, path[p], prev, rng);
        if (s.kind != Step::move) {
            if (dead_end) {
                *dead_end = s.kind == Step::dead_end;
            }
            break;
        }
        path.push_back(s.vertex);
    }
    std::uint32_t const stopped = p;
    path.resize(length, path.back());
    return stopped;
}

}  // namespace wharf
