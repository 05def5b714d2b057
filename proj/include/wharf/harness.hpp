#pragma once

// Workload generation, statistics and verification used by the CLI and the acceptance runs.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <wharf/baseline.hpp>
#include <wharf/updater.hpp>

namespace wharf {

using Edge = std::pair<VertexId, VertexId>;

struct RmatParams {
    double a = 0.25;
    double b = 0.25;
    double c = 0.25;
    double d = 0.25;
    std::uint32_t scale = 10;  // log2 of the vertex-id space
    std::uint64_t edges = 0;
    std::uint64_t seed = 1;

    void validate() const;

    /// Uniform quadrants: Erdos-Renyi-like graphs.
    static RmatParams er(std::uint32_t scale, std::uint64_t edges, std::uint64_t seed);
    /// b = c = 0.25 and d = s * a: the bottom-right quadrant gets about s times the top-left's edges.
    static RmatParams skewed(double s, std::uint32_t scale, std::uint64_t edges, std::uint64_t seed);
    /// a = 0.5, b = c = 0.1, d = 0.3, the distribution update batches are drawn from.
    static RmatParams updates(std::uint32_t scale, std::uint64_t seed);
};

/// One directed R-MAT draw by quadrant descent; may be a self-loop.
Edge rmat_sample(RmatParams const& p, std::mt19937_64& rng);

/// `p.edges` distinct undirected edges (smaller id first), no self-loops; rejected draws are redrawn.
std::vector<Edge> rmat_generate(RmatParams const& p);

/// m distinct undirected edges chosen uniformly over ids < n.
std::vector<Edge> uniform_graph(VertexId n, std::uint64_t m, std::uint64_t seed);

/// Produces valid batches against a mirrored edge set: inserts come from `sample` (rejecting
/// self-loops and present edges), deletes pick a uniformly random present edge.
class EdgeStream {
public:
    using Sampler = std::function<Edge(std::mt19937_64&)>;

    EdgeStream(std::span<const Edge> initial, Sampler sample, double delete_fraction, std::uint64_t seed);

    EdgeBatch next(std::size_t ops);
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::vector<Edge> edges() const { return edges_; }

private:
    static std::uint64_t key(Edge e) noexcept { return (std::uint64_t{e.first} << 32) | e.second; }
    void insert(Edge e);
    void erase_at(std::size_t i);

    Sampler sample_;
    double delete_fraction_;
    std::mt19937_64 rng_;
    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, std::size_t> where_;
};

// --- statistics -------------------------------------------------------------

double total_variation(std::span<const double> p, std::span<const double> q);

struct ChiSquare {
    double statistic = 0;
    std::size_t dof = 0;
    double p_value = 1;
};

/// Two-sample homogeneity test on paired category counts; categories empty in both are dropped.
ChiSquare chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Mean of |f - t| / ((|f| + |t|) / 2) over the pairs not both zero.
double smape(std::span<const double> estimate, std::span<const double> truth);

using AdjacencyMap = std::map<VertexId, std::vector<VertexId>>;

AdjacencyMap adjacency_map(GraphSnapshot const& g);
AdjacencyMap adjacency_map(std::span<const Edge> edges);

/// PageRank with uniform teleport probability `restart` by power iteration.
std::map<VertexId, double> pagerank(AdjacencyMap const& adj, double restart, double tolerance = 1e-13);

/// Fraction of all walk visits landing on each vertex; consecutive repeats (padding) are not visits.
std::map<VertexId, double> visit_frequencies(std::span<const std::vector<VertexId>> walks);

// --- verification -----------------------------------------------------------

struct VerifyConfig {
    VertexId vertices = 50;
    std::uint64_t edges = 150;
    std::size_t batches = 10;
    std::size_t batch_ops = 25;
    double delete_fraction = 0.5;
    std::uint32_t walks_per_vertex = 10;
    std::uint32_t length = 20;
    std::vector<WalkModel> models{WalkModel::deepwalk(), WalkModel::node2vec(0.5, 2.0)};
    std::size_t seeds = 200;
    std::uint64_t seed = 1;  // graph and batch stream
    double tvd_max = 0.05;
    double alpha = 0.01;
    double cell_pass_rate = 0.95;
    std::uint64_t min_cell_count = 5;  // per successor, in each sample, for a cell to be tested
    unsigned threads = 1;
};

struct ModelVerdict {
    std::string model;
    std::size_t cells = 0;  // homogeneity cells tested
    double max_tvd_updated = 0;
    double max_tvd_scratch = 0;
    std::size_t cells_passing = 0;  // chi-square p >= alpha
    double pass_rate = 0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<ModelVerdict> models;
    bool pass = false;
};

/// Pools successor counts per vertex over `cfg.seeds` corpus seeds, for corpora updated through
/// the batch stream and corpora generated from scratch on the final graph, and compares both
/// with the model's transition law and with each other.
VerifyReport verify_indistinguishability(VerifyConfig const& cfg, std::span<const Edge> initial,
                                         std::span<const EdgeBatch> batches);
/// Same, on a uniform random graph and uniform batch stream drawn from `cfg`.
VerifyReport verify_indistinguishability(VerifyConfig const& cfg);

std::string to_json(ModelVerdict const& v);

// --- memory -----------------------------------------------------------------

struct MemoryReport {
    std::string engine;
    std::size_t graph_bytes = 0;
    std::size_t walk_bytes = 0;   // walk store: walk-trees, or the walk table
    std::size_t index_bytes = 0;  // inverted index, II only
    std::size_t total() const noexcept { return graph_bytes + walk_bytes + index_bytes; }
    std::string to_json() const;
};

MemoryReport memory_report(Corpus const& c, std::string engine = "wharf");
MemoryReport memory_report(IIEngine const& ii);

}  // namespace wharf
