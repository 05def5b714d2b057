#pragma once

// Inverted-index baseline: walks kept as plain vertex sequences next to a
// vertex -> walk-id index, over a sorted-vector adjacency graph.

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <wharf/corpus.hpp>
#include <wharf/updater.hpp>

namespace wharf {

class SortedAdjacency {
public:
    explicit SortedAdjacency(std::vector<VertexId> const* nbrs = nullptr) : nbrs_(nbrs) {}

    std::size_t size() const noexcept { return nbrs_ ? nbrs_->size() : 0; }
    VertexId operator[](std::size_t k) const { return (*nbrs_)[k]; }
    bool contains(VertexId v) const { return nbrs_ && std::binary_search(nbrs_->begin(), nbrs_->end(), v); }

private:
    std::vector<VertexId> const* nbrs_;
};

class AdjacencyGraph {
public:
    AdjacencyGraph() = default;
    explicit AdjacencyGraph(std::span<const std::pair<VertexId, VertexId>> edges);

    SortedAdjacency adjacency(VertexId v) const noexcept;
    bool has_vertex(VertexId v) const noexcept { return adj_.count(v) != 0; }
    bool has_edge(VertexId a, VertexId b) const noexcept { return adjacency(a).contains(b); }
    std::size_t vertex_count() const noexcept { return adj_.size(); }
    std::size_t edge_count() const noexcept { return directed_ / 2; }
    /// Sorted ascending.
    std::vector<VertexId> vertex_ids() const;

    struct Delta {
        std::vector<VertexId> added;
        std::vector<VertexId> removed;
    };
    Delta apply(NormalizedBatch const& b);

    std::size_t payload_bytes() const noexcept { return 8 * (adj_.size() + directed_); }

private:
    std::unordered_map<VertexId, std::vector<VertexId>> adj_;
    std::size_t directed_ = 0;
};

struct IIMemory {
    std::size_t walks_bytes = 0;  // 8 bytes per stored walk vertex
    std::size_t index_bytes = 0;  // 8 bytes per key + 8 bytes per walk id in a set
    std::size_t graph_bytes = 0;
};

struct IIUpdate {
    Mav mav;
    std::vector<VertexId> added;
    std::vector<VertexId> removed;
    UpdateStats stats;
};

class IIEngine {
public:
    IIEngine(std::span<const std::pair<VertexId, VertexId>> edges, CorpusConfig cfg, unsigned threads = 1);

    /// Validates and applies the batch, builds the MAV, re-walks and updates the index.
    IIUpdate apply_batch(EdgeBatch const& batch);

    /// MAV of a validated batch over the current walks, without applying it.
    Mav compute_mav(NormalizedBatch const& b) const;

    AdjacencyGraph const& graph() const noexcept { return graph_; }
    WalkRoster const& roster() const noexcept { return roster_; }
    CorpusConfig const& config() const noexcept { return cfg_; }
    std::uint64_t epoch() const noexcept { return epoch_; }
    /// Row w holds walk w; rows of retired walks are empty.
    std::vector<std::vector<VertexId>> const& walks() const noexcept { return walks_; }
    std::vector<WalkId> const* index(VertexId v) const;

    IIMemory memory() const;
    /// Throws CorruptionError unless v in walk w <=> w in index[v].
    void check_index() const;

private:
    void index_add(VertexId v, WalkId w);
    void index_remove(VertexId v, WalkId w);
    void rewrite(WalkId w, std::vector<VertexId> path);

    CorpusConfig cfg_;
    unsigned threads_;
    AdjacencyGraph graph_;
    WalkRoster roster_;
    std::vector<std::vector<VertexId>> walks_;
    std::unordered_map<VertexId, std::vector<WalkId>> index_;  // sorted, unique
    std::size_t index_entries_ = 0;
    std::uint64_t epoch_ = 0;
};

}  // namespace wharf
