#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <wharf/ctree.hpp>
#include <wharf/walk_state.hpp>
#include <wharf/wbtree.hpp>

namespace wharf {

struct WalkVersion {
    std::uint64_t epoch = 0;
    CTree tree;
};

/// One vertex of the hybrid tree: adjacency, walk-tree versions, and next-vertex bounds.
struct VertexEntry {
    VertexId id = 0;
    CTree edges;
    std::vector<WalkVersion> walks;  // ascending epoch
    VertexId next_min = std::numeric_limits<VertexId>::max();
    VertexId next_max = 0;

    bool has_bounds() const noexcept { return next_min <= next_max; }
    std::size_t degree() const noexcept { return edges.size(); }
    std::size_t triplet_count() const noexcept;
};

using VertexEntryPtr = std::shared_ptr<const VertexEntry>;

/// Read-only adjacency of a vertex in a snapshot; matches the sampler's adjacency interface.
class TreeAdjacency {
public:
    explicit TreeAdjacency(CTree const* edges = nullptr) : edges_(edges) {}

    std::size_t size() const noexcept { return edges_ ? edges_->size() : 0; }
    VertexId operator[](std::size_t k) const { return static_cast<VertexId>(edges_->select(k)); }
    bool contains(VertexId v) const { return edges_ && edges_->contains(v); }

private:
    CTree const* edges_;
};

/// Walk triplets to be appended to one vertex.
struct VertexTriplets {
    VertexId vertex = 0;
    std::vector<std::uint64_t> triplets;  // strictly increasing encoded values
};

/// Immutable view of the graph and the walk corpus at one epoch.
class GraphSnapshot {
public:
    struct Traits {
        using Entry = VertexEntryPtr;
        using Key = VertexId;
        static Key key(Entry const& e) noexcept { return e->id; }
        static std::uint64_t weight(Entry const& e) noexcept { return e->degree(); }
    };
    using Tree = wbt::Tree<Traits>;

    GraphSnapshot() = default;
    GraphSnapshot(ChunkParams edge_params, ChunkParams walk_params)
        : edge_params_(edge_params), walk_params_(walk_params)
    {}

    /// Undirected graph from an edge list. Self-loops are rejected; duplicates collapse.
    static GraphSnapshot from_edges(std::span<const std::pair<VertexId, VertexId>> edges,
                                    ChunkParams edge_params = {}, ChunkParams walk_params = {});

    std::uint64_t epoch() const noexcept { return epoch_; }
    std::size_t vertex_count() const noexcept { return Tree::size(root_); }
    std::size_t edge_count() const noexcept { return Tree::total(root_) / 2; }
    ChunkParams const& edge_params() const noexcept { return edge_params_; }
    ChunkParams const& walk_params() const noexcept { return walk_params_; }

    VertexEntry const* find(VertexId v) const noexcept;
    /// Throws NotFoundError.
    VertexEntry const& at(VertexId v) const;
    bool has_vertex(VertexId v) const noexcept { return find(v) != nullptr; }

    std::vector<VertexId> neighbors(VertexId v) const;
    TreeAdjacency adjacency(VertexId v) const noexcept;
    bool has_edge(VertexId a, VertexId b) const;

    template <class Visit>
    void for_each_vertex(Visit&& visit) const
    {
        Tree::for_each(root_, [&](VertexEntryPtr const& e) { visit(*e); });
    }
    std::vector<VertexId> vertex_ids() const;

    /// Appends one walk-tree version per listed vertex (sorted by vertex, unique).
    /// A vertex whose newest version already carries `epoch` gets the triplets merged into it.
    GraphSnapshot push_walk_versions(std::uint64_t epoch, std::span<const VertexTriplets> groups) const;
    GraphSnapshot push_walk_version(VertexId v, std::uint64_t epoch,
                                    std::span<const std::uint64_t> triplets) const;

    /// Replaces entries (sorted by id, unique) and removes ids (sorted, unique).
    GraphSnapshot with_entries(std::span<const VertexEntryPtr> replace, std::span<const VertexId> remove,
                               std::uint64_t epoch) const;
    GraphSnapshot with_epoch(std::uint64_t epoch) const;
    /// Same graph and epoch with every walk-tree dropped.
    GraphSnapshot without_walks() const;

    /// Identical vertex-tree root (same reachable state).
    bool same_root(GraphSnapshot const& other) const noexcept { return root_ == other.root_; }

    std::size_t walk_store_bytes() const;
    std::size_t edge_store_bytes() const;
    std::size_t triplet_count() const;
    std::size_t max_walk_versions() const;

private:
    ChunkParams edge_params_{};
    ChunkParams walk_params_{};
    Tree::Ptr root_;
    std::uint64_t epoch_ = 0;
};

/// Widens `e`'s next-vertex bounds with every triplet in `triplets`.
void widen_bounds(VertexEntry& e, std::span<const std::uint64_t> triplets);

// ---------------------------------------------------------------------------
// Edge batches

enum class EdgeOp : std::uint8_t { insert, remove };

struct EdgeUpdate {
    EdgeOp op = EdgeOp::insert;
    VertexId src = 0;
    VertexId dst = 0;

    friend bool operator==(EdgeUpdate const&, EdgeUpdate const&) = default;
};

struct EdgeBatch {
    std::vector<EdgeUpdate> ops;
};

/// Undirected batch after validation: canonical (min, max) edges, sorted and unique.
struct NormalizedBatch {
    std::vector<std::pair<VertexId, VertexId>> inserts;
    std::vector<std::pair<VertexId, VertexId>> removes;

    bool empty() const noexcept { return inserts.empty() && removes.empty(); }
    /// Every endpoint of every op, sorted and unique.
    std::vector<VertexId> endpoints() const;
};

struct OpError {
    std::size_t index = 0;  // position in the submitted batch
    EdgeUpdate op;
    std::string reason;
};

class BatchError : public std::runtime_error {
public:
    explicit BatchError(std::vector<OpError> errors);
    std::vector<OpError> const& errors() const noexcept { return errors_; }

private:
    std::vector<OpError> errors_;
};

/// Deduplicates, rejects self-loops and insert+delete of one edge, and checks
/// presence against `graph`. Throws BatchError listing every bad op.
NormalizedBatch normalize_batch(EdgeBatch const& batch, GraphSnapshot const& graph);
/// Same, with edge presence supplied by the caller.
NormalizedBatch normalize_batch(EdgeBatch const& batch, std::function<bool(VertexId, VertexId)> const& has_edge);

/// Text format: `+ src dst` / `- src dst` per line, `#` starts a comment.
EdgeBatch parse_batch(std::istream& in, std::string const& source = "<batch>");
EdgeBatch read_batch_file(std::string const& path);
void write_batch(std::ostream& out, EdgeBatch const& batch);

/// Text format: `src dst` per line, `#` or `%` comments.
std::vector<std::pair<VertexId, VertexId>> parse_edge_list(std::istream& in,
                                                           std::string const& source = "<edges>");
std::vector<std::pair<VertexId, VertexId>> read_edge_list(std::string const& path);

// ---------------------------------------------------------------------------

struct MavContext {
    std::uint32_t walk_length = 0;
    RewriteLog const* log = nullptr;  // null: every stored triplet is valid
};

struct BatchApplication {
    GraphSnapshot graph;
    Mav mav;
    std::vector<VertexId> added;    // vertices created by this batch
    std::vector<VertexId> removed;  // vertices whose degree reached zero
    std::size_t triplets_scanned = 0;
};

/// Applies an edge batch all-or-nothing and builds the map of affected walks from the
/// walk-trees of every endpoint in `graph` (the pre-batch state).
BatchApplication apply_edge_batch(GraphSnapshot const& graph, EdgeBatch const& batch, MavContext ctx);

/// Scans every valid triplet stored under `v` and offers (walk, v, position) to `mav`.
/// Returns the number of triplets decoded.
std::size_t collect_affected(VertexEntry const& v, MavContext ctx, MavBuilder& mav);

}  // namespace wharf
