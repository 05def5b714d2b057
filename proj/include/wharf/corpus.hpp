#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <wharf/hybrid.hpp>
#include <wharf/models.hpp>
#include <wharf/walk_state.hpp>

namespace wharf {

struct CorpusConfig {
    std::uint32_t walks_per_vertex = 10;
    std::uint32_t length = 80;
    WalkModel model;
    std::uint64_t seed = 1;

    void validate() const;
    /// Throws OverflowError unless walk ids below `walk_ids` encode with this length.
    void check_capacity(std::uint64_t walk_ids) const;
};

/// Dense walk id -> start vertex. Retired ids stay allocated and are never reused.
class WalkRoster {
public:
    WalkId add(VertexId start);
    void retire(WalkId w);

    bool live(WalkId w) const noexcept { return w < live_.size() && live_[w] != 0; }
    /// Start vertex of a live or retired walk. Throws NotFoundError for unknown ids.
    VertexId start(WalkId w) const;
    /// Live walks rooted at `v`, ascending.
    std::vector<WalkId> rooted(VertexId v) const;

    std::size_t id_count() const noexcept { return start_.size(); }
    std::size_t live_count() const noexcept { return live_count_; }
    WalkId next_id() const noexcept { return static_cast<WalkId>(start_.size()); }

    friend bool operator==(WalkRoster const&, WalkRoster const&) = default;

private:
    std::vector<VertexId> start_;
    std::vector<std::uint8_t> live_;
    std::unordered_map<VertexId, std::vector<WalkId>> rooted_;
    std::size_t live_count_ = 0;
};

/// Everything needed to read walks at one epoch.
struct Corpus {
    GraphSnapshot graph;
    WalkRoster roster;
    RewriteLog log;
    CorpusConfig config;
};

/// Encoded triplets gathered per owning vertex before a batch insert.
class InsertionAccumulator {
public:
    void add(VertexId owner, std::uint64_t encoded) { items_.emplace_back(owner, encoded); }
    /// Triplets for positions from..l-1 of a full-length path; the last one points at itself.
    void add_walk(WalkId w, std::span<const VertexId> path, std::uint32_t from);
    void append(InsertionAccumulator&& other);
    void reserve(std::size_t n) { items_.reserve(n); }

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    /// Sorted groups, one per vertex. Throws CorruptionError on a duplicate triplet.
    std::vector<VertexTriplets> take_groups();

private:
    std::vector<std::pair<VertexId, std::uint64_t>> items_;
};

/// n_w walks from every vertex, as one walk-tree version at the graph's epoch.
/// Walk ids follow ascending vertex order: the j-th walk of the i-th vertex is i * n_w + j.
/// Existing walk-trees in `graph` are discarded.
Corpus generate_corpus(GraphSnapshot const& graph, CorpusConfig const& cfg, unsigned threads = 1);

/// Corpus holding exactly the given walks (ids 0.., each of length cfg.length) as one
/// walk-tree version. Paths are not checked against the graph.
Corpus corpus_from_walks(GraphSnapshot const& graph, CorpusConfig const& cfg,
                         std::span<const std::vector<VertexId>> walks);

struct FindStats {
    std::size_t queries = 0;
    std::size_t versions_searched = 0;
    std::size_t decoded = 0;   // values decoded from chunks
    std::size_t in_range = 0;  // stored values inside [lb, ub]
};

struct SearchRange {
    std::uint64_t lb = 0;
    std::uint64_t ub = 0;
};

/// Empty when `v` stores no triplets.
std::optional<SearchRange> search_range(VertexEntry const& v, WalkId w, std::uint32_t p, std::uint32_t l);

/// Next vertex of walk `w` after position `p`, looked up in `v`'s walk-trees newest version
/// first. Empty when no valid triplet matches. Throws NotFoundError for an unknown vertex.
std::optional<VertexId> find_next(GraphSnapshot const& g, VertexId v, WalkId w, std::uint32_t p,
                                  std::uint32_t l, RewriteLog const& log, FindStats* stats = nullptr);

/// The first `count` vertices of walk `w` (default: all l). Throws CorruptionError naming the
/// walk and position when the chain breaks, NotFoundError for a retired or unknown walk.
std::vector<VertexId> reconstruct_walk(Corpus const& c, WalkId w, std::uint32_t count = 0);

/// Every live walk decoded in one pass over the valid triplets: row w holds walk w
/// (rows of retired ids are empty). Checks that each (walk, position) appears exactly once.
std::vector<std::vector<VertexId>> materialize_walks(Corpus const& c);

/// `walk_id: v0 v1 ...` per live walk, ascending id.
void dump_corpus(std::ostream& out, Corpus const& c);
std::vector<std::pair<WalkId, std::vector<VertexId>>> parse_corpus_dump(std::istream& in,
                                                                        std::string const& source = "<corpus>");

}  // namespace wharf
