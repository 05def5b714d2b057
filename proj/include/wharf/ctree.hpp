#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <type_traits>
#include <vector>

#include <wharf/codec.hpp>
#include <wharf/wbtree.hpp>

namespace wharf {

struct ChunkParams {
    std::uint32_t b = 32;                          // expected chunk size
    std::uint64_t hash_seed = 0x5bd1e995c0ffee17ull;
    ChunkCodec codec = ChunkCodec::varint_delta;

    friend bool operator==(ChunkParams const&, ChunkParams const&) = default;
};

/// splitmix64 finalizer of (element ^ seed).
std::uint64_t head_hash(std::uint64_t element, std::uint64_t seed) noexcept;

inline bool is_head(std::uint64_t element, ChunkParams const& p) noexcept
{
    return p.b <= 1 || head_hash(element, p.hash_seed) % p.b == 0;
}

struct ChunkStats {
    std::size_t heads = 0;
    std::size_t prefix_size = 0;
    std::size_t max_chunk = 0;  // elements, head included
};

/// Compressed purely-functional ordered set of 64-bit integers.
///
/// Elements whose hash is divisible by `b` become heads and live in a weight-balanced
/// tree; the non-heads following a head are delta-compressed into its tail. Non-heads
/// smaller than the first head form the prefix. Values are immutable: every update
/// returns a new tree that shares structure with the old one.
class CTree {
public:
    struct Chunk {
        std::vector<std::uint8_t> bytes;
        std::uint32_t count = 0;
        std::uint64_t first = 0;
        std::uint64_t last = 0;
    };
    using ChunkPtr = std::shared_ptr<const Chunk>;

    struct HeadEntry {
        std::uint64_t head = 0;
        ChunkPtr tail;  // may be null

        std::uint64_t last() const noexcept { return tail ? tail->last : head; }
        std::uint32_t tail_count() const noexcept { return tail ? tail->count : 0; }
    };

    struct Traits {
        using Entry = HeadEntry;
        using Key = std::uint64_t;
        static Key key(Entry const& e) noexcept { return e.head; }
        static std::uint64_t weight(Entry const& e) noexcept { return 1 + e.tail_count(); }
    };
    using Tree = wbt::Tree<Traits>;
    using NodePtr = Tree::Ptr;

    CTree() = default;
    explicit CTree(ChunkParams params) : params_(params) {}

    /// Input must be strictly increasing.
    static CTree build(std::span<const std::uint64_t> sorted, ChunkParams params = {});

    CTree multi_insert(std::span<const std::uint64_t> sorted) const;
    CTree multi_delete(std::span<const std::uint64_t> sorted) const;

    std::size_t size() const noexcept { return prefix_count() + Tree::total(root_); }
    bool empty() const noexcept { return size() == 0; }
    ChunkParams const& params() const noexcept { return params_; }

    bool contains(std::uint64_t x) const;
    /// k-th smallest element, k < size().
    std::uint64_t select(std::size_t k) const;
    std::uint64_t front() const;
    std::uint64_t back() const;

    /// In-order traversal. `visit` may return bool (false stops) or void.
    template <class Visit>
    void iterate(Visit&& visit) const;

    /// Visits the elements in [lb, ub] in increasing order and never decodes a chunk
    /// whose [first, last] span misses the range. Returns the number of elements decoded.
    template <class Visit>
    std::size_t range_iterate(std::uint64_t lb, std::uint64_t ub, Visit&& visit) const;

    std::vector<std::uint64_t> to_vector() const;

    /// Bytes of heads, chunk payloads and the cached chunk extrema.
    std::size_t payload_bytes() const;
    ChunkStats chunk_stats() const;
    std::size_t height() const noexcept { return Tree::height(root_); }

    /// Throws CorruptionError describing the first broken invariant.
    void check_invariants() const;

    /// Same prefix chunk and root node (structural identity, not set equality).
    bool shares_structure(CTree const& other) const noexcept
    {
        return prefix_ == other.prefix_ && root_ == other.root_;
    }

    std::vector<std::uint8_t> serialize() const;
    static CTree deserialize(std::span<const std::uint8_t> bytes);

    NodePtr const& root() const noexcept { return root_; }
    ChunkPtr const& prefix() const noexcept { return prefix_; }

private:
    struct Parts {
        std::vector<std::uint64_t> prefix;
        NodePtr tree;
    };
    struct SplitParts {
        Parts left;
        bool found = false;
        Parts right;
    };

    std::size_t prefix_count() const noexcept { return prefix_ ? prefix_->count : 0; }

    ChunkPtr make_chunk(std::span<const std::uint64_t> values, std::uint64_t base) const;
    HeadEntry make_head(std::uint64_t head, std::span<const std::uint64_t> tail) const;
    std::vector<std::uint64_t> decode(Chunk const* c, std::uint64_t base) const;
    Parts build_parts(std::span<const std::uint64_t> sorted) const;
    CTree from_parts(Parts&& p) const;
    Parts to_parts() const;

    SplitParts split(Parts a, std::uint64_t k) const;
    Parts union_parts(Parts a, Parts b) const;
    Parts difference_parts(Parts a, std::span<const std::uint64_t> keys) const;

    template <class Visit>
    static bool invoke_visit(Visit& visit, std::uint64_t v)
    {
        if constexpr (std::is_void_v<std::invoke_result_t<Visit&, std::uint64_t>>) {
            visit(v);
            return true;
        } else {
            return static_cast<bool>(visit(v));
        }
    }

    template <class Visit>
    bool iterate_node(Tree::Node const* n, Visit& visit) const;

    struct RangeState {
        std::uint64_t lb;
        std::uint64_t ub;
        std::size_t decoded = 0;
        bool stop = false;
    };
    template <class Visit>
    void range_chunk(Chunk const& c, std::uint64_t base, RangeState& st, Visit& visit) const;
    template <class Visit>
    void range_node(Tree::Node const* n, RangeState& st, Visit& visit) const;

    ChunkParams params_{};
    ChunkPtr prefix_;
    NodePtr root_;
};

// ---------------------------------------------------------------------------

template <class Visit>
bool CTree::iterate_node(Tree::Node const* n, Visit& visit) const
{
    if (n == nullptr) {
        return true;
    }
    if (!iterate_node(n->left.get(), visit)) {
        return false;
    }
    if (!invoke_visit(visit, n->entry.head)) {
        return false;
    }
    if (auto const& t = n->entry.tail) {
        bool keep = true;
        decode_chunk(t->bytes, t->count, n->entry.head, params_.codec, [&](std::uint64_t v) {
            keep = invoke_visit(visit, v);
            return keep;
        });
        if (!keep) {
            return false;
        }
    }
    return iterate_node(n->right.get(), visit);
}

template <class Visit>
void CTree::iterate(Visit&& visit) const
{
    if (prefix_) {
        bool keep = true;
        decode_chunk(prefix_->bytes, prefix_->count, 0, params_.codec, [&](std::uint64_t v) {
            keep = invoke_visit(visit, v);
            return keep;
        });
        if (!keep) {
            return;
        }
    }
    iterate_node(root_.get(), visit);
}

template <class Visit>
void CTree::range_chunk(Chunk const& c, std::uint64_t base, RangeState& st, Visit& visit) const
{
    st.decoded += decode_chunk(c.bytes, c.count, base, params_.codec, [&](std::uint64_t v) {
        if (v > st.ub) {
            st.stop = true;
            return false;
        }
        if (v >= st.lb && !invoke_visit(visit, v)) {
            st.stop = true;
            return false;
        }
        return true;
    });
}

template <class Visit>
void CTree::range_node(Tree::Node const* n, RangeState& st, Visit& visit) const
{
    if (n == nullptr || st.stop) {
        return;
    }
    std::uint64_t const head = n->entry.head;
    std::uint64_t const last = n->entry.last();
    if (st.ub < head) {
        range_node(n->left.get(), st, visit);
        return;
    }
    if (st.lb > last) {
        range_node(n->right.get(), st, visit);
        return;
    }
    if (st.lb < head) {
        range_node(n->left.get(), st, visit);
        if (st.stop) {
            return;
        }
    }
    ++st.decoded;
    if (head >= st.lb && !invoke_visit(visit, head)) {
        st.stop = true;
        return;
    }
    if (n->entry.tail) {
        range_chunk(*n->entry.tail, head, st, visit);
        if (st.stop) {
            return;
        }
    }
    if (st.ub > last) {
        range_node(n->right.get(), st, visit);
    }
}

template <class Visit>
std::size_t CTree::range_iterate(std::uint64_t lb, std::uint64_t ub, Visit&& visit) const
{
    RangeState st{lb, ub};
    if (lb > ub) {
        return 0;
    }
    if (prefix_ && !(ub < prefix_->first || lb > prefix_->last)) {
        range_chunk(*prefix_, 0, st, visit);
    }
    range_node(root_.get(), st, visit);
    return st.decoded;
}

}  // namespace wharf
