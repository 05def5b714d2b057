#include <wharf/ctree.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

namespace wharf {

std::uint64_t head_hash(std::uint64_t element, std::uint64_t seed) noexcept
{
    std::uint64_t z = element ^ seed;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

void require_sorted(std::span<const std::uint64_t> xs, char const* what)
{
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] <= xs[i - 1]) {
            throw ContractError(std::string(what) + ": input not strictly increasing at index " +
                                std::to_string(i));
        }
    }
}

std::vector<std::uint64_t> merge_sorted(std::vector<std::uint64_t> const& a,
                                        std::vector<std::uint64_t> const& b)
{
    std::vector<std::uint64_t> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& pos)
{
    if (pos + 8 > in.size()) {
        throw CorruptionError("truncated snapshot header");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | in[pos + static_cast<std::size_t>(i)];
    }
    pos += 8;
    return v;
}

}  // namespace

CTree::ChunkPtr CTree::make_chunk(std::span<const std::uint64_t> values, std::uint64_t base) const
{
    if (values.empty()) {
        return nullptr;
    }
    ChunkBytes cb = compress_chunk(values, base, params_.codec);
    auto c = std::make_shared<Chunk>();
    c->bytes = std::move(cb.bytes);
    c->bytes.shrink_to_fit();
    c->count = static_cast<std::uint32_t>(values.size());
    c->first = values.front();
    c->last = values.back();
    return c;
}

CTree::HeadEntry CTree::make_head(std::uint64_t head, std::span<const std::uint64_t> tail) const
{
    return HeadEntry{head, make_chunk(tail, head)};
}

std::vector<std::uint64_t> CTree::decode(Chunk const* c, std::uint64_t base) const
{
    std::vector<std::uint64_t> out;
    if (c == nullptr) {
        return out;
    }
    out.reserve(c->count);
    decode_chunk(c->bytes, c->count, base, params_.codec, [&](std::uint64_t v) {
        out.push_back(v);
        return true;
    });
    return out;
}

CTree::Parts CTree::build_parts(std::span<const std::uint64_t> sorted) const
{
    Parts p;
    std::size_t i = 0;
    while (i < sorted.size() && !is_head(sorted[i], params_)) {
        p.prefix.push_back(sorted[i++]);
    }
    std::vector<HeadEntry> heads;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && !is_head(sorted[j], params_)) {
            ++j;
        }
        heads.push_back(make_head(sorted[i], sorted.subspan(i + 1, j - i - 1)));
        i = j;
    }
    p.tree = Tree::build(heads);
    return p;
}

CTree CTree::from_parts(Parts&& p) const
{
    CTree t(params_);
    t.prefix_ = make_chunk(p.prefix, 0);
    t.root_ = std::move(p.tree);
    return t;
}

CTree::Parts CTree::to_parts() const
{
    return Parts{decode(prefix_.get(), 0), root_};
}

CTree CTree::build(std::span<const std::uint64_t> sorted, ChunkParams params)
{
    require_sorted(sorted, "CTree::build");
    CTree t(params);
    if (params.b == 0) {
        throw ContractError("chunk parameter b must be >= 1");
    }
    return t.from_parts(t.build_parts(sorted));
}

CTree::SplitParts CTree::split(Parts a, std::uint64_t k) const
{
    SplitParts out;
    if (!a.tree) {
        auto const lo = std::lower_bound(a.prefix.begin(), a.prefix.end(), k);
        out.found = lo != a.prefix.end() && *lo == k;
        out.left.prefix.assign(a.prefix.begin(), lo);
        out.right.prefix.assign(out.found ? lo + 1 : lo, a.prefix.end());
        return out;
    }
    Tree::Node const& n = *a.tree;
    std::uint64_t const h = n.entry.head;
    if (k < h) {
        SplitParts s = split(Parts{std::move(a.prefix), n.left}, k);
        s.right.tree = Tree::join(s.right.tree, n.entry, n.right);
        return s;
    }
    if (k == h) {
        out.found = true;
        out.left = Parts{std::move(a.prefix), n.left};
        out.right = Parts{decode(n.entry.tail.get(), h), n.right};
        return out;
    }
    SplitParts s = split(Parts{decode(n.entry.tail.get(), h), n.right}, k);
    out.found = s.found;
    out.left.prefix = std::move(a.prefix);
    out.left.tree = Tree::join(n.left, make_head(h, s.left.prefix), s.left.tree);
    out.right = std::move(s.right);
    return out;
}

CTree::Parts CTree::union_parts(Parts a, Parts b) const
{
    if (!a.tree && a.prefix.empty()) {
        return b;
    }
    if (!b.tree && b.prefix.empty()) {
        return a;
    }
    if (!a.tree && !b.tree) {
        return Parts{merge_sorted(a.prefix, b.prefix), nullptr};
    }
    if (!b.tree) {
        std::swap(a, b);
    }
    Tree::Node const& n = *b.tree;
    std::uint64_t const h = n.entry.head;
    SplitParts s = split(std::move(a), h);
    Parts l = union_parts(std::move(s.left), Parts{std::move(b.prefix), n.left});
    Parts r = union_parts(std::move(s.right), Parts{decode(n.entry.tail.get(), h), n.right});
    if (!s.found && l.tree == n.left && r.tree == n.right && r.prefix.size() == n.entry.tail_count() &&
        l.prefix.size() == b.prefix.size()) {
        // Nothing from `a` landed here; keep the original node.
        return Parts{std::move(l.prefix), b.tree};
    }
    return Parts{std::move(l.prefix), Tree::join(l.tree, make_head(h, r.prefix), r.tree)};
}

CTree::Parts CTree::difference_parts(Parts a, std::span<const std::uint64_t> keys) const
{
    if (keys.empty()) {
        return a;
    }
    if (!a.tree) {
        std::vector<std::uint64_t> kept;
        kept.reserve(a.prefix.size());
        std::set_difference(a.prefix.begin(), a.prefix.end(), keys.begin(), keys.end(),
                            std::back_inserter(kept));
        return Parts{std::move(kept), nullptr};
    }
    Tree::Node const& n = *a.tree;
    std::uint64_t const h = n.entry.head;
    auto const lo = std::lower_bound(keys.begin(), keys.end(), h);
    bool const hit = lo != keys.end() && *lo == h;
    auto const hi = hit ? lo + 1 : lo;
    auto const left_keys = keys.first(static_cast<std::size_t>(lo - keys.begin()));
    auto const right_keys = keys.subspan(static_cast<std::size_t>(hi - keys.begin()));

    Parts l = difference_parts(Parts{std::move(a.prefix), n.left}, left_keys);
    Parts r;
    if (right_keys.empty() && !hit) {
        r.tree = n.right;
    } else {
        r = difference_parts(Parts{decode(n.entry.tail.get(), h), n.right}, right_keys);
    }

    if (!hit) {
        if (right_keys.empty()) {
            if (l.tree == n.left) {
                return Parts{std::move(l.prefix), a.tree};
            }
            return Parts{std::move(l.prefix), Tree::join(l.tree, n.entry, n.right)};
        }
        return Parts{std::move(l.prefix), Tree::join(l.tree, make_head(h, r.prefix), r.tree)};
    }
    // The head is gone: its remaining tail joins the chunk that precedes it.
    if (!l.tree) {
        l.prefix.insert(l.prefix.end(), r.prefix.begin(), r.prefix.end());
        return Parts{std::move(l.prefix), r.tree};
    }
    if (r.prefix.empty()) {
        return Parts{std::move(l.prefix), Tree::join2(l.tree, r.tree)};
    }
    auto [rest, last] = Tree::split_last(l.tree);
    std::vector<std::uint64_t> tail = decode(last.tail.get(), last.head);
    tail.insert(tail.end(), r.prefix.begin(), r.prefix.end());
    return Parts{std::move(l.prefix), Tree::join(rest, make_head(last.head, tail), r.tree)};
}

CTree CTree::multi_insert(std::span<const std::uint64_t> sorted) const
{
    require_sorted(sorted, "CTree::multi_insert");
    if (sorted.empty()) {
        return *this;
    }
    if (empty()) {
        return build(sorted, params_);
    }
    Parts merged = union_parts(to_parts(), build_parts(sorted));
    if (merged.tree == root_ && merged.prefix.size() == prefix_count()) {
        return *this;
    }
    return from_parts(std::move(merged));
}

CTree CTree::multi_delete(std::span<const std::uint64_t> sorted) const
{
    require_sorted(sorted, "CTree::multi_delete");
    if (sorted.empty() || empty()) {
        return *this;
    }
    Parts rest = difference_parts(to_parts(), sorted);
    if (rest.tree == root_ && rest.prefix.size() == prefix_count()) {
        return *this;
    }
    return from_parts(std::move(rest));
}

bool CTree::contains(std::uint64_t x) const
{
    if (prefix_ && x <= prefix_->last) {
        if (x < prefix_->first) {
            return false;
        }
        bool hit = false;
        decode_chunk(prefix_->bytes, prefix_->count, 0, params_.codec, [&](std::uint64_t v) {
            hit = v == x;
            return v < x;
        });
        return hit;
    }
    // Largest head <= x.
    Tree::Node const* n = root_.get();
    Tree::Node const* best = nullptr;
    while (n != nullptr) {
        if (n->entry.head <= x) {
            best = n;
            n = n->right.get();
        } else {
            n = n->left.get();
        }
    }
    if (best == nullptr) {
        return false;
    }
    if (best->entry.head == x) {
        return true;
    }
    if (!best->entry.tail || x > best->entry.tail->last) {
        return false;
    }
    bool hit = false;
    auto const& t = *best->entry.tail;
    decode_chunk(t.bytes, t.count, best->entry.head, params_.codec, [&](std::uint64_t v) {
        hit = v == x;
        return v < x;
    });
    return hit;
}

std::uint64_t CTree::select(std::size_t k) const
{
    if (k >= size()) {
        throw ContractError("CTree::select index " + std::to_string(k) + " out of range");
    }
    auto nth = [&](Chunk const& c, std::uint64_t base, std::size_t idx) {
        std::uint64_t out = 0;
        std::size_t i = 0;
        decode_chunk(c.bytes, c.count, base, params_.codec, [&](std::uint64_t v) {
            out = v;
            return i++ < idx;
        });
        return out;
    };
    if (k < prefix_count()) {
        return nth(*prefix_, 0, k);
    }
    std::uint64_t idx = k - prefix_count();
    Tree::Node const* n = root_.get();
    while (true) {
        std::uint64_t const left = Tree::total(n->left);
        if (idx < left) {
            n = n->left.get();
            continue;
        }
        idx -= left;
        std::uint64_t const here = 1 + n->entry.tail_count();
        if (idx < here) {
            return idx == 0 ? n->entry.head : nth(*n->entry.tail, n->entry.head, idx - 1);
        }
        idx -= here;
        n = n->right.get();
    }
}

std::uint64_t CTree::front() const
{
    if (empty()) {
        throw ContractError("front() of empty CTree");
    }
    if (prefix_) {
        return prefix_->first;
    }
    Tree::Node const* n = root_.get();
    while (n->left) {
        n = n->left.get();
    }
    return n->entry.head;
}

std::uint64_t CTree::back() const
{
    if (empty()) {
        throw ContractError("back() of empty CTree");
    }
    if (!root_) {
        return prefix_->last;
    }
    Tree::Node const* n = root_.get();
    while (n->right) {
        n = n->right.get();
    }
    return n->entry.last();
}

std::vector<std::uint64_t> CTree::to_vector() const
{
    std::vector<std::uint64_t> out;
    out.reserve(size());
    iterate([&](std::uint64_t v) { out.push_back(v); });
    return out;
}

std::size_t CTree::payload_bytes() const
{
    // prefix: bytes + first/last; each head: head + cached last + tail bytes
    std::size_t bytes = prefix_ ? prefix_->bytes.size() + 16 : 0;
    Tree::for_each(root_, [&](HeadEntry const& e) {
        bytes += 16;
        if (e.tail) {
            bytes += e.tail->bytes.size();
        }
    });
    return bytes;
}

ChunkStats CTree::chunk_stats() const
{
    ChunkStats s;
    s.prefix_size = prefix_count();
    s.max_chunk = s.prefix_size;
    Tree::for_each(root_, [&](HeadEntry const& e) {
        ++s.heads;
        s.max_chunk = std::max<std::size_t>(s.max_chunk, 1 + e.tail_count());
    });
    return s;
}

void CTree::check_invariants() const
{
    if (!Tree::check_balance(root_)) {
        throw CorruptionError("head tree violates weight balance or cached sizes");
    }
    bool have_prev = false;
    std::uint64_t prev = 0;
    auto step = [&](std::uint64_t v) {
        if (have_prev && v <= prev) {
            throw CorruptionError("elements not strictly increasing");
        }
        have_prev = true;
        prev = v;
    };
    if (prefix_) {
        auto vals = decode(prefix_.get(), 0);
        if (vals.size() != prefix_->count || vals.front() != prefix_->first || vals.back() != prefix_->last) {
            throw CorruptionError("prefix cache mismatch");
        }
        for (auto v : vals) {
            if (is_head(v, params_)) {
                throw CorruptionError("prefix holds head-hashed element " + std::to_string(v));
            }
            step(v);
        }
    }
    Tree::for_each(root_, [&](HeadEntry const& e) {
        if (!is_head(e.head, params_)) {
            throw CorruptionError("non-head element " + std::to_string(e.head) + " promoted");
        }
        step(e.head);
        if (e.tail) {
            auto vals = decode(e.tail.get(), e.head);
            if (vals.size() != e.tail->count || vals.empty() || vals.front() != e.tail->first ||
                vals.back() != e.tail->last) {
                throw CorruptionError("tail cache mismatch at head " + std::to_string(e.head));
            }
            for (auto v : vals) {
                if (is_head(v, params_)) {
                    throw CorruptionError("tail holds head-hashed element " + std::to_string(v));
                }
                step(v);
            }
        }
    });
}

// Layout: u64 size, u64 b, u64 hash_seed, u8 codec, u64 head count,
// heads in pre-order as (u64 head, varint tail count, varint byte length, bytes),
// then prefix as (varint count, varint byte length, bytes). Integers little-endian.
std::vector<std::uint8_t> CTree::serialize() const
{
    std::vector<std::uint8_t> out;
    put_u64(out, size());
    put_u64(out, params_.b);
    put_u64(out, params_.hash_seed);
    out.push_back(static_cast<std::uint8_t>(params_.codec));
    put_u64(out, Tree::size(root_));
    auto pre = [&](auto&& self, Tree::Node const* n) -> void {
        if (n == nullptr) {
            return;
        }
        put_u64(out, n->entry.head);
        auto const& t = n->entry.tail;
        put_varint(out, t ? t->count : 0);
        put_varint(out, t ? t->bytes.size() : 0);
        if (t) {
            out.insert(out.end(), t->bytes.begin(), t->bytes.end());
        }
        self(self, n->left.get());
        self(self, n->right.get());
    };
    pre(pre, root_.get());
    put_varint(out, prefix_count());
    put_varint(out, prefix_ ? prefix_->bytes.size() : 0);
    if (prefix_) {
        out.insert(out.end(), prefix_->bytes.begin(), prefix_->bytes.end());
    }
    return out;
}

CTree CTree::deserialize(std::span<const std::uint8_t> in)
{
    std::size_t pos = 0;
    std::uint64_t const total = get_u64(in, pos);
    ChunkParams params;
    params.b = static_cast<std::uint32_t>(get_u64(in, pos));
    params.hash_seed = get_u64(in, pos);
    if (pos >= in.size()) {
        throw CorruptionError("truncated snapshot header");
    }
    std::uint8_t const codec = in[pos++];
    if (codec > 1) {
        throw CorruptionError("unknown chunk codec " + std::to_string(codec));
    }
    params.codec = static_cast<ChunkCodec>(codec);
    std::uint64_t const heads = get_u64(in, pos);

    CTree t(params);
    auto read_chunk = [&](std::uint64_t base) -> ChunkPtr {
        std::uint64_t const count = get_varint(in, pos);
        std::uint64_t const len = get_varint(in, pos);
        if (pos + len > in.size()) {
            throw CorruptionError("truncated chunk payload");
        }
        if (count == 0) {
            if (len != 0) {
                throw CorruptionError("empty chunk with payload");
            }
            return nullptr;
        }
        ChunkBytes cb{std::vector<std::uint8_t>(in.begin() + static_cast<std::ptrdiff_t>(pos),
                                                in.begin() + static_cast<std::ptrdiff_t>(pos + len)),
                      count};
        pos += len;
        auto vals = decompress_chunk(cb, base, params.codec);
        auto c = std::make_shared<Chunk>();
        c->bytes = std::move(cb.bytes);
        c->count = static_cast<std::uint32_t>(count);
        c->first = vals.front();
        c->last = vals.back();
        return c;
    };

    std::vector<HeadEntry> order;
    order.reserve(heads);
    for (std::uint64_t i = 0; i < heads; ++i) {
        std::uint64_t const h = get_u64(in, pos);
        order.push_back(HeadEntry{h, read_chunk(h)});
    }
    // Rebuild the exact shape from the pre-order sequence of a search tree.
    std::size_t idx = 0;
    auto rebuild = [&](auto&& self, bool bounded, std::uint64_t upper) -> NodePtr {
        if (idx >= order.size() || (bounded && order[idx].head >= upper)) {
            return nullptr;
        }
        HeadEntry e = order[idx++];
        NodePtr l = self(self, true, e.head);
        NodePtr r = self(self, bounded, upper);
        return Tree::make(std::move(l), std::move(e), std::move(r));
    };
    t.root_ = rebuild(rebuild, false, 0);
    if (idx != order.size()) {
        throw CorruptionError("head sequence is not a search-tree pre-order");
    }
    t.prefix_ = read_chunk(0);
    if (pos != in.size()) {
        throw CorruptionError("trailing bytes after snapshot");
    }
    if (t.size() != total) {
        throw CorruptionError("snapshot size mismatch");
    }
    return t;
}

}  // namespace wharf
