#pragma once

// Purely-functional weight-balanced binary search trees built on `join`.
// Nodes are immutable and shared between versions; every update path-copies.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace wharf::wbt {

// Traits must provide:
//   using Entry; using Key;
//   static Key key(Entry const&);
//   static std::uint64_t weight(Entry const&);   // summed into Node::total
template <class Traits>
struct Tree {
    using Entry = typename Traits::Entry;
    using Key = typename Traits::Key;

    struct Node;
    using Ptr = std::shared_ptr<const Node>;

    struct Node {
        Entry entry;
        Key key;  // cached: Traits::key may chase a pointer
        Ptr left;
        Ptr right;
        std::size_t size;     // nodes in subtree
        std::uint64_t total;  // sum of Traits::weight over subtree
    };

    static std::size_t size(Ptr const& t) noexcept { return t ? t->size : 0; }
    static std::uint64_t total(Ptr const& t) noexcept { return t ? t->total : 0; }

    static Ptr make(Ptr l, Entry e, Ptr r)
    {
        std::size_t const s = size(l) + size(r) + 1;
        std::uint64_t const w = total(l) + total(r) + Traits::weight(e);
        Key const k = Traits::key(e);
        return std::make_shared<const Node>(Node{std::move(e), k, std::move(l), std::move(r), s, w});
    }

    // Balance factor alpha = 0.29 on weights (size + 1).
    static bool like(std::size_t a, std::size_t b) noexcept
    {
        return 29 * (a + b) <= 100 * a && 29 * (a + b) <= 100 * b;
    }
    static bool heavy(std::size_t a, std::size_t b) noexcept { return 29 * (a + b) > 100 * b; }
    static std::size_t weight_of(Ptr const& t) noexcept { return size(t) + 1; }

    static Ptr rotate_left_make(Ptr l, Entry e, Ptr const& r)
    {
        // (l, e, (rl, re, rr)) -> ((l, e, rl), re, rr)
        return make(make(std::move(l), std::move(e), r->left), r->entry, r->right);
    }

    static Ptr rotate_right_make(Ptr const& l, Entry e, Ptr r)
    {
        // ((ll, le, lr), e, r) -> (ll, le, (lr, e, r))
        return make(l->left, l->entry, make(l->right, std::move(e), std::move(r)));
    }

    static Ptr join_right(Ptr const& tl, Entry e, Ptr const& tr)
    {
        if (like(weight_of(tl), weight_of(tr))) {
            return make(tl, std::move(e), tr);
        }
        Ptr t2 = join_right(tl->right, std::move(e), tr);
        Ptr const& l = tl->left;
        if (like(weight_of(l), weight_of(t2))) {
            return make(l, tl->entry, std::move(t2));
        }
        if (like(weight_of(l), weight_of(t2->left)) &&
            like(weight_of(l) + weight_of(t2->left), weight_of(t2->right))) {
            return rotate_left_make(l, tl->entry, t2);
        }
        Ptr const& l1 = t2->left;
        return make(make(l, tl->entry, l1->left), l1->entry, make(l1->right, t2->entry, t2->right));
    }

    static Ptr join_left(Ptr const& tl, Entry e, Ptr const& tr)
    {
        if (like(weight_of(tl), weight_of(tr))) {
            return make(tl, std::move(e), tr);
        }
        Ptr t2 = join_left(tl, std::move(e), tr->left);
        Ptr const& r = tr->right;
        if (like(weight_of(t2), weight_of(r))) {
            return make(std::move(t2), tr->entry, r);
        }
        if (like(weight_of(t2->right), weight_of(r)) &&
            like(weight_of(t2->left), weight_of(t2->right) + weight_of(r))) {
            return rotate_right_make(t2, tr->entry, r);
        }
        Ptr const& r1 = t2->right;
        return make(make(t2->left, t2->entry, r1->left), r1->entry, make(r1->right, tr->entry, r));
    }

    /// All keys of `l` < key(e) < all keys of `r`.
    static Ptr join(Ptr const& l, Entry e, Ptr const& r)
    {
        std::size_t const wl = weight_of(l);
        std::size_t const wr = weight_of(r);
        if (heavy(wl, wr)) {
            return join_right(l, std::move(e), r);
        }
        if (heavy(wr, wl)) {
            return join_left(l, std::move(e), r);
        }
        return make(l, std::move(e), r);
    }

    static std::pair<Ptr, Entry> split_last(Ptr const& t)
    {
        if (!t->right) {
            return {t->left, t->entry};
        }
        auto [rest, last] = split_last(t->right);
        return {join(t->left, t->entry, rest), std::move(last)};
    }

    static std::pair<Entry, Ptr> split_first(Ptr const& t)
    {
        if (!t->left) {
            return {t->entry, t->right};
        }
        auto [first, rest] = split_first(t->left);
        return {std::move(first), join(rest, t->entry, t->right)};
    }

    static Ptr join2(Ptr const& l, Ptr const& r)
    {
        if (!l) {
            return r;
        }
        if (!r) {
            return l;
        }
        auto [rest, last] = split_last(l);
        return join(rest, std::move(last), r);
    }

    struct Split {
        Ptr left;
        std::optional<Entry> found;
        Ptr right;
    };

    static Split split(Ptr const& t, Key const& k)
    {
        if (!t) {
            return {};
        }
        Key const tk = t->key;
        if (k < tk) {
            Split s = split(t->left, k);
            s.right = join(s.right, t->entry, t->right);
            return s;
        }
        if (tk < k) {
            Split s = split(t->right, k);
            s.left = join(t->left, t->entry, s.left);
            return s;
        }
        return {t->left, t->entry, t->right};
    }

    static Ptr build(std::span<const Entry> sorted)
    {
        if (sorted.empty()) {
            return nullptr;
        }
        std::size_t const mid = sorted.size() / 2;
        return make(build(sorted.first(mid)), sorted[mid], build(sorted.subspan(mid + 1)));
    }

    /// Set union by key; entries of `b` replace equal-keyed entries of `a`.
    static Ptr union_with(Ptr const& a, Ptr const& b)
    {
        if (!a) {
            return b;
        }
        if (!b) {
            return a;
        }
        Split s = split(a, b->key);
        Ptr l = union_with(s.left, b->left);
        Ptr r = union_with(s.right, b->right);
        return join(l, b->entry, r);
    }

    /// Removes every key in `keys` (sorted, unique).
    static Ptr difference(Ptr const& a, std::span<const Key> keys)
    {
        if (!a || keys.empty()) {
            return a;
        }
        Key const k = a->key;
        auto const lo = std::lower_bound(keys.begin(), keys.end(), k);
        bool const hit = lo != keys.end() && *lo == k;
        auto const hi = hit ? lo + 1 : lo;
        Ptr l = difference(a->left, keys.first(static_cast<std::size_t>(lo - keys.begin())));
        Ptr r = difference(a->right, keys.subspan(static_cast<std::size_t>(hi - keys.begin())));
        if (hit) {
            return join2(l, r);
        }
        if (l == a->left && r == a->right) {
            return a;
        }
        return join(l, a->entry, r);
    }

    static Entry const* find(Ptr const& t, Key const& k) noexcept
    {
        Node const* n = t.get();
        while (n != nullptr) {
            Key const nk = n->key;
            if (k < nk) {
                n = n->left.get();
            } else if (nk < k) {
                n = n->right.get();
            } else {
                return &n->entry;
            }
        }
        return nullptr;
    }

    template <class Visit>
    static void for_each(Ptr const& t, Visit&& visit)
    {
        if (!t) {
            return;
        }
        for_each(t->left, visit);
        visit(t->entry);
        for_each(t->right, visit);
    }

    static std::size_t height(Ptr const& t) noexcept
    {
        return t ? 1 + std::max(height(t->left), height(t->right)) : 0;
    }

    /// True when every node satisfies the weight-balance invariant and cached sizes are exact.
    static bool check_balance(Ptr const& t)
    {
        if (!t) {
            return true;
        }
        if (t->size != size(t->left) + size(t->right) + 1) {
            return false;
        }
        if (t->total != total(t->left) + total(t->right) + Traits::weight(t->entry)) {
            return false;
        }
        if (!like(weight_of(t->left), weight_of(t->right))) {
            return false;
        }
        return check_balance(t->left) && check_balance(t->right);
    }
};

}  // namespace wharf::wbt
