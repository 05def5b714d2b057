#pragma once

// Bookkeeping shared by the graph layer and the walk updater:
// the map of affected walks and the log of re-walk cuts between merges.

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include <wharf/codec.hpp>

namespace wharf {

/// First affected vertex of a walk and its position.
struct Affected {
    VertexId vertex = 0;
    std::uint32_t position = 0;

    friend bool operator==(Affected const&, Affected const&) = default;
};

/// Map of affected walks: walk id -> (vertex, minimum affected position).
class Mav {
public:
    using Map = std::map<WalkId, Affected>;

    /// Insert, or keep the smaller position when the walk is already present.
    void offer(WalkId walk, VertexId vertex, std::uint32_t position)
    {
        auto [it, inserted] = entries_.try_emplace(walk, Affected{vertex, position});
        if (!inserted && position < it->second.position) {
            it->second = Affected{vertex, position};
        }
    }

    void merge(Mav const& other)
    {
        for (auto const& [w, a] : other.entries_) {
            offer(w, a.vertex, a.position);
        }
    }

    Affected const* find(WalkId w) const
    {
        auto it = entries_.find(w);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    Map::const_iterator begin() const noexcept { return entries_.begin(); }
    Map::const_iterator end() const noexcept { return entries_.end(); }

    friend bool operator==(Mav const&, Mav const&) = default;

private:
    Map entries_;
};

/// Insert-or-min over dense walk ids, for bulk scans; build() yields the same Mav as
/// offering every candidate to Mav::offer.
class MavBuilder {
public:
    void offer(WalkId walk, VertexId vertex, std::uint32_t position)
    {
        if (walk >= best_.size()) {
            best_.resize(std::max<std::size_t>(std::size_t{walk} + 1, 2 * best_.size()), kEmpty);
        }
        std::uint64_t const x = (std::uint64_t{position} << 32) | vertex;
        best_[walk] = std::min(best_[walk], x);
    }

    Mav build() const
    {
        Mav m;
        for (std::size_t w = 0; w < best_.size(); ++w) {
            if (best_[w] != kEmpty) {
                m.offer(static_cast<WalkId>(w), static_cast<VertexId>(best_[w]),
                        static_cast<std::uint32_t>(best_[w] >> 32));
            }
        }
        return m;
    }

private:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
    std::vector<std::uint64_t> best_;  // (position << 32) | vertex
};

/// Per-walk re-walk cuts since the last merge.
///
/// A triplet (w, p) stored in a walk-tree version of epoch e is valid iff no cut
/// (e', c) for w has e' > e and c <= p.
class RewriteLog {
public:
    struct Cut {
        std::uint64_t epoch = 0;
        std::uint32_t position = 0;

        friend bool operator==(Cut const&, Cut const&) = default;
    };

    void record(WalkId w, std::uint64_t epoch, std::uint32_t position)
    {
        if (w >= cuts_.size()) {
            cuts_.resize(static_cast<std::size_t>(w) + 1);
        }
        cuts_[w].push_back(Cut{epoch, position});
        ++entries_;
    }

    bool valid(WalkId w, std::uint32_t position, std::uint64_t version_epoch) const noexcept
    {
        if (w >= cuts_.size()) {
            return true;
        }
        for (Cut const& c : cuts_[w]) {
            if (c.epoch > version_epoch && c.position <= position) {
                return false;
            }
        }
        return true;
    }

    std::vector<Cut> const* cuts(WalkId w) const noexcept
    {
        return w < cuts_.size() && !cuts_[w].empty() ? &cuts_[w] : nullptr;
    }

    void clear()
    {
        cuts_.clear();
        entries_ = 0;
    }

    bool empty() const noexcept { return entries_ == 0; }
    std::size_t entries() const noexcept { return entries_; }

private:
    std::vector<std::vector<Cut>> cuts_;
    std::size_t entries_ = 0;
};

}  // namespace wharf
