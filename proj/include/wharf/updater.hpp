#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <wharf/corpus.hpp>

namespace wharf {

enum class MergeKind : std::uint8_t { on_demand, eager, every_k };

struct MergePolicy {
    MergeKind kind = MergeKind::on_demand;
    std::uint32_t k = 1;

    /// "on-demand", "eager" or "every:k" (k >= 1).
    static MergePolicy parse(std::string const& s);
    std::string name() const;
    /// Whether the batch that produced `epoch` is followed by a merge.
    bool fires(std::uint64_t epoch) const noexcept;
};

struct UpdateStats {
    std::uint64_t epoch = 0;
    std::size_t affected_walks = 0;
    std::size_t inserted = 0;  // |I| = sum over affected walks of (l - p_min)
    std::size_t fresh_walks = 0;
    std::size_t fresh_triplets = 0;
    std::size_t retired_walks = 0;
    std::size_t skipped_retired = 0;  // MAV entries naming a retired walk
    std::size_t dead_ends = 0;
    std::size_t triplets_scanned = 0;  // decoded while building the MAV
    std::vector<std::size_t> pmin_histogram;
    bool merged = false;
    double mav_seconds = 0;
    double sample_seconds = 0;
    double insert_seconds = 0;
    double merge_seconds = 0;
    double total_seconds = 0;
    std::size_t peak_walk_bytes = 0;  // before the merge, if any
    std::size_t walk_bytes = 0;

    std::string to_json_line() const;
};

struct CorpusReport {
    std::vector<std::size_t> pmin_histogram;  // index = p_min, size l
    std::size_t affected_walks = 0;
    std::size_t inserted = 0;
};

CorpusReport corpus_stats(Mav const& mav, std::uint32_t walk_length);

/// Re-walks every MAV entry from its p_min at the epoch of `c.graph` (already post-batch),
/// retires walks rooted at `removed`, spawns n_w walks for each of `added`, logs the cuts and
/// inserts all new triplets as one walk-tree version per touched vertex.
Corpus batch_walk_update(Corpus c, Mav const& mav, std::span<const VertexId> added,
                         std::span<const VertexId> removed, UpdateStats& stats, unsigned threads = 1);

/// One walk-tree version per vertex holding exactly its valid triplets; tight bounds; empty log.
Corpus merge_corpus(Corpus const& c, unsigned threads = 1);

struct UpdateResult {
    Corpus corpus;
    Mav mav;
    std::vector<VertexId> added;
    std::vector<VertexId> removed;
    UpdateStats stats;
};

/// apply_edge_batch + batch_walk_update + merge when the policy fires.
UpdateResult apply_update(Corpus const& c, EdgeBatch const& batch, MergePolicy policy, unsigned threads = 1);

}  // namespace wharf
