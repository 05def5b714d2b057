#include <wharf/updater.hpp>

#include <algorithm>
#include <chrono>

#include <json.hpp>

#include <wharf/parallel.hpp>

namespace wharf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

MergePolicy MergePolicy::parse(std::string const& s)
{
    if (s == "on-demand") {
        return {MergeKind::on_demand, 1};
    }
    if (s == "eager") {
        return {MergeKind::eager, 1};
    }
    if (s.rfind("every:", 0) == 0) {
        std::string const digits = s.substr(6);
        if (!digits.empty() && digits.size() <= 9 && digits.find_first_not_of("0123456789") == std::string::npos) {
            auto const k = static_cast<std::uint32_t>(std::stoul(digits));
            if (k >= 1) {
                return {MergeKind::every_k, k};
            }
        }
    }
    throw ContractError("merge policy must be on-demand, eager or every:k with k >= 1, got `" + s + "`");
}

std::string MergePolicy::name() const
{
    switch (kind) {
    case MergeKind::on_demand: return "on-demand";
    case MergeKind::eager: return "eager";
    case MergeKind::every_k: return "every:" + std::to_string(k);
    }
    return "?";
}

bool MergePolicy::fires(std::uint64_t epoch) const noexcept
{
    switch (kind) {
    case MergeKind::on_demand: return false;
    case MergeKind::eager: return true;
    case MergeKind::every_k: return epoch % k == 0;
    }
    return false;
}

std::string UpdateStats::to_json_line() const
{
    nlohmann::json j{
        {"epoch", epoch},
        {"affected_walks", affected_walks},
        {"inserted", inserted},
        {"fresh_walks", fresh_walks},
        {"fresh_triplets", fresh_triplets},
        {"retired_walks", retired_walks},
        {"skipped_retired", skipped_retired},
        {"dead_ends", dead_ends},
        {"triplets_scanned", triplets_scanned},
        {"pmin_histogram", pmin_histogram},
        {"merged", merged},
        {"mav_seconds", mav_seconds},
        {"sample_seconds", sample_seconds},
        {"insert_seconds", insert_seconds},
        {"merge_seconds", merge_seconds},
        {"wall_seconds", total_seconds},
        {"peak_walk_bytes", peak_walk_bytes},
        {"walk_bytes", walk_bytes},
    };
    return j.dump();
}

CorpusReport corpus_stats(Mav const& mav, std::uint32_t walk_length)
{
    CorpusReport r;
    r.pmin_histogram.assign(walk_length, 0);
    for (auto const& [w, a] : mav) {
        if (a.position >= walk_length) {
            throw ContractError("MAV position beyond walk length");
        }
        ++r.pmin_histogram[a.position];
        ++r.affected_walks;
        r.inserted += walk_length - a.position;
    }
    return r;
}

Corpus batch_walk_update(Corpus c, Mav const& mav, std::span<const VertexId> added,
                         std::span<const VertexId> removed, UpdateStats& stats, unsigned threads)
{
    auto const t0 = Clock::now();
    CorpusConfig const cfg = c.config;
    std::uint32_t const l = cfg.length;
    std::uint64_t const epoch = c.graph.epoch();
    stats.epoch = epoch;
    stats.pmin_histogram.assign(l, 0);

    for (VertexId v : removed) {
        for (WalkId w : c.roster.rooted(v)) {
            c.roster.retire(w);
            c.log.record(w, epoch, 0);
            ++stats.retired_walks;
        }
    }

    std::vector<std::pair<WalkId, Affected>> work;
    work.reserve(mav.size());
    for (auto const& [w, a] : mav) {
        if (!c.roster.live(w)) {
            ++stats.skipped_retired;
            continue;
        }
        work.emplace_back(w, a);
        ++stats.pmin_histogram[a.position];
        stats.inserted += l - a.position;
    }
    stats.affected_walks = work.size();

    // Walks for new vertices take fresh ids after every existing one.
    std::vector<std::pair<WalkId, VertexId>> fresh;
    for (VertexId v : added) {
        for (std::uint32_t j = 0; j < cfg.walks_per_vertex; ++j) {
            fresh.emplace_back(c.roster.next_id(), v);
            c.roster.add(v);
        }
    }
    cfg.check_capacity(c.roster.id_count());

    // This batch's cuts enter the log only after sampling, so prefixes read the pre-update walks.
    std::size_t const jobs = work.size() + fresh.size();
    unsigned const blocks = block_count(jobs, threads);
    std::vector<InsertionAccumulator> parts(blocks);
    std::vector<std::size_t> dead(blocks, 0);
    parallel_blocks(jobs, threads, [&](std::size_t b, std::size_t e, unsigned worker) {
        std::vector<VertexId> path;
        for (std::size_t i = b; i < e; ++i) {
            WalkId w = 0;
            std::uint32_t from = 0;
            if (i < work.size()) {
                auto const& [ww, a] = work[i];
                w = ww;
                from = a.position;
                path.assign(from + 1, a.vertex);
                if (cfg.model.order() == 2 && from > 0) {
                    // only the vertex before p_min matters to the sampler
                    path[from - 1] = reconstruct_walk(c, w, from).back();
                }
            } else {
                auto const& [ww, v] = fresh[i - work.size()];
                w = ww;
                path.assign(1, v);
            }
            bool dead_end = false;
            extend_walk(cfg.model, c.graph, cfg.seed, w, epoch, l, path, &dead_end);
            dead[worker] += dead_end ? 1 : 0;
            parts[worker].add_walk(w, path, from);
        }
    });
    for (std::size_t d : dead) {
        stats.dead_ends += d;
    }
    stats.fresh_walks = fresh.size();
    stats.fresh_triplets = fresh.size() * l;
    stats.sample_seconds = seconds_since(t0);

    auto const t1 = Clock::now();
    for (auto const& [w, a] : work) {
        c.log.record(w, epoch, a.position);
    }
    InsertionAccumulator all;
    for (auto& p : parts) {
        all.append(std::move(p));
    }
    c.graph = c.graph.push_walk_versions(epoch, all.take_groups());
    stats.insert_seconds = seconds_since(t1);
    return c;
}

Corpus merge_corpus(Corpus const& c, unsigned threads)
{
    std::uint32_t const l = c.config.length;
    std::vector<VertexEntry const*> entries;
    entries.reserve(c.graph.vertex_count());
    c.graph.for_each_vertex([&](VertexEntry const& e) { entries.push_back(&e); });

    unsigned const blocks = block_count(entries.size(), threads);
    std::vector<std::vector<VertexEntryPtr>> replaced(blocks);
    parallel_blocks(entries.size(), threads, [&](std::size_t b, std::size_t e, unsigned worker) {
        std::vector<std::uint64_t> keep;
        for (std::size_t i = b; i < e; ++i) {
            VertexEntry const& v = *entries[i];
            if (v.walks.size() <= 1 && c.log.empty()) {
                continue;
            }
            keep.clear();
            std::uint64_t epoch = 0;
            bool dropped = false;
            for (auto const& ver : v.walks) {
                epoch = std::max(epoch, ver.epoch);
                ver.tree.iterate([&](std::uint64_t x) {
                    WalkTriplet const t = decode_triplet(EncodedTriplet{x}, l);
                    if (c.roster.live(t.walk) && c.log.valid(t.walk, t.position, ver.epoch)) {
                        keep.push_back(x);
                    } else {
                        dropped = true;
                    }
                });
            }
            if (v.walks.size() == 1 && !dropped) {
                VertexEntry tight;
                widen_bounds(tight, keep);
                if (tight.next_min == v.next_min && tight.next_max == v.next_max) {
                    continue;
                }
            }
            auto fresh = std::make_shared<VertexEntry>();
            fresh->id = v.id;
            fresh->edges = v.edges;
            if (!keep.empty()) {
                if (v.walks.size() > 1) {
                    std::sort(keep.begin(), keep.end());
                }
                fresh->walks.push_back(WalkVersion{epoch, CTree::build(keep, c.graph.walk_params())});
                widen_bounds(*fresh, keep);
            }
            replaced[worker].push_back(std::move(fresh));
        }
    });
    std::vector<VertexEntryPtr> all;
    for (auto& r : replaced) {
        all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    Corpus out = c;
    out.graph = c.graph.with_entries(all, {}, c.graph.epoch());
    out.log.clear();
    return out;
}

UpdateResult apply_update(Corpus const& c, EdgeBatch const& batch, MergePolicy policy, unsigned threads)
{
    auto const t0 = Clock::now();
    UpdateResult r;
    BatchApplication app = apply_edge_batch(c.graph, batch, {c.config.length, &c.log});
    r.stats.mav_seconds = seconds_since(t0);
    r.stats.triplets_scanned = app.triplets_scanned;

    Corpus staged = c;
    staged.graph = std::move(app.graph);
    r.corpus = batch_walk_update(std::move(staged), app.mav, app.added, app.removed, r.stats, threads);
    r.mav = std::move(app.mav);
    r.added = std::move(app.added);
    r.removed = std::move(app.removed);
    double const update_seconds = seconds_since(t0);
    // byte accounting is excluded from the timings
    r.stats.peak_walk_bytes = r.corpus.graph.walk_store_bytes();
    r.stats.walk_bytes = r.stats.peak_walk_bytes;
    if (policy.fires(r.corpus.graph.epoch())) {
        auto const t1 = Clock::now();
        r.corpus = merge_corpus(r.corpus, threads);
        r.stats.merge_seconds = seconds_since(t1);
        r.stats.merged = true;
        r.stats.walk_bytes = r.corpus.graph.walk_store_bytes();
    }
    r.stats.total_seconds = update_seconds + r.stats.merge_seconds;
    return r;
}

}  // namespace wharf
