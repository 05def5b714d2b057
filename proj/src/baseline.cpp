#include <wharf/baseline.hpp>

#include <chrono>
#include <map>

#include <wharf/parallel.hpp>

namespace wharf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<VertexId> distinct(std::span<const VertexId> xs)
{
    std::vector<VertexId> out(xs.begin(), xs.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

AdjacencyGraph::AdjacencyGraph(std::span<const std::pair<VertexId, VertexId>> edges)
{
    for (auto const& [a, b] : edges) {
        if (a == b) {
            throw ContractError("self-loop on vertex " + std::to_string(a));
        }
        adj_[a].push_back(b);
        adj_[b].push_back(a);
    }
    for (auto& [v, ns] : adj_) {
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        directed_ += ns.size();
    }
}

SortedAdjacency AdjacencyGraph::adjacency(VertexId v) const noexcept
{
    auto it = adj_.find(v);
    return SortedAdjacency(it == adj_.end() ? nullptr : &it->second);
}

std::vector<VertexId> AdjacencyGraph::vertex_ids() const
{
    std::vector<VertexId> ids;
    ids.reserve(adj_.size());
    for (auto const& kv : adj_) {
        ids.push_back(kv.first);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

AdjacencyGraph::Delta AdjacencyGraph::apply(NormalizedBatch const& b)
{
    Delta d;
    std::map<VertexId, bool> touched;  // vertex -> existed before
    auto touch = [&](VertexId v) { touched.try_emplace(v, adj_.count(v) != 0); };
    for (auto const& [x, y] : b.removes) {
        touch(x);
        touch(y);
        auto drop = [&](VertexId u, VertexId v) {
            auto& ns = adj_[u];
            ns.erase(std::lower_bound(ns.begin(), ns.end(), v));
            --directed_;
        };
        drop(x, y);
        drop(y, x);
    }
    for (auto const& [x, y] : b.inserts) {
        touch(x);
        touch(y);
        auto add = [&](VertexId u, VertexId v) {
            auto& ns = adj_[u];
            ns.insert(std::lower_bound(ns.begin(), ns.end(), v), v);
            ++directed_;
        };
        add(x, y);
        add(y, x);
    }
    for (auto const& [v, existed] : touched) {
        bool const now = !adj_[v].empty();
        if (!now) {
            adj_.erase(v);
        }
        if (existed && !now) {
            d.removed.push_back(v);
        } else if (!existed && now) {
            d.added.push_back(v);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------

IIEngine::IIEngine(std::span<const std::pair<VertexId, VertexId>> edges, CorpusConfig cfg, unsigned threads)
    : cfg_(cfg), threads_(threads), graph_(edges)
{
    cfg_.validate();
    std::vector<VertexId> const ids = graph_.vertex_ids();
    std::uint64_t const n = std::uint64_t{ids.size()} * cfg_.walks_per_vertex;
    cfg_.check_capacity(n);
    for (VertexId v : ids) {
        for (std::uint32_t j = 0; j < cfg_.walks_per_vertex; ++j) {
            roster_.add(v);
        }
    }
    walks_.resize(n);
    parallel_blocks(n, threads_, [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t i = b; i < e; ++i) {
            auto& path = walks_[i];
            path.assign(1, ids[i / cfg_.walks_per_vertex]);
            extend_walk(cfg_.model, graph_, cfg_.seed, static_cast<WalkId>(i), epoch_, cfg_.length, path);
        }
    });
    for (WalkId w = 0; w < n; ++w) {
        for (VertexId v : distinct(walks_[w])) {
            index_add(v, w);
        }
    }
}

std::vector<WalkId> const* IIEngine::index(VertexId v) const
{
    auto it = index_.find(v);
    return it == index_.end() ? nullptr : &it->second;
}

void IIEngine::index_add(VertexId v, WalkId w)
{
    auto& ws = index_[v];
    auto it = std::lower_bound(ws.begin(), ws.end(), w);
    if (it == ws.end() || *it != w) {
        ws.insert(it, w);
        ++index_entries_;
    }
}

void IIEngine::index_remove(VertexId v, WalkId w)
{
    auto found = index_.find(v);
    if (found == index_.end()) {
        return;
    }
    auto& ws = found->second;
    auto it = std::lower_bound(ws.begin(), ws.end(), w);
    if (it != ws.end() && *it == w) {
        ws.erase(it);
        --index_entries_;
    }
    if (ws.empty()) {
        index_.erase(found);
    }
}

void IIEngine::rewrite(WalkId w, std::vector<VertexId> path)
{
    auto const before = distinct(walks_[w]);
    auto const after = distinct(path);
    std::vector<VertexId> gone;
    std::vector<VertexId> came;
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(gone));
    std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(came));
    for (VertexId v : gone) {
        index_remove(v, w);
    }
    for (VertexId v : came) {
        index_add(v, w);
    }
    walks_[w] = std::move(path);
}

Mav IIEngine::compute_mav(NormalizedBatch const& b) const
{
    Mav mav;
    for (VertexId v : b.endpoints()) {
        auto const* ws = index(v);
        if (!ws) {
            continue;
        }
        for (WalkId w : *ws) {
            auto const& path = walks_[w];
            auto const p = static_cast<std::uint32_t>(std::find(path.begin(), path.end(), v) - path.begin());
            mav.offer(w, v, p);
        }
    }
    return mav;
}

IIUpdate IIEngine::apply_batch(EdgeBatch const& batch)
{
    auto const t0 = Clock::now();
    IIUpdate r;
    NormalizedBatch const nb = normalize_batch(batch, [&](VertexId a, VertexId b) { return graph_.has_edge(a, b); });
    r.mav = compute_mav(nb);
    r.stats.mav_seconds = seconds_since(t0);

    auto const t1 = Clock::now();
    auto delta = graph_.apply(nb);
    ++epoch_;
    std::uint32_t const l = cfg_.length;
    UpdateStats& st = r.stats;
    st.epoch = epoch_;
    st.pmin_histogram.assign(l, 0);

    for (VertexId v : delta.removed) {
        for (WalkId w : roster_.rooted(v)) {
            roster_.retire(w);
            rewrite(w, {});
            ++st.retired_walks;
        }
    }
    std::vector<std::pair<WalkId, Affected>> work;
    for (auto const& [w, a] : r.mav) {
        if (!roster_.live(w)) {
            ++st.skipped_retired;
            continue;
        }
        work.emplace_back(w, a);
        ++st.pmin_histogram[a.position];
        st.inserted += l - a.position;
    }
    st.affected_walks = work.size();
    std::vector<std::pair<WalkId, VertexId>> fresh;
    for (VertexId v : delta.added) {
        for (std::uint32_t j = 0; j < cfg_.walks_per_vertex; ++j) {
            fresh.emplace_back(roster_.next_id(), v);
            roster_.add(v);
        }
    }
    cfg_.check_capacity(roster_.id_count());
    walks_.resize(roster_.id_count());

    std::size_t const jobs = work.size() + fresh.size();
    std::vector<std::vector<VertexId>> paths(jobs);
    std::vector<std::size_t> dead(block_count(jobs, threads_), 0);
    parallel_blocks(jobs, threads_, [&](std::size_t b, std::size_t e, unsigned worker) {
        for (std::size_t i = b; i < e; ++i) {
            WalkId w = 0;
            auto& path = paths[i];
            if (i < work.size()) {
                w = work[i].first;
                auto const& old = walks_[w];
                path.assign(old.begin(), old.begin() + work[i].second.position + 1);
            } else {
                w = fresh[i - work.size()].first;
                path.assign(1, fresh[i - work.size()].second);
            }
            bool dead_end = false;
            extend_walk(cfg_.model, graph_, cfg_.seed, w, epoch_, l, path, &dead_end);
            dead[worker] += dead_end ? 1 : 0;
        }
    });
    st.sample_seconds = seconds_since(t1);

    auto const t2 = Clock::now();
    for (std::size_t i = 0; i < jobs; ++i) {
        WalkId const w = i < work.size() ? work[i].first : fresh[i - work.size()].first;
        rewrite(w, std::move(paths[i]));
    }
    for (std::size_t d : dead) {
        st.dead_ends += d;
    }
    st.fresh_walks = fresh.size();
    st.fresh_triplets = fresh.size() * l;
    st.insert_seconds = seconds_since(t2);
    st.total_seconds = seconds_since(t0);
    auto const mem = memory();
    st.peak_walk_bytes = st.walk_bytes = mem.walks_bytes + mem.index_bytes;
    r.added = std::move(delta.added);
    r.removed = std::move(delta.removed);
    return r;
}

IIMemory IIEngine::memory() const
{
    IIMemory m;
    m.walks_bytes = 8 * std::size_t{cfg_.length} * roster_.live_count();
    m.index_bytes = 8 * (index_.size() + index_entries_);
    m.graph_bytes = graph_.payload_bytes();
    return m;
}

void IIEngine::check_index() const
{
    std::size_t entries = 0;
    for (auto const& [v, ws] : index_) {
        if (ws.empty() || !std::is_sorted(ws.begin(), ws.end())) {
            throw CorruptionError("index set of vertex " + std::to_string(v) + " malformed");
        }
        for (WalkId w : ws) {
            auto const& path = walks_.at(w);
            if (std::find(path.begin(), path.end(), v) == path.end()) {
                throw CorruptionError("index lists walk " + std::to_string(w) + " under absent vertex " +
                                      std::to_string(v));
            }
        }
        entries += ws.size();
    }
    for (WalkId w = 0; w < walks_.size(); ++w) {
        if (walks_[w].empty() != !roster_.live(w)) {
            throw CorruptionError("walk table and roster disagree on walk " + std::to_string(w));
        }
        for (VertexId v : walks_[w]) {
            auto const* ws = index(v);
            if (!ws || !std::binary_search(ws->begin(), ws->end(), w)) {
                throw CorruptionError("walk " + std::to_string(w) + " missing from index of " + std::to_string(v));
            }
        }
    }
    if (entries != index_entries_) {
        throw CorruptionError("index entry count drifted");
    }
}

}  // namespace wharf
