#include <wharf/corpus.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <wharf/parallel.hpp>

namespace wharf {

void CorpusConfig::validate() const
{
    if (walks_per_vertex == 0 || length == 0) {
        throw ContractError("walks per vertex and walk length must be at least 1");
    }
    model.validate();
}

void CorpusConfig::check_capacity(std::uint64_t walk_ids) const
{
    if (walk_ids == 0) {
        return;
    }
    // (walk_ids - 1) * l + l - 1 must stay below 2^32
    if (walk_ids > kOperandLimit / length) {
        throw OverflowError("corpus of " + std::to_string(walk_ids) + " walks of length " +
                            std::to_string(length) + " exceeds the 32-bit walk/position budget");
    }
}

// ---------------------------------------------------------------------------

WalkId WalkRoster::add(VertexId start)
{
    if (start_.size() >= kOperandLimit) {
        throw OverflowError("walk ids exhausted");
    }
    auto const w = static_cast<WalkId>(start_.size());
    start_.push_back(start);
    live_.push_back(1);
    rooted_[start].push_back(w);
    ++live_count_;
    return w;
}

void WalkRoster::retire(WalkId w)
{
    if (!live(w)) {
        throw NotFoundError("walk " + std::to_string(w) + " is not live");
    }
    live_[w] = 0;
    --live_count_;
    auto it = rooted_.find(start_[w]);
    auto& ws = it->second;
    ws.erase(std::find(ws.begin(), ws.end(), w));
    if (ws.empty()) {
        rooted_.erase(it);
    }
}

VertexId WalkRoster::start(WalkId w) const
{
    if (w >= start_.size()) {
        throw NotFoundError("unknown walk " + std::to_string(w));
    }
    return start_[w];
}

std::vector<WalkId> WalkRoster::rooted(VertexId v) const
{
    auto it = rooted_.find(v);
    return it == rooted_.end() ? std::vector<WalkId>{} : it->second;
}

// ---------------------------------------------------------------------------

void InsertionAccumulator::add_walk(WalkId w, std::span<const VertexId> path, std::uint32_t from)
{
    auto const l = static_cast<std::uint32_t>(path.size());
    for (std::uint32_t p = from; p < l; ++p) {
        VertexId const next = p + 1 < l ? path[p + 1] : path[p];
        items_.emplace_back(path[p], encode_triplet({w, p, next}, l).value);
    }
}

void InsertionAccumulator::append(InsertionAccumulator&& other)
{
    if (items_.empty()) {
        items_ = std::move(other.items_);
    } else {
        items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    }
    other.items_.clear();
}

std::vector<VertexTriplets> InsertionAccumulator::take_groups()
{
    std::sort(items_.begin(), items_.end());
    std::vector<VertexTriplets> groups;
    for (std::size_t i = 0; i < items_.size();) {
        VertexTriplets g;
        g.vertex = items_[i].first;
        while (i < items_.size() && items_[i].first == g.vertex) {
            if (!g.triplets.empty() && g.triplets.back() == items_[i].second) {
                throw CorruptionError("duplicate walk triplet under vertex " + std::to_string(g.vertex));
            }
            g.triplets.push_back(items_[i].second);
            ++i;
        }
        groups.push_back(std::move(g));
    }
    items_.clear();
    items_.shrink_to_fit();
    return groups;
}

// ---------------------------------------------------------------------------

Corpus generate_corpus(GraphSnapshot const& graph, CorpusConfig const& cfg, unsigned threads)
{
    cfg.validate();
    std::vector<VertexId> const ids = graph.vertex_ids();
    if (ids.empty()) {
        throw ContractError("cannot generate walks on an empty graph");
    }
    std::uint64_t const walks = std::uint64_t{ids.size()} * cfg.walks_per_vertex;
    cfg.check_capacity(walks);

    Corpus c;
    c.config = cfg;
    for (VertexId v : ids) {
        for (std::uint32_t j = 0; j < cfg.walks_per_vertex; ++j) {
            c.roster.add(v);
        }
    }
    GraphSnapshot const bare = graph.without_walks();
    std::uint64_t const epoch = bare.epoch();

    std::vector<InsertionAccumulator> parts(block_count(walks, threads));
    parallel_blocks(walks, threads, [&](std::size_t b, std::size_t e, unsigned worker) {
        InsertionAccumulator& acc = parts[worker];
        acc.reserve((e - b) * cfg.length);
        std::vector<VertexId> path;
        for (std::size_t i = b; i < e; ++i) {
            auto const w = static_cast<WalkId>(i);
            path.assign(1, ids[i / cfg.walks_per_vertex]);
            extend_walk(cfg.model, bare, cfg.seed, w, epoch, cfg.length, path);
            acc.add_walk(w, path, 0);
        }
    });
    InsertionAccumulator all;
    for (auto& p : parts) {
        all.append(std::move(p));
    }
    auto const groups = all.take_groups();
    c.graph = bare.push_walk_versions(epoch, groups);
    return c;
}

Corpus corpus_from_walks(GraphSnapshot const& graph, CorpusConfig const& cfg,
                         std::span<const std::vector<VertexId>> walks)
{
    cfg.validate();
    cfg.check_capacity(walks.size());
    Corpus c;
    c.config = cfg;
    InsertionAccumulator acc;
    for (auto const& path : walks) {
        if (path.size() != cfg.length) {
            throw ContractError("walk length differs from the configured length");
        }
        WalkId const w = c.roster.add(path.front());
        acc.add_walk(w, path, 0);
    }
    GraphSnapshot const bare = graph.without_walks();
    c.graph = bare.push_walk_versions(bare.epoch(), acc.take_groups());
    return c;
}

std::optional<SearchRange> search_range(VertexEntry const& v, WalkId w, std::uint32_t p, std::uint32_t l)
{
    if (!v.has_bounds()) {
        return std::nullopt;
    }
    std::uint64_t const f = walk_key(w, p, l);
    return SearchRange{szudzik_pair(f, v.next_min), szudzik_pair(f, v.next_max)};
}

std::optional<VertexId> find_next(GraphSnapshot const& g, VertexId v, WalkId w, std::uint32_t p,
                                  std::uint32_t l, RewriteLog const& log, FindStats* stats)
{
    if (p >= l) {
        throw ContractError("find_next: position beyond walk length");
    }
    VertexEntry const& e = g.at(v);
    if (stats) {
        ++stats->queries;
    }
    auto const range = search_range(e, w, p, l);
    if (!range) {
        return std::nullopt;
    }
    std::uint64_t const f = walk_key(w, p, l);
    for (auto it = e.walks.rbegin(); it != e.walks.rend(); ++it) {
        if (!log.valid(w, p, it->epoch)) {
            continue;
        }
        std::optional<VertexId> hit;
        std::size_t in_range = 0;
        std::size_t const decoded = it->tree.range_iterate(range->lb, range->ub, [&](std::uint64_t x) {
            ++in_range;
            auto const [key, next] = szudzik_unpair(x);
            if (key == f) {
                hit = static_cast<VertexId>(next);
            }
        });
        if (stats) {
            ++stats->versions_searched;
            stats->decoded += decoded;
            stats->in_range += in_range;
        }
        if (hit) {
            return hit;
        }
    }
    return std::nullopt;
}

std::vector<VertexId> reconstruct_walk(Corpus const& c, WalkId w, std::uint32_t count)
{
    std::uint32_t const l = c.config.length;
    if (count == 0 || count > l) {
        count = l;
    }
    if (!c.roster.live(w)) {
        throw NotFoundError("walk " + std::to_string(w) + " is not live");
    }
    std::vector<VertexId> path{c.roster.start(w)};
    path.reserve(count);
    auto broken = [&](std::uint32_t p) {
        return CorruptionError("walk " + std::to_string(w) + " broken at position " + std::to_string(p));
    };
    for (std::uint32_t p = 0; p + 1 < count; ++p) {
        auto const next = c.graph.has_vertex(path.back())
                              ? find_next(c.graph, path.back(), w, p, l, c.log)
                              : std::nullopt;
        if (!next) {
            throw broken(p);
        }
        path.push_back(*next);
    }
    if (count == l) {
        auto const last = find_next(c.graph, path.back(), w, l - 1, l, c.log);
        if (last != path.back()) {
            throw broken(l - 1);
        }
    }
    return path;
}

std::vector<std::vector<VertexId>> materialize_walks(Corpus const& c)
{
    std::uint32_t const l = c.config.length;
    std::size_t const n = c.roster.id_count();
    // owner and next vertex per (walk, position)
    std::vector<VertexId> owner(n * l);
    std::vector<VertexId> next(n * l);
    std::vector<std::uint8_t> seen(n * l, 0);
    c.graph.for_each_vertex([&](VertexEntry const& e) {
        for (auto const& ver : e.walks) {
            ver.tree.iterate([&](std::uint64_t x) {
                WalkTriplet const t = decode_triplet(EncodedTriplet{x}, l);
                if (t.walk >= n || !c.roster.live(t.walk) || !c.log.valid(t.walk, t.position, ver.epoch)) {
                    return;
                }
                std::size_t const k = std::size_t{t.walk} * l + t.position;
                if (seen[k]) {
                    throw CorruptionError("walk " + std::to_string(t.walk) + " has two valid triplets at position " +
                                          std::to_string(t.position));
                }
                seen[k] = 1;
                owner[k] = e.id;
                next[k] = t.next;
            });
        }
    });
    std::vector<std::vector<VertexId>> walks(n);
    for (WalkId w = 0; w < n; ++w) {
        if (!c.roster.live(w)) {
            continue;
        }
        std::size_t const base = std::size_t{w} * l;
        for (std::uint32_t p = 0; p < l; ++p) {
            VertexId const expect = p + 1 < l ? owner[base + p + 1] : owner[base + p];
            bool const ok = seen[base + p] && (p + 1 == l || seen[base + p + 1]) && next[base + p] == expect &&
                            (p > 0 || owner[base] == c.roster.start(w));
            if (!ok) {
                throw CorruptionError("walk " + std::to_string(w) + " broken at position " + std::to_string(p));
            }
        }
        walks[w].assign(owner.begin() + static_cast<std::ptrdiff_t>(base),
                        owner.begin() + static_cast<std::ptrdiff_t>(base + l));
    }
    return walks;
}

void dump_corpus(std::ostream& out, Corpus const& c)
{
    auto const walks = materialize_walks(c);
    for (WalkId w = 0; w < walks.size(); ++w) {
        if (walks[w].empty()) {
            continue;
        }
        out << w << ':';
        for (VertexId v : walks[w]) {
            out << ' ' << v;
        }
        out << '\n';
    }
}

std::vector<std::pair<WalkId, std::vector<VertexId>>> parse_corpus_dump(std::istream& in, std::string const& source)
{
    std::vector<std::pair<WalkId, std::vector<VertexId>>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto const colon = line.find(':');
        if (colon == std::string::npos) {
            throw ParseError(source, lineno, "expected `walk_id: v0 v1 ...`");
        }
        std::istringstream head(line.substr(0, colon));
        std::uint64_t w = 0;
        std::string extra;
        if (!(head >> w) || (head >> extra) || w >= kOperandLimit) {
            throw ParseError(source, lineno, "bad walk id");
        }
        std::istringstream body(line.substr(colon + 1));
        std::vector<VertexId> path;
        std::string tok;
        while (body >> tok) {
            if (tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 10 ||
                std::stoull(tok) >= kOperandLimit) {
                throw ParseError(source, lineno, "bad vertex id `" + tok + "`");
            }
            path.push_back(static_cast<VertexId>(std::stoull(tok)));
        }
        out.emplace_back(static_cast<WalkId>(w), std::move(path));
    }
    return out;
}

}  // namespace wharf
