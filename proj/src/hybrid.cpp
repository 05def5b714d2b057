#include <wharf/hybrid.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace wharf {

std::size_t VertexEntry::triplet_count() const noexcept
{
    std::size_t n = 0;
    for (auto const& v : walks) {
        n += v.tree.size();
    }
    return n;
}

void widen_bounds(VertexEntry& e, std::span<const std::uint64_t> triplets)
{
    for (std::uint64_t t : triplets) {
        auto const next = static_cast<VertexId>(szudzik_unpair(t).second);
        e.next_min = std::min(e.next_min, next);
        e.next_max = std::max(e.next_max, next);
    }
}

GraphSnapshot GraphSnapshot::from_edges(std::span<const std::pair<VertexId, VertexId>> edges,
                                        ChunkParams edge_params, ChunkParams walk_params)
{
    std::vector<std::pair<VertexId, VertexId>> directed;
    directed.reserve(edges.size() * 2);
    for (auto const& [a, b] : edges) {
        if (a == b) {
            throw ContractError("self-loop on vertex " + std::to_string(a));
        }
        directed.emplace_back(a, b);
        directed.emplace_back(b, a);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    std::vector<VertexEntryPtr> entries;
    std::vector<std::uint64_t> nbrs;
    for (std::size_t i = 0; i < directed.size();) {
        VertexId const v = directed[i].first;
        nbrs.clear();
        while (i < directed.size() && directed[i].first == v) {
            nbrs.push_back(directed[i].second);
            ++i;
        }
        auto e = std::make_shared<VertexEntry>();
        e->id = v;
        e->edges = CTree::build(nbrs, edge_params);
        entries.push_back(std::move(e));
    }
    GraphSnapshot g(edge_params, walk_params);
    g.root_ = Tree::build(entries);
    return g;
}

VertexEntry const* GraphSnapshot::find(VertexId v) const noexcept
{
    VertexEntryPtr const* e = Tree::find(root_, v);
    return e ? e->get() : nullptr;
}

VertexEntry const& GraphSnapshot::at(VertexId v) const
{
    VertexEntry const* e = find(v);
    if (e == nullptr) {
        throw NotFoundError("vertex " + std::to_string(v) + " not in graph");
    }
    return *e;
}

std::vector<VertexId> GraphSnapshot::neighbors(VertexId v) const
{
    std::vector<VertexId> out;
    VertexEntry const& e = at(v);
    out.reserve(e.degree());
    e.edges.iterate([&](std::uint64_t x) { out.push_back(static_cast<VertexId>(x)); });
    return out;
}

TreeAdjacency GraphSnapshot::adjacency(VertexId v) const noexcept
{
    VertexEntry const* e = find(v);
    return TreeAdjacency(e ? &e->edges : nullptr);
}

bool GraphSnapshot::has_edge(VertexId a, VertexId b) const
{
    VertexEntry const* e = find(a);
    return e != nullptr && e->edges.contains(b);
}

std::vector<VertexId> GraphSnapshot::vertex_ids() const
{
    std::vector<VertexId> ids;
    ids.reserve(vertex_count());
    for_each_vertex([&](VertexEntry const& e) { ids.push_back(e.id); });
    return ids;
}

GraphSnapshot GraphSnapshot::push_walk_versions(std::uint64_t epoch,
                                                std::span<const VertexTriplets> groups) const
{
    std::vector<VertexEntryPtr> replaced;
    replaced.reserve(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        auto const& g = groups[i];
        if (i > 0 && g.vertex <= groups[i - 1].vertex) {
            throw ContractError("push_walk_versions: groups not sorted by vertex");
        }
        if (g.triplets.empty()) {
            continue;
        }
        VertexEntry const& old = at(g.vertex);
        auto e = std::make_shared<VertexEntry>(old);
        if (!e->walks.empty() && e->walks.back().epoch > epoch) {
            throw ContractError("walk version epochs must not decrease");
        }
        if (!e->walks.empty() && e->walks.back().epoch == epoch) {
            e->walks.back().tree = e->walks.back().tree.multi_insert(g.triplets);
        } else {
            e->walks.push_back(WalkVersion{epoch, CTree::build(g.triplets, walk_params_)});
        }
        widen_bounds(*e, g.triplets);
        replaced.push_back(std::move(e));
    }
    return with_entries(replaced, {}, epoch_);
}

GraphSnapshot GraphSnapshot::push_walk_version(VertexId v, std::uint64_t epoch,
                                               std::span<const std::uint64_t> triplets) const
{
    VertexTriplets g{v, {triplets.begin(), triplets.end()}};
    return push_walk_versions(epoch, std::span<const VertexTriplets>(&g, 1));
}

GraphSnapshot GraphSnapshot::with_entries(std::span<const VertexEntryPtr> replace,
                                          std::span<const VertexId> remove, std::uint64_t epoch) const
{
    GraphSnapshot g = *this;
    g.epoch_ = epoch;
    if (!replace.empty()) {
        g.root_ = Tree::union_with(g.root_, Tree::build(replace));
    }
    if (!remove.empty()) {
        g.root_ = Tree::difference(g.root_, remove);
    }
    return g;
}

GraphSnapshot GraphSnapshot::with_epoch(std::uint64_t epoch) const
{
    GraphSnapshot g = *this;
    g.epoch_ = epoch;
    return g;
}

GraphSnapshot GraphSnapshot::without_walks() const
{
    std::vector<VertexEntryPtr> entries;
    entries.reserve(vertex_count());
    Tree::for_each(root_, [&](VertexEntryPtr const& e) {
        auto bare = std::make_shared<VertexEntry>();
        bare->id = e->id;
        bare->edges = e->edges;
        entries.push_back(std::move(bare));
    });
    GraphSnapshot g(edge_params_, walk_params_);
    g.root_ = Tree::build(entries);
    g.epoch_ = epoch_;
    return g;
}

std::size_t GraphSnapshot::walk_store_bytes() const
{
    std::size_t bytes = 0;
    for_each_vertex([&](VertexEntry const& e) {
        for (auto const& v : e.walks) {
            bytes += v.tree.payload_bytes();
        }
    });
    return bytes;
}

std::size_t GraphSnapshot::edge_store_bytes() const
{
    std::size_t bytes = 0;
    for_each_vertex([&](VertexEntry const& e) { bytes += e.edges.payload_bytes(); });
    return bytes;
}

std::size_t GraphSnapshot::triplet_count() const
{
    std::size_t n = 0;
    for_each_vertex([&](VertexEntry const& e) { n += e.triplet_count(); });
    return n;
}

std::size_t GraphSnapshot::max_walk_versions() const
{
    std::size_t n = 0;
    for_each_vertex([&](VertexEntry const& e) { n = std::max(n, e.walks.size()); });
    return n;
}

// ---------------------------------------------------------------------------

std::vector<VertexId> NormalizedBatch::endpoints() const
{
    std::vector<VertexId> out;
    out.reserve(2 * (inserts.size() + removes.size()));
    for (auto const& [a, b] : inserts) {
        out.push_back(a);
        out.push_back(b);
    }
    for (auto const& [a, b] : removes) {
        out.push_back(a);
        out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

std::string describe(EdgeUpdate const& u)
{
    return std::string(u.op == EdgeOp::insert ? "+ " : "- ") + std::to_string(u.src) + " " +
           std::to_string(u.dst);
}

std::string join_errors(std::vector<OpError> const& errors)
{
    std::ostringstream os;
    os << "edge batch rejected (" << errors.size() << " bad op" << (errors.size() == 1 ? "" : "s") << ")";
    for (std::size_t i = 0; i < errors.size() && i < 5; ++i) {
        os << "; op " << errors[i].index << " `" << describe(errors[i].op) << "`: " << errors[i].reason;
    }
    return os.str();
}

}  // namespace

BatchError::BatchError(std::vector<OpError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors))
{}

NormalizedBatch normalize_batch(EdgeBatch const& batch, GraphSnapshot const& graph)
{
    return normalize_batch(batch, [&](VertexId a, VertexId b) { return graph.has_edge(a, b); });
}

NormalizedBatch normalize_batch(EdgeBatch const& batch, std::function<bool(VertexId, VertexId)> const& has_edge)
{
    std::vector<OpError> errors;
    // canonical edge -> (op, first index)
    std::map<std::pair<VertexId, VertexId>, std::pair<EdgeOp, std::size_t>> seen;
    for (std::size_t i = 0; i < batch.ops.size(); ++i) {
        EdgeUpdate const& u = batch.ops[i];
        if (u.src == u.dst) {
            errors.push_back({i, u, "self-loop"});
            continue;
        }
        auto const key = std::minmax(u.src, u.dst);
        auto [it, inserted] = seen.try_emplace({key.first, key.second}, u.op, i);
        if (!inserted && it->second.first != u.op) {
            errors.push_back({i, u, "edge both inserted and deleted in one batch"});
        }
    }
    NormalizedBatch out;
    for (auto const& [edge, info] : seen) {
        auto const& [op, index] = info;
        bool const present = has_edge(edge.first, edge.second);
        if (op == EdgeOp::insert) {
            if (present) {
                errors.push_back({index, batch.ops[index], "edge already present"});
            }
            out.inserts.push_back(edge);
        } else {
            if (!present) {
                errors.push_back({index, batch.ops[index], "edge not present"});
            }
            out.removes.push_back(edge);
        }
    }
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end(),
                  [](OpError const& a, OpError const& b) { return a.index < b.index; });
        throw BatchError(std::move(errors));
    }
    return out;
}

namespace {

std::string strip_comment(std::string const& line, char const* markers)
{
    auto const cut = line.find_first_of(markers);
    return cut == std::string::npos ? line : line.substr(0, cut);
}

bool parse_id(std::string const& tok, VertexId& out)
{
    if (tok.empty() || tok.size() > 10) {
        return false;
    }
    std::uint64_t v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') {
            return false;
        }
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (v >= kOperandLimit) {
        return false;
    }
    out = static_cast<VertexId>(v);
    return true;
}

}  // namespace

EdgeBatch parse_batch(std::istream& in, std::string const& source)
{
    EdgeBatch batch;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line, "#"));
        std::string op;
        std::string a;
        std::string b;
        std::string extra;
        if (!(ls >> op)) {
            continue;
        }
        if (op != "+" && op != "-") {
            throw ParseError(source, lineno, "expected `+` or `-`, got `" + op + "`");
        }
        EdgeUpdate u;
        u.op = op == "+" ? EdgeOp::insert : EdgeOp::remove;
        if (!(ls >> a >> b) || !parse_id(a, u.src) || !parse_id(b, u.dst)) {
            throw ParseError(source, lineno, "expected two decimal vertex ids below 2^32");
        }
        if (ls >> extra) {
            throw ParseError(source, lineno, "unexpected token `" + extra + "`");
        }
        batch.ops.push_back(u);
    }
    return batch;
}

EdgeBatch read_batch_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw NotFoundError("cannot open batch file " + path);
    }
    return parse_batch(in, path);
}

void write_batch(std::ostream& out, EdgeBatch const& batch)
{
    for (auto const& u : batch.ops) {
        out << (u.op == EdgeOp::insert ? '+' : '-') << ' ' << u.src << ' ' << u.dst << '\n';
    }
}

std::vector<std::pair<VertexId, VertexId>> parse_edge_list(std::istream& in, std::string const& source)
{
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line, "#%"));
        std::string a;
        std::string b;
        if (!(ls >> a)) {
            continue;
        }
        VertexId s = 0;
        VertexId d = 0;
        if (!(ls >> b) || !parse_id(a, s) || !parse_id(b, d)) {
            throw ParseError(source, lineno, "expected `src dst` decimal vertex ids below 2^32");
        }
        edges.emplace_back(s, d);
    }
    return edges;
}

std::vector<std::pair<VertexId, VertexId>> read_edge_list(std::string const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw NotFoundError("cannot open edge list " + path);
    }
    return parse_edge_list(in, path);
}

// ---------------------------------------------------------------------------

std::size_t collect_affected(VertexEntry const& v, MavContext ctx, MavBuilder& mav)
{
    std::size_t scanned = 0;
    for (auto const& version : v.walks) {
        version.tree.iterate([&](std::uint64_t enc) {
            ++scanned;
            WalkTriplet const t = decode_triplet(EncodedTriplet{enc}, ctx.walk_length);
            if (ctx.log == nullptr || ctx.log->valid(t.walk, t.position, version.epoch)) {
                mav.offer(t.walk, v.id, t.position);
            }
        });
    }
    return scanned;
}

BatchApplication apply_edge_batch(GraphSnapshot const& graph, EdgeBatch const& batch, MavContext ctx)
{
    NormalizedBatch const nb = normalize_batch(batch, graph);
    BatchApplication out;
    std::uint64_t const epoch = graph.epoch() + 1;
    if (nb.empty()) {
        out.graph = graph.with_epoch(epoch);
        return out;
    }

    std::vector<VertexId> const endpoints = nb.endpoints();
    if (ctx.walk_length > 0) {
        MavBuilder mav;
        for (VertexId v : endpoints) {
            if (VertexEntry const* e = graph.find(v)) {
                out.triplets_scanned += collect_affected(*e, ctx, mav);
            }
        }
        out.mav = mav.build();
    }

    // Per-endpoint adjacency deltas, both directions.
    std::map<VertexId, std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>>> delta;
    for (auto const& [a, b] : nb.inserts) {
        delta[a].first.push_back(b);
        delta[b].first.push_back(a);
    }
    for (auto const& [a, b] : nb.removes) {
        delta[a].second.push_back(b);
        delta[b].second.push_back(a);
    }

    std::vector<VertexEntryPtr> replaced;
    for (auto& [v, d] : delta) {
        auto& [ins, del] = d;
        std::sort(ins.begin(), ins.end());
        std::sort(del.begin(), del.end());
        VertexEntry const* old = graph.find(v);
        auto e = old ? std::make_shared<VertexEntry>(*old) : std::make_shared<VertexEntry>();
        if (!old) {
            e->id = v;
            e->edges = CTree(graph.edge_params());
            out.added.push_back(v);
        }
        e->edges = e->edges.multi_delete(del).multi_insert(ins);
        if (e->edges.empty()) {
            if (old) {
                out.removed.push_back(v);
            }
            continue;
        }
        replaced.push_back(std::move(e));
    }
    // A vertex created and emptied within one batch cannot happen: that would need
    // insert and delete of the same edge, which normalize_batch rejects.
    out.graph = graph.with_entries(replaced, out.removed, epoch);
    return out;
}

}  // namespace wharf
