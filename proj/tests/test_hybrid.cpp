#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <wharf/hybrid.hpp>

using namespace wharf;

namespace {

using Edges = std::vector<std::pair<VertexId, VertexId>>;
using Oracle = std::map<VertexId, std::set<VertexId>>;

std::vector<std::uint64_t> encode_all(std::vector<WalkTriplet> ts, std::uint32_t l)
{
    std::vector<std::uint64_t> out;
    for (auto const& t : ts) {
        out.push_back(encode_triplet(t, l).value);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void check_against(GraphSnapshot const& g, Oracle const& oracle)
{
    REQUIRE(g.vertex_count() == oracle.size());
    std::size_t directed = 0;
    for (auto const& [v, ns] : oracle) {
        auto const got = g.neighbors(v);
        REQUIRE(got == std::vector<VertexId>(ns.begin(), ns.end()));
        directed += ns.size();
    }
    REQUIRE(g.edge_count() * 2 == directed);
}

EdgeBatch ops(std::initializer_list<EdgeUpdate> list) { return EdgeBatch{list}; }

}  // namespace

TEST_CASE("running-example edge-tree of vertex 5")
{
    // Only v5's incident edges are fixed by the example; the rest is filler.
    Edges const edges{{5, 2}, {5, 3}, {5, 4}, {7, 5}, {1, 3}, {0, 1}, {1, 2}};
    auto const g = GraphSnapshot::from_edges(edges);
    CHECK(g.neighbors(5) == std::vector<VertexId>{2, 3, 4, 7});
    CHECK(g.neighbors(1) == std::vector<VertexId>{0, 2, 3});
    CHECK(g.edge_count() == 7);
    CHECK(g.vertex_count() == 7);
    CHECK_THROWS_AS(g.neighbors(6), NotFoundError);

    auto const adj = g.adjacency(5);
    CHECK(adj.size() == 4);
    CHECK(adj[0] == 2);
    CHECK(adj[3] == 7);
    CHECK(adj.contains(4));
    CHECK_FALSE(adj.contains(1));
}

TEST_CASE("from_edges collapses duplicates and rejects self-loops")
{
    Edges const dup{{1, 2}, {2, 1}, {1, 2}};
    auto const g = GraphSnapshot::from_edges(dup);
    CHECK(g.edge_count() == 1);
    Edges const loop{{3, 3}};
    CHECK_THROWS_AS(GraphSnapshot::from_edges(loop), ContractError);
}

TEST_CASE("empty batch keeps contents and yields an empty MAV")
{
    Edges const edges{{1, 2}, {2, 3}};
    auto const g = GraphSnapshot::from_edges(edges);
    RewriteLog log;
    auto const r = apply_edge_batch(g, EdgeBatch{}, {3, &log});
    CHECK(r.mav.empty());
    CHECK(r.graph.same_root(g));
    CHECK(r.graph.epoch() == g.epoch() + 1);
}

TEST_CASE("path graph: inserting (2,4) affects w0 at position 1")
{
    Edges const edges{{1, 2}, {2, 3}};
    std::uint32_t const l = 3;
    auto g = GraphSnapshot::from_edges(edges);
    // w0 = [1, 2, 3]; the last triplet points at itself
    g = g.push_walk_version(1, 0, encode_all({{0, 0, 2}}, l));
    g = g.push_walk_version(2, 0, encode_all({{0, 1, 3}}, l));
    g = g.push_walk_version(3, 0, encode_all({{0, 2, 3}}, l));

    RewriteLog log;
    auto const r = apply_edge_batch(g, ops({{EdgeOp::insert, 2, 4}}), {l, &log});
    REQUIRE(r.mav.size() == 1);
    CHECK(*r.mav.find(0) == Affected{2, 1});
    CHECK(r.added == std::vector<VertexId>{4});
    CHECK(r.graph.neighbors(2) == std::vector<VertexId>{1, 3, 4});
    CHECK(r.graph.neighbors(4) == std::vector<VertexId>{2});

    // a cut at position 0 invalidates the stored triplets of w0
    log.record(0, 1, 0);
    auto const r2 = apply_edge_batch(g, ops({{EdgeOp::insert, 2, 4}}), {l, &log});
    CHECK(r2.mav.empty());
}

TEST_CASE("fresh vertices grow n by two and leave the MAV empty")
{
    Edges const edges{{1, 2}};
    std::uint32_t const l = 2;
    auto g = GraphSnapshot::from_edges(edges);
    g = g.push_walk_version(1, 0, encode_all({{0, 0, 2}}, l));
    g = g.push_walk_version(2, 0, encode_all({{0, 1, 2}}, l));
    auto const r = apply_edge_batch(g, ops({{EdgeOp::insert, 10, 11}}), {l, nullptr});
    CHECK(r.graph.vertex_count() == g.vertex_count() + 2);
    CHECK(r.mav.empty());
    CHECK(r.added == std::vector<VertexId>{10, 11});
}

TEST_CASE("a vertex whose degree reaches zero disappears")
{
    Edges const edges{{1, 2}, {2, 3}};
    auto const g = GraphSnapshot::from_edges(edges);
    auto const r = apply_edge_batch(g, ops({{EdgeOp::remove, 3, 2}}), {});
    CHECK(r.removed == std::vector<VertexId>{3});
    CHECK_FALSE(r.graph.has_vertex(3));
    CHECK_THROWS_AS(r.graph.neighbors(3), NotFoundError);
    CHECK(r.graph.neighbors(2) == std::vector<VertexId>{1});
    // the old snapshot still sees the edge
    CHECK(g.neighbors(3) == std::vector<VertexId>{2});
}

TEST_CASE("bad batches are rejected whole with every bad op listed")
{
    Edges const edges{{1, 2}, {2, 3}};
    auto const g = GraphSnapshot::from_edges(edges);
    EdgeBatch const bad = ops({
        {EdgeOp::insert, 5, 6},
        {EdgeOp::insert, 1, 2},   // already present
        {EdgeOp::remove, 1, 3},   // absent
        {EdgeOp::insert, 4, 4},   // self-loop
        {EdgeOp::insert, 7, 8},
        {EdgeOp::remove, 8, 7},   // insert and delete together
    });
    try {
        apply_edge_batch(g, bad, {});
        FAIL("expected BatchError");
    } catch (BatchError const& e) {
        std::vector<std::size_t> idx;
        for (auto const& o : e.errors()) {
            idx.push_back(o.index);
        }
        CHECK(idx == std::vector<std::size_t>{1, 2, 3, 5});
    }
    // duplicates in one direction or the other collapse silently
    auto const nb = normalize_batch(ops({{EdgeOp::insert, 4, 3}, {EdgeOp::insert, 3, 4}}), g);
    CHECK(nb.inserts == Edges{{3, 4}});
}

TEST_CASE("batch text parser")
{
    std::istringstream in("# header\n+ 1 2\n\n- 3 4   # trailing\n+\t5 6\n");
    auto const b = parse_batch(in);
    REQUIRE(b.ops.size() == 3);
    CHECK(b.ops[0] == EdgeUpdate{EdgeOp::insert, 1, 2});
    CHECK(b.ops[1] == EdgeUpdate{EdgeOp::remove, 3, 4});
    CHECK(b.ops[2] == EdgeUpdate{EdgeOp::insert, 5, 6});

    std::ostringstream out;
    write_batch(out, b);
    std::istringstream back(out.str());
    CHECK(parse_batch(back).ops == b.ops);

    for (std::string const bad : {"* 1 2\n", "+ 1\n", "+ 1 x\n", "+ 1 2 3\n", "+ 1 4294967296\n"}) {
        std::istringstream s("+ 0 1\n" + bad);
        try {
            parse_batch(s, "f.txt");
            FAIL("expected ParseError for " << bad);
        } catch (ParseError const& e) {
            CHECK(e.line() == 2);
        }
    }
}

TEST_CASE("edge list parser skips comments")
{
    std::istringstream in("% matrix market style\n1 2\n# x\n2 3\n");
    CHECK(parse_edge_list(in) == Edges{{1, 2}, {2, 3}});
}

TEST_CASE("push_walk_version across five epochs widens bounds")
{
    Edges const edges{{1, 2}};
    std::uint32_t const l = 10;
    auto g = GraphSnapshot::from_edges(edges);
    std::mt19937_64 rng(1);
    std::vector<VertexId> nexts;
    for (std::uint64_t e = 0; e < 5; ++e) {
        std::vector<WalkTriplet> ts;
        for (std::uint32_t i = 0; i < 4; ++i) {
            VertexId const next = static_cast<VertexId>(rng() % 1000);
            ts.push_back({static_cast<WalkId>(e * 4 + i), i, next});
            nexts.push_back(next);
        }
        g = g.push_walk_version(1, e, encode_all(ts, l));
    }
    g = g.push_walk_version(1, 5, {});
    auto const& v = g.at(1);
    CHECK(v.walks.size() == 5);
    CHECK(v.triplet_count() == 20);
    // recompute from a full decode
    VertexId lo = ~VertexId{0};
    VertexId hi = 0;
    for (auto const& ver : v.walks) {
        ver.tree.iterate([&](std::uint64_t t) {
            auto const d = decode_triplet(EncodedTriplet{t}, l);
            lo = std::min(lo, d.next);
            hi = std::max(hi, d.next);
        });
    }
    CHECK(v.next_min == lo);
    CHECK(v.next_max == hi);
    CHECK(lo == *std::min_element(nexts.begin(), nexts.end()));
    CHECK(hi == *std::max_element(nexts.begin(), nexts.end()));

    // same epoch merges into the newest version
    g = g.push_walk_version(1, 4, encode_all({{99, 0, 5}}, l));
    CHECK(g.at(1).walks.size() == 5);
    CHECK(g.at(1).triplet_count() == 21);
    CHECK_THROWS_AS(g.push_walk_version(1, 3, encode_all({{98, 0, 5}}, l)), ContractError);
}

TEST_CASE("random batches against an adjacency-map oracle; snapshots stay fixed")
{
    std::mt19937_64 rng(42);
    VertexId const n = 60;
    Oracle oracle;
    GraphSnapshot g;
    std::vector<std::pair<GraphSnapshot, Oracle>> history;
    for (int step = 0; step < 100; ++step) {
        EdgeBatch b;
        std::set<std::pair<VertexId, VertexId>> touched;
        std::size_t const k = 1 + rng() % 30;
        for (std::size_t i = 0; i < k; ++i) {
            VertexId a = static_cast<VertexId>(rng() % n);
            VertexId c = static_cast<VertexId>(rng() % n);
            if (a == c || !touched.insert(std::minmax(a, c)).second) {
                continue;
            }
            bool const present = oracle.count(a) && oracle[a].count(c);
            b.ops.push_back({present ? EdgeOp::remove : EdgeOp::insert, a, c});
        }
        auto const r = apply_edge_batch(g, b, {});
        for (auto const& u : b.ops) {
            if (u.op == EdgeOp::insert) {
                oracle[u.src].insert(u.dst);
                oracle[u.dst].insert(u.src);
            } else {
                oracle[u.src].erase(u.dst);
                oracle[u.dst].erase(u.src);
            }
        }
        std::erase_if(oracle, [](auto const& kv) { return kv.second.empty(); });
        check_against(r.graph, oracle);
        // undirected symmetry
        r.graph.for_each_vertex([&](VertexEntry const& e) {
            e.edges.iterate([&](std::uint64_t d) { CHECK(r.graph.has_edge(static_cast<VertexId>(d), e.id)); });
        });
        history.emplace_back(r.graph, oracle);
        g = r.graph;
    }
    for (auto const& [snap, want] : history) {
        check_against(snap, want);
    }
}

TEST_CASE("MAV minimality and bound soundness against a decoded-corpus oracle")
{
    std::mt19937_64 rng(9);
    std::uint32_t const l = 6;
    VertexId const n = 25;
    Edges edges;
    for (VertexId v = 0; v + 1 < n; ++v) {
        edges.emplace_back(v, v + 1);
    }
    auto g = GraphSnapshot::from_edges(edges);
    // arbitrary vertex sequences stand in for walks; the graph layer does not check them
    std::vector<std::vector<VertexId>> walks(40);
    std::map<VertexId, std::vector<WalkTriplet>> per_vertex;
    for (WalkId w = 0; w < walks.size(); ++w) {
        for (std::uint32_t p = 0; p < l; ++p) {
            walks[w].push_back(static_cast<VertexId>(rng() % n));
        }
        for (std::uint32_t p = 0; p < l; ++p) {
            VertexId const next = p + 1 < l ? walks[w][p + 1] : walks[w][p];
            per_vertex[walks[w][p]].push_back({w, p, next});
        }
    }
    std::vector<VertexTriplets> groups;
    for (auto const& [v, ts] : per_vertex) {
        groups.push_back({v, encode_all(ts, l)});
    }
    g = g.push_walk_versions(0, groups);

    g.for_each_vertex([&](VertexEntry const& e) {
        for (auto const& ver : e.walks) {
            ver.tree.iterate([&](std::uint64_t t) {
                auto const d = decode_triplet(EncodedTriplet{t}, l);
                CHECK(d.next >= e.next_min);
                CHECK(d.next <= e.next_max);
            });
        }
    });

    for (int trial = 0; trial < 20; ++trial) {
        EdgeBatch b;
        std::set<VertexId> endpoints;
        for (int i = 0; i < 3; ++i) {
            VertexId a = static_cast<VertexId>(rng() % n);
            VertexId c = static_cast<VertexId>(rng() % n);
            if (a == c || std::max(a, c) - std::min(a, c) == 1 || endpoints.count(a) || endpoints.count(c)) {
                continue;
            }
            b.ops.push_back({EdgeOp::insert, a, c});
            endpoints.insert(a);
            endpoints.insert(c);
        }
        auto const r = apply_edge_batch(g, b, {l, nullptr});
        Mav want;
        for (WalkId w = 0; w < walks.size(); ++w) {
            for (std::uint32_t p = 0; p < l; ++p) {
                if (endpoints.count(walks[w][p])) {
                    want.offer(w, walks[w][p], p);
                    break;
                }
            }
        }
        CHECK(r.mav == want);
    }
}
