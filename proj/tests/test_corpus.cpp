#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <wharf/corpus.hpp>

using namespace wharf;

namespace {

using Edges = std::vector<std::pair<VertexId, VertexId>>;

GraphSnapshot random_graph(std::mt19937_64& rng, VertexId n, std::size_t m)
{
    std::set<std::pair<VertexId, VertexId>> s;
    for (VertexId v = 0; v + 1 < n; ++v) {
        s.emplace(v, v + 1);  // connected, no isolated vertices
    }
    while (s.size() < m) {
        VertexId a = static_cast<VertexId>(rng() % n);
        VertexId b = static_cast<VertexId>(rng() % n);
        if (a != b) {
            s.insert(std::minmax(a, b));
        }
    }
    Edges e(s.begin(), s.end());
    return GraphSnapshot::from_edges(e);
}

void check_edge_valid(GraphSnapshot const& g, std::vector<VertexId> const& path)
{
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (path[i] != path[i + 1]) {
            REQUIRE(g.has_edge(path[i], path[i + 1]));
        }
    }
}

}  // namespace

TEST_CASE("config bounds")
{
    CorpusConfig cfg;
    cfg.length = 80;
    CHECK_NOTHROW(cfg.check_capacity(kOperandLimit / 80));
    CHECK_THROWS_AS(cfg.check_capacity(kOperandLimit / 80 + 1), OverflowError);
    cfg.walks_per_vertex = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
}

TEST_CASE("roster retires ids without reuse")
{
    WalkRoster r;
    CHECK(r.add(5) == 0);
    CHECK(r.add(5) == 1);
    CHECK(r.add(7) == 2);
    CHECK(r.rooted(5) == std::vector<WalkId>{0, 1});
    r.retire(0);
    CHECK_FALSE(r.live(0));
    CHECK(r.start(0) == 5);
    CHECK(r.rooted(5) == std::vector<WalkId>{1});
    CHECK(r.add(9) == 3);
    CHECK(r.live_count() == 3);
    CHECK_THROWS_AS(r.retire(0), NotFoundError);
    CHECK_THROWS_AS(r.start(10), NotFoundError);
}

TEST_CASE("n_w = 1, l = 1: every vertex owns only its own terminal triplet")
{
    Edges const e{{0, 1}, {1, 2}, {2, 3}};
    CorpusConfig cfg;
    cfg.walks_per_vertex = 1;
    cfg.length = 1;
    auto const c = generate_corpus(GraphSnapshot::from_edges(e), cfg);
    CHECK(c.roster.live_count() == 4);
    c.graph.for_each_vertex([&](VertexEntry const& v) {
        REQUIRE(v.walks.size() == 1);
        auto const xs = v.walks[0].tree.to_vector();
        REQUIRE(xs.size() == 1);
        WalkTriplet const t = decode_triplet(EncodedTriplet{xs[0]}, 1);
        CHECK(t.position == 0);
        CHECK(t.next == v.id);
        CHECK(c.roster.start(t.walk) == v.id);
    });
}

TEST_CASE("running-example walk w0 as triplets")
{
    // w0 = v0 v1 v3 v5 v4: its triplets carry the next vertices 1, 3, 5, 4 and a terminal 4.
    Edges const e{{0, 1}, {1, 2}, {1, 3}, {3, 5}, {2, 5}, {4, 5}, {5, 7}};
    CorpusConfig cfg;
    cfg.walks_per_vertex = 1;
    cfg.length = 5;
    std::vector<std::vector<VertexId>> const walks{{0, 1, 3, 5, 4}};
    auto const c = corpus_from_walks(GraphSnapshot::from_edges(e), cfg, walks);

    std::vector<WalkTriplet> got;
    c.graph.for_each_vertex([&](VertexEntry const& v) {
        for (auto const& ver : v.walks) {
            ver.tree.iterate([&](std::uint64_t x) { got.push_back(decode_triplet(EncodedTriplet{x}, 5)); });
        }
    });
    std::sort(got.begin(), got.end(), [](auto const& a, auto const& b) { return a.position < b.position; });
    std::vector<WalkTriplet> const want{{0, 0, 1}, {0, 1, 3}, {0, 2, 5}, {0, 3, 4}, {0, 4, 4}};
    CHECK(got == want);
    // v5's walk-tree holds (w0, p3, v4)
    CHECK(c.graph.at(5).walks[0].tree.contains(encode_triplet({0, 3, 4}, 5).value));

    CHECK(find_next(c.graph, 0, 0, 0, 5, c.log) == 1u);
    CHECK(find_next(c.graph, 1, 0, 1, 5, c.log) == 3u);
    CHECK(find_next(c.graph, 4, 0, 4, 5, c.log) == 4u);
    CHECK_FALSE(find_next(c.graph, 1, 0, 0, 5, c.log));
    CHECK(find_next(c.graph, 7, 0, 0, 5, c.log) == std::nullopt);  // empty walk-tree
    CHECK_THROWS_AS(find_next(c.graph, 6, 0, 0, 5, c.log), NotFoundError);
    CHECK(reconstruct_walk(c, 0) == walks[0]);
    CHECK(reconstruct_walk(c, 0, 3) == std::vector<VertexId>{0, 1, 3});
}

TEST_CASE("generated corpus on a 10^3-vertex graph is edge-valid")
{
    std::mt19937_64 rng(1);
    auto const g = random_graph(rng, 1000, 4000);
    for (auto const& m : {WalkModel::deepwalk(), WalkModel::node2vec(0.5, 2), WalkModel::ppr(0.2)}) {
        CorpusConfig cfg;
        cfg.walks_per_vertex = 2;
        cfg.length = 12;
        cfg.model = m;
        cfg.seed = 5;
        auto const c = generate_corpus(g, cfg, 2);
        CHECK(c.roster.live_count() == 2000);
        CHECK(c.graph.triplet_count() == 2000 * 12);
        auto const walks = materialize_walks(c);
        for (WalkId w = 0; w < 2000; ++w) {
            REQUIRE(walks[w].size() == 12);
            CHECK(walks[w][0] == c.roster.start(w));
            check_edge_valid(g, walks[w]);
            if (w % 50 == 0) {
                CHECK(reconstruct_walk(c, w) == walks[w]);
            }
        }
        // walk ids follow vertex order
        CHECK(c.roster.start(0) == 0);
        CHECK(c.roster.start(1) == 0);
        CHECK(c.roster.start(2) == 1);
        // thread count does not change the result
        auto const single = generate_corpus(g, cfg, 1);
        CHECK(materialize_walks(single) == walks);
    }
}

TEST_CASE("find_next matches a full-decode oracle over multi-version trees")
{
    std::mt19937_64 rng(2);
    auto const g = random_graph(rng, 200, 800);
    CorpusConfig cfg;
    cfg.walks_per_vertex = 3;
    cfg.length = 10;
    Corpus c = generate_corpus(g, cfg);
    std::uint32_t const l = cfg.length;
    auto walks = materialize_walks(c);

    // Four rounds of rewrites: cut random walks and store arbitrary new tails as new versions.
    for (std::uint64_t epoch = 1; epoch <= 4; ++epoch) {
        InsertionAccumulator acc;
        std::set<WalkId> picked;
        while (picked.size() < 150) {
            picked.insert(static_cast<WalkId>(rng() % walks.size()));
        }
        for (WalkId w : picked) {
            auto const p = static_cast<std::uint32_t>(rng() % l);
            auto& path = walks[w];
            for (std::uint32_t k = p + 1; k < l; ++k) {
                path[k] = static_cast<VertexId>(rng() % 200);
            }
            c.log.record(w, epoch, p);
            acc.add_walk(w, path, p);
        }
        c.graph = c.graph.push_walk_versions(epoch, acc.take_groups());
    }
    CHECK(materialize_walks(c) == walks);
    CHECK(c.graph.max_walk_versions() > 1);

    std::map<VertexId, std::size_t> max_chunk;
    c.graph.for_each_vertex([&](VertexEntry const& e) {
        std::size_t m = 0;
        for (auto const& v : e.walks) {
            m = std::max(m, v.tree.chunk_stats().max_chunk);
        }
        max_chunk[e.id] = m;
    });

    for (int q = 0; q < 10000; ++q) {
        auto const w = static_cast<WalkId>(rng() % walks.size());
        auto const p = static_cast<std::uint32_t>(rng() % l);
        // half the queries at the right vertex, half at a random one
        VertexId const v = rng() % 2 ? walks[w][p] : static_cast<VertexId>(rng() % 200);

        std::optional<VertexId> want;
        auto const& e = c.graph.at(v);
        for (auto const& ver : e.walks) {
            ver.tree.iterate([&](std::uint64_t x) {
                auto const t = decode_triplet(EncodedTriplet{x}, l);
                if (t.walk == w && t.position == p && c.log.valid(w, p, ver.epoch)) {
                    REQUIRE_FALSE(want);
                    want = t.next;
                }
            });
        }
        FindStats st;
        auto const got = find_next(c.graph, v, w, p, l, c.log, &st);
        CHECK(got == want);
        CHECK(st.decoded <= st.in_range + 2 * max_chunk[v] * std::max<std::size_t>(st.versions_searched, 1));
        if (got) {
            auto const r = search_range(e, w, p, l);
            std::uint64_t const enc = encode_triplet({w, p, *got}, l).value;
            CHECK(enc >= r->lb);
            CHECK(enc <= r->ub);
        }
    }
}

TEST_CASE("a broken chain is reported with walk and position")
{
    Edges const e{{0, 1}, {1, 2}};
    CorpusConfig cfg;
    cfg.walks_per_vertex = 1;
    cfg.length = 3;
    std::vector<std::vector<VertexId>> const walks{{0, 1, 2}, {2, 1, 0}};
    Corpus c = corpus_from_walks(GraphSnapshot::from_edges(e), cfg, walks);
    c.log.record(1, 1, 1);  // cut without a replacement version
    CHECK(reconstruct_walk(c, 0) == walks[0]);
    try {
        reconstruct_walk(c, 1);
        FAIL("expected CorruptionError");
    } catch (CorruptionError const& err) {
        CHECK(std::string(err.what()) == "walk 1 broken at position 1");
    }
    CHECK_THROWS_AS(materialize_walks(c), CorruptionError);
    c.roster.retire(1);
    CHECK_THROWS_AS(reconstruct_walk(c, 1), NotFoundError);
    CHECK(materialize_walks(c)[1].empty());
}

TEST_CASE("corpus dump round trips")
{
    std::mt19937_64 rng(3);
    auto const g = random_graph(rng, 30, 60);
    CorpusConfig cfg;
    cfg.walks_per_vertex = 2;
    cfg.length = 6;
    auto const c = generate_corpus(g, cfg);
    std::ostringstream out;
    dump_corpus(out, c);
    std::istringstream in(out.str());
    auto const parsed = parse_corpus_dump(in);
    auto const walks = materialize_walks(c);
    REQUIRE(parsed.size() == 60);
    for (auto const& [w, path] : parsed) {
        CHECK(path == walks[w]);
    }
    std::istringstream bad("0: 1 2\n1 2 3\n");
    try {
        parse_corpus_dump(bad, "d.txt");
        FAIL("expected ParseError");
    } catch (ParseError const& e) {
        CHECK(e.line() == 2);
    }
}
