#include <doctest.h>

#include <map>
#include <thread>

#include <wharf/live.hpp>

#include "random_graphs.hpp"

using namespace wharf;
using namespace wharf::testing;

namespace {

void check_matches(GraphSnapshot const& g, EdgeSet const& oracle)
{
    std::map<VertexId, std::vector<VertexId>> adj;
    for (auto const& [a, b] : oracle) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    REQUIRE(g.vertex_count() == adj.size());
    REQUIRE(g.edge_count() == oracle.size());
    for (auto& [v, ns] : adj) {
        std::sort(ns.begin(), ns.end());
        REQUIRE(g.neighbors(v) == ns);
    }
}

}  // namespace

TEST_CASE("two snapshots with no batch in between share a root")
{
    Edges const e{{0, 1}, {1, 2}};
    LiveCorpus live(generate_corpus(GraphSnapshot::from_edges(e), CorpusConfig{}), MergePolicy{});
    CHECK(live.acquire_snapshot().same_root(live.acquire_snapshot()));
}

TEST_CASE("a snapshot keeps its contents while batches are applied")
{
    Edges const e{{0, 1}, {1, 2}};
    CorpusConfig cfg;
    cfg.walks_per_vertex = 2;
    cfg.length = 5;
    LiveCorpus live(generate_corpus(GraphSnapshot::from_edges(e), cfg), MergePolicy::parse("eager"));
    auto const before = live.acquire();
    auto const walks = materialize_walks(*before);
    live.apply_batch(EdgeBatch{{{EdgeOp::insert, 2, 3}, {EdgeOp::remove, 0, 1}}});
    CHECK(before->graph.neighbors(1) == std::vector<VertexId>{0, 2});
    CHECK(materialize_walks(*before) == walks);
    CHECK(live.acquire_snapshot().neighbors(1) == std::vector<VertexId>{2});
    CHECK_FALSE(live.acquire_snapshot().has_vertex(0));
}

TEST_CASE("interleaved batches and snapshots replay to their epoch's oracle")
{
    std::mt19937_64 rng(17);
    VertexId const n = 40;
    auto edges = random_edges(rng, n, 80);
    Edges const e(edges.begin(), edges.end());
    CorpusConfig cfg;
    cfg.walks_per_vertex = 1;
    cfg.length = 6;
    LiveCorpus live(generate_corpus(GraphSnapshot::from_edges(e), cfg), MergePolicy::parse("every:4"));
    std::vector<std::pair<GraphSnapshot, EdgeSet>> taken;
    taken.emplace_back(live.acquire_snapshot(), edges);
    for (int i = 0; i < 100; ++i) {
        live.apply_batch(random_batch(rng, edges, n + 5, 6));
        if (i % 7 == 0) {
            taken.emplace_back(live.acquire_snapshot(), edges);
        }
    }
    for (auto const& [g, oracle] : taken) {
        check_matches(g, oracle);
    }
    CHECK(live.acquire_snapshot().epoch() == 100);
}

TEST_CASE("readers running next to the writer see whole corpora")
{
    std::mt19937_64 rng(23);
    VertexId const n = 30;
    auto edges = random_edges(rng, n, 60);
    Edges const e(edges.begin(), edges.end());
    CorpusConfig cfg;
    cfg.walks_per_vertex = 2;
    cfg.length = 6;
    LiveCorpus live(generate_corpus(GraphSnapshot::from_edges(e), cfg), MergePolicy::parse("on-demand"));
    std::vector<EdgeBatch> batches;
    for (int i = 0; i < 20; ++i) {
        batches.push_back(random_batch(rng, edges, n + 5, 5));
    }
    std::atomic<bool> done{false};
    std::size_t reads = 0;
    std::thread reader([&] {
        while (!done) {
            auto const c = live.acquire();
            materialize_walks(*c);  // throws on a torn corpus
            ++reads;
        }
    });
    for (auto const& b : batches) {
        live.apply_batch(b);
    }
    live.merge();
    done = true;
    reader.join();
    CHECK(reads > 0);
    check_matches(live.acquire_snapshot(), edges);
}
