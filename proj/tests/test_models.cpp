#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include <wharf/hybrid.hpp>
#include <wharf/models.hpp>

using namespace wharf;

namespace {

using Edges = std::vector<std::pair<VertexId, VertexId>>;

// Running-example neighborhood: v1 is adjacent to v0, v2, v3.
GraphSnapshot running_example()
{
    Edges const e{{0, 1}, {1, 2}, {1, 3}, {3, 5}, {2, 5}, {4, 5}, {5, 7}, {3, 4}};
    return GraphSnapshot::from_edges(e);
}

// Pearson chi-square p-value for counts against probabilities.
double chi_square_p(std::vector<double> const& observed, std::vector<double> const& probs, double n)
{
    double stat = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double const e = probs[i] * n;
        stat += (observed[i] - e) * (observed[i] - e) / e;
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST_CASE("model parameters are validated")
{
    CHECK_THROWS_AS(WalkModel::node2vec(0, 1), ContractError);
    CHECK_THROWS_AS(WalkModel::node2vec(1, -2), ContractError);
    CHECK_THROWS_AS(WalkModel::ppr(0), ContractError);
    CHECK_THROWS_AS(WalkModel::ppr(1), ContractError);
    CHECK(WalkModel::node2vec(0.5, 2).order() == 2);
    CHECK(WalkModel::deepwalk().order() == 1);
    CHECK(parse_model_kind("ppr") == ModelKind::ppr);
    CHECK_THROWS_AS(parse_model_kind("walk"), ContractError);
}

TEST_CASE("walk rng is keyed and deterministic")
{
    WalkRng a(1, 2, 3, 4);
    WalkRng b(1, 2, 3, 4);
    WalkRng c(1, 2, 3, 5);
    std::uint64_t const x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    WalkRng r(99);
    for (int i = 0; i < 10000; ++i) {
        CHECK(r.uniform_index(7) < 7);
        double const u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(r.uniform_index(1) == 0);
}

TEST_CASE("uniform_index has no modulo bias at small n")
{
    WalkRng r(5);
    std::vector<double> counts(3, 0);
    double const n = 300000;
    for (int i = 0; i < n; ++i) {
        counts[r.uniform_index(3)] += 1;
    }
    CHECK(chi_square_p(counts, {1.0 / 3, 1.0 / 3, 1.0 / 3}, n) > 0.001);
}

TEST_CASE("deepwalk at running-example v1 moves to each neighbor with probability 1/3")
{
    auto const g = running_example();
    auto const probs = transition_probabilities(WalkModel::deepwalk(), g, 1, std::nullopt);
    REQUIRE(probs.size() == 3);
    for (auto const& [v, pr] : probs) {
        CHECK(pr == doctest::Approx(1.0 / 3));
    }
    std::size_t const trials = 1000000;
    auto const emp = empirical_distribution(WalkModel::deepwalk(), g, 1, std::nullopt, trials, 17);
    REQUIRE(emp.frequency.size() == 3);
    double const sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / static_cast<double>(trials));
    for (VertexId v : {0u, 2u, 3u}) {
        CHECK(std::abs(emp.frequency.at(v) - 1.0 / 3) <= std::max(0.002, 3 * sigma));
    }
}

TEST_CASE("single-neighbor vertex always moves to it")
{
    Edges const e{{1, 2}};
    auto const g = GraphSnapshot::from_edges(e);
    auto const emp = empirical_distribution(WalkModel::node2vec(0.5, 2), g, 1, 2u, 1000, 3);
    CHECK(emp.frequency.size() == 1);
    CHECK(emp.frequency.at(2) == 1.0);
    auto const one = empirical_distribution(WalkModel::deepwalk(), g, 2, std::nullopt, 1, 3);
    CHECK(one.frequency.at(1) == 1.0);
    CHECK_THROWS_AS(empirical_distribution(WalkModel::deepwalk(), g, 2, std::nullopt, 0, 3), ContractError);
}

TEST_CASE("node2vec on a triangle: 2/3 back, 1/3 across")
{
    Edges const e{{0, 1}, {1, 2}, {0, 2}};  // a=0, b=1, c=2
    auto const g = GraphSnapshot::from_edges(e);
    auto const m = WalkModel::node2vec(0.5, 2);
    // hand weights: back to a = 1/p = 2; c is adjacent to a, weight 1
    auto const probs = transition_probabilities(m, g, 1, 0u);
    REQUIRE(probs.size() == 2);
    CHECK(probs[0].first == 0);
    CHECK(probs[0].second == doctest::Approx(2.0 / 3));
    CHECK(probs[1].second == doctest::Approx(1.0 / 3));

    std::size_t const trials = 1000000;
    auto const emp = empirical_distribution(m, g, 1, 0u, trials, 23);
    double const sigma = std::sqrt((2.0 / 9) / static_cast<double>(trials));
    CHECK(std::abs(emp.frequency.at(0) - 2.0 / 3) <= 3 * sigma);
    CHECK(std::abs(emp.frequency.at(2) - 1.0 / 3) <= 3 * sigma);
}

TEST_CASE("node2vec weights distinguish all three classes")
{
    // prev = 0, current = 1; 2 is adjacent to 0, 3 is not
    Edges const e{{0, 1}, {1, 2}, {1, 3}, {0, 2}};
    auto const g = GraphSnapshot::from_edges(e);
    auto const probs = transition_probabilities(WalkModel::node2vec(0.25, 4), g, 1, 0u);
    // weights 4, 1, 0.25 over 5.25
    CHECK(probs[0].second == doctest::Approx(4 / 5.25));
    CHECK(probs[1].second == doctest::Approx(1 / 5.25));
    CHECK(probs[2].second == doctest::Approx(0.25 / 5.25));
}

TEST_CASE("ppr restarts with probability alpha and otherwise moves uniformly")
{
    auto const g = running_example();
    auto const emp = empirical_distribution(WalkModel::ppr(0.2), g, 1, std::nullopt, 200000, 4);
    CHECK(emp.stop == doctest::Approx(0.2).epsilon(0.02));
    for (auto const& [v, f] : emp.frequency) {
        CHECK(f == doctest::Approx(0.8 / 3).epsilon(0.03));
    }
}

TEST_CASE("goodness of fit over random (vertex, model) cases")
{
    std::mt19937_64 rng(77);
    int passed = 0;
    int const cases = 200;
    for (int c = 0; c < cases; ++c) {
        Edges e;
        VertexId const n = 12;
        for (VertexId a = 0; a < n; ++a) {
            for (VertexId b = a + 1; b < n; ++b) {
                if (rng() % 3 == 0) {
                    e.emplace_back(a, b);
                }
            }
        }
        if (e.empty()) {
            e.emplace_back(0, 1);
        }
        auto const g = GraphSnapshot::from_edges(e);
        auto const ids = g.vertex_ids();
        VertexId const cur = ids[rng() % ids.size()];
        auto const nbrs = g.neighbors(cur);
        std::optional<VertexId> prev;
        WalkModel m = WalkModel::deepwalk();
        if (rng() % 2 == 0) {
            m = WalkModel::node2vec(0.5, 2);
            prev = nbrs[rng() % nbrs.size()];
        }
        auto const probs = transition_probabilities(m, g, cur, prev);
        double const trials = 20000;
        auto const emp = empirical_distribution(m, g, cur, prev, static_cast<std::size_t>(trials), rng());
        std::vector<double> obs;
        std::vector<double> pr;
        for (auto const& [v, p] : probs) {
            auto it = emp.frequency.find(v);
            obs.push_back(it == emp.frequency.end() ? 0 : it->second * trials);
            pr.push_back(p);
            // edge validity
        }
        for (auto const& [v, f] : emp.frequency) {
            CHECK(std::binary_search(nbrs.begin(), nbrs.end(), v));
        }
        if (obs.size() == 1 || chi_square_p(obs, pr, trials) >= 0.01) {
            ++passed;
        }
    }
    CHECK(passed >= cases * 95 / 100);
}

TEST_CASE("extend_walk is edge-valid, deterministic and pads restarts")
{
    auto const g = running_example();
    for (auto const& m : {WalkModel::deepwalk(), WalkModel::node2vec(0.5, 2), WalkModel::ppr(0.3)}) {
        for (WalkId w = 0; w < 200; ++w) {
            std::vector<VertexId> a{1};
            std::vector<VertexId> b{1};
            std::uint32_t const stop = extend_walk(m, g, 9, w, 0, 12, a);
            extend_walk(m, g, 9, w, 0, 12, b);
            CHECK(a == b);
            REQUIRE(a.size() == 12);
            for (std::uint32_t p = 0; p < stop; ++p) {
                CHECK(g.has_edge(a[p], a[p + 1]));
            }
            for (std::uint32_t p = stop; p + 1 < 12; ++p) {
                CHECK(a[p + 1] == a[stop]);
            }
            if (m.kind != ModelKind::ppr) {
                CHECK(stop == 11);
            }
        }
    }
    std::vector<VertexId> one{4};
    CHECK(extend_walk(WalkModel::deepwalk(), g, 1, 0, 0, 1, one) == 0);
    CHECK(one == std::vector<VertexId>{4});
}
