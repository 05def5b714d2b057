#include <wharf/harness.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include <wharf/parallel.hpp>

namespace wharf {

void RmatParams::validate() const
{
    for (double x : {a, b, c, d}) {
        if (!(x >= 0 && x <= 1)) {
            throw ContractError("R-MAT quadrant probabilities must lie in [0, 1]");
        }
    }
    if (std::abs(a + b + c + d - 1) > 1e-9) {
        throw ContractError("R-MAT quadrant probabilities must sum to 1");
    }
    if (scale < 1 || scale > 32) {
        throw ContractError("R-MAT scale must be in [1, 32]");
    }
}

RmatParams RmatParams::er(std::uint32_t scale, std::uint64_t edges, std::uint64_t seed)
{
    return {0.25, 0.25, 0.25, 0.25, scale, edges, seed};
}

RmatParams RmatParams::skewed(double s, std::uint32_t scale, std::uint64_t edges, std::uint64_t seed)
{
    if (!(s > 0)) {
        throw ContractError("skew must be positive");
    }
    double const a = 0.5 / (1 + s);
    return {a, 0.25, 0.25, 0.5 - a, scale, edges, seed};
}

RmatParams RmatParams::updates(std::uint32_t scale, std::uint64_t seed)
{
    return {0.5, 0.1, 0.1, 0.3, scale, 0, seed};
}

Edge rmat_sample(RmatParams const& p, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t src = 0;
    std::uint64_t dst = 0;
    for (std::uint32_t level = 0; level < p.scale; ++level) {
        double const x = u(rng);
        src <<= 1;
        dst <<= 1;
        bool const right = (x >= p.a && x < p.a + p.b) || x >= p.a + p.b + p.c;
        bool const lower = x >= p.a + p.b;
        src |= lower ? 1 : 0;
        dst |= right ? 1 : 0;
    }
    return {static_cast<VertexId>(src), static_cast<VertexId>(dst)};
}

namespace {

Edge canonical(Edge e) noexcept
{
    return e.first < e.second ? e : Edge{e.second, e.first};
}

std::vector<Edge> distinct_edges(std::uint64_t want, std::uint64_t id_space, std::function<Edge()> const& draw)
{
    std::uint64_t const possible = id_space * (id_space - 1) / 2;
    if (want > possible) {
        throw ContractError("cannot draw " + std::to_string(want) + " distinct edges over " +
                            std::to_string(id_space) + " vertices");
    }
    std::set<Edge> seen;
    std::vector<Edge> out;
    out.reserve(want);
    std::uint64_t attempts = 0;
    std::uint64_t const budget = 200 * want + 1000000;
    while (out.size() < want) {
        if (++attempts > budget) {
            throw ContractError("edge sampler keeps repeating; asked for too dense a graph");
        }
        Edge const e = draw();
        if (e.first == e.second) {
            continue;
        }
        Edge const k = canonical(e);
        if (seen.insert(k).second) {
            out.push_back(k);
        }
    }
    return out;
}

}  // namespace

std::vector<Edge> rmat_generate(RmatParams const& p)
{
    p.validate();
    std::mt19937_64 rng(p.seed);
    return distinct_edges(p.edges, std::uint64_t{1} << p.scale, [&] { return rmat_sample(p, rng); });
}

std::vector<Edge> uniform_graph(VertexId n, std::uint64_t m, std::uint64_t seed)
{
    if (n < 2) {
        throw ContractError("uniform graph needs at least 2 vertices");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    return distinct_edges(m, n, [&] { return Edge{pick(rng), pick(rng)}; });
}

EdgeStream::EdgeStream(std::span<const Edge> initial, Sampler sample, double delete_fraction, std::uint64_t seed)
    : sample_(std::move(sample)), delete_fraction_(delete_fraction), rng_(seed)
{
    if (!(delete_fraction >= 0 && delete_fraction <= 1)) {
        throw ContractError("delete fraction must lie in [0, 1]");
    }
    for (Edge e : initial) {
        if (e.first != e.second && !where_.count(key(canonical(e)))) {
            insert(canonical(e));
        }
    }
}

void EdgeStream::insert(Edge e)
{
    where_.emplace(key(e), edges_.size());
    edges_.push_back(e);
}

void EdgeStream::erase_at(std::size_t i)
{
    where_.erase(key(edges_[i]));
    if (i + 1 != edges_.size()) {
        edges_[i] = edges_.back();
        where_[key(edges_[i])] = i;
    }
    edges_.pop_back();
}

EdgeBatch EdgeStream::next(std::size_t ops)
{
    EdgeBatch b;
    b.ops.reserve(ops);
    std::unordered_map<std::uint64_t, bool> touched;  // no edge is both inserted and deleted
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::size_t misses = 0;
    while (b.ops.size() < ops) {
        if (++misses > 1000 * ops + 100000) {
            throw ContractError("edge stream cannot find valid operations");
        }
        if (!edges_.empty() && coin(rng_) < delete_fraction_) {
            std::size_t const i = std::uniform_int_distribution<std::size_t>(0, edges_.size() - 1)(rng_);
            Edge const e = edges_[i];
            if (!touched.emplace(key(e), true).second) {
                continue;
            }
            erase_at(i);
            b.ops.push_back({EdgeOp::remove, e.first, e.second});
        } else {
            Edge const raw = sample_(rng_);
            if (raw.first == raw.second) {
                continue;
            }
            Edge const e = canonical(raw);
            if (where_.count(key(e)) || !touched.emplace(key(e), true).second) {
                continue;
            }
            insert(e);
            b.ops.push_back({EdgeOp::insert, raw.first, raw.second});
        }
    }
    return b;
}

// --- statistics -------------------------------------------------------------

double total_variation(std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size()) {
        throw ContractError("distributions over different supports");
    }
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::abs(p[i] - q[i]);
    }
    return s / 2;
}

ChiSquare chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b)
{
    if (a.size() != b.size()) {
        throw ContractError("count vectors of different length");
    }
    double na = 0;
    double nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    ChiSquare r;
    if (na == 0 || nb == 0) {
        return r;
    }
    std::size_t used = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double const col = static_cast<double>(a[i] + b[i]);
        if (col == 0) {
            continue;
        }
        ++used;
        double const ea = col * na / (na + nb);
        double const eb = col * nb / (na + nb);
        r.statistic += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
    }
    if (used < 2) {
        return r;
    }
    r.dof = used - 1;
    boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

double smape(std::span<const double> estimate, std::span<const double> truth)
{
    if (estimate.size() != truth.size()) {
        throw ContractError("SMAPE over vectors of different length");
    }
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double const den = (std::abs(estimate[i]) + std::abs(truth[i])) / 2;
        if (den == 0) {
            continue;
        }
        s += std::abs(estimate[i] - truth[i]) / den;
        ++n;
    }
    return n == 0 ? 0 : s / static_cast<double>(n);
}

AdjacencyMap adjacency_map(GraphSnapshot const& g)
{
    AdjacencyMap adj;
    for (VertexId v : g.vertex_ids()) {
        adj.emplace(v, g.neighbors(v));
    }
    return adj;
}

AdjacencyMap adjacency_map(std::span<const Edge> edges)
{
    AdjacencyMap adj;
    for (auto const& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& [v, ns] : adj) {
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    }
    return adj;
}

std::map<VertexId, double> pagerank(AdjacencyMap const& adj, double restart, double tolerance)
{
    std::map<VertexId, double> out;
    if (adj.empty()) {
        return out;
    }
    std::vector<VertexId> ids;
    std::unordered_map<VertexId, std::size_t> dense;
    for (auto const& kv : adj) {
        dense.emplace(kv.first, ids.size());
        ids.push_back(kv.first);
    }
    std::size_t const n = ids.size();
    std::vector<double> pr(n, 1.0 / static_cast<double>(n));
    std::vector<double> nx(n);
    for (int iter = 0; iter < 100000; ++iter) {
        std::fill(nx.begin(), nx.end(), restart / static_cast<double>(n));
        double dangling = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto const& ns = adj.at(ids[i]);
            if (ns.empty()) {
                dangling += pr[i];
                continue;
            }
            double const share = (1 - restart) * pr[i] / static_cast<double>(ns.size());
            for (VertexId u : ns) {
                nx[dense.at(u)] += share;
            }
        }
        double diff = 0;
        for (std::size_t i = 0; i < n; ++i) {
            nx[i] += (1 - restart) * dangling / static_cast<double>(n);
            diff += std::abs(nx[i] - pr[i]);
        }
        pr.swap(nx);
        if (diff < tolerance) {
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace(ids[i], pr[i]);
    }
    return out;
}

std::map<VertexId, double> visit_frequencies(std::span<const std::vector<VertexId>> walks)
{
    std::map<VertexId, double> out;
    double total = 0;
    for (auto const& w : walks) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i > 0 && w[i] == w[i - 1]) {
                break;  // the walk stopped; the rest is padding
            }
            out[w[i]] += 1;
            total += 1;
        }
    }
    for (auto& kv : out) {
        kv.second /= total;
    }
    return out;
}

// --- verification -----------------------------------------------------------

namespace {

constexpr VertexId kNone = std::numeric_limits<VertexId>::max();

// Successor counts per vertex of the final graph, plus (previous, current) pair counts so the
// model's law can be mixed over the observed previous vertices.
struct Tally {
    std::vector<std::vector<std::uint64_t>> succ;
    std::map<std::pair<VertexId, VertexId>, std::uint64_t> pairs;
    // successor counts per (previous, current) state; second-order models only
    std::map<std::pair<VertexId, VertexId>, std::vector<std::uint64_t>> states;

    explicit Tally(AdjacencyMap const& adj)
    {
        for (auto const& kv : adj) {
            succ.emplace_back(kv.second.size(), 0);
        }
    }

    void add(Tally const& o)
    {
        for (std::size_t i = 0; i < succ.size(); ++i) {
            for (std::size_t k = 0; k < succ[i].size(); ++k) {
                succ[i][k] += o.succ[i][k];
            }
        }
        for (auto const& [key, n] : o.pairs) {
            pairs[key] += n;
        }
        for (auto const& [key, counts] : o.states) {
            auto& mine = states[key];
            mine.resize(counts.size(), 0);
            for (std::size_t k = 0; k < counts.size(); ++k) {
                mine[k] += counts[k];
            }
        }
    }
};

class FinalGraph {
public:
    explicit FinalGraph(GraphSnapshot const& g) : g_(g), adj_(adjacency_map(g))
    {
        for (auto const& kv : adj_) {
            dense_.emplace(kv.first, dense_.size());
        }
    }

    AdjacencyMap const& adj() const noexcept { return adj_; }
    GraphSnapshot const& snapshot() const noexcept { return g_; }

    void count(std::span<const std::vector<VertexId>> walks, Tally& t, bool by_state) const
    {
        for (auto const& w : walks) {
            for (std::size_t i = 0; i + 1 < w.size(); ++i) {
                if (w[i + 1] == w[i]) {
                    break;
                }
                std::size_t const u = dense_.at(w[i]);
                auto const& ns = adj_.at(w[i]);
                auto const it = std::lower_bound(ns.begin(), ns.end(), w[i + 1]);
                if (it == ns.end() || *it != w[i + 1]) {
                    throw CorruptionError("walk step " + std::to_string(w[i]) + " -> " + std::to_string(w[i + 1]) +
                                          " is not an edge of the final graph");
                }
                auto const k = static_cast<std::size_t>(it - ns.begin());
                std::pair<VertexId, VertexId> const state{i == 0 ? kNone : w[i - 1], w[i]};
                ++t.succ[u][k];
                ++t.pairs[state];
                if (by_state) {
                    auto& cell = t.states[state];
                    cell.resize(ns.size(), 0);
                    ++cell[k];
                }
            }
        }
    }

    // Model law at each vertex, weighted by how often each previous vertex was observed.
    std::vector<std::vector<double>> expected(WalkModel const& m, Tally const& t) const
    {
        std::vector<std::vector<double>> out;
        for (auto const& kv : adj_) {
            out.emplace_back(kv.second.size(), 0.0);
        }
        std::vector<double> mass(out.size(), 0.0);
        for (auto const& [key, n] : t.pairs) {
            auto const [prev, cur] = key;
            std::size_t const u = dense_.at(cur);
            std::optional<VertexId> p;
            if (prev != kNone) {
                p = prev;
            }
            auto const law = transition_probabilities(m, g_, cur, p);
            for (std::size_t k = 0; k < law.size(); ++k) {
                out[u][k] += static_cast<double>(n) * law[k].second;
            }
            mass[u] += static_cast<double>(n);
        }
        for (std::size_t u = 0; u < out.size(); ++u) {
            for (double& x : out[u]) {
                x = mass[u] > 0 ? x / mass[u] : 0;
            }
        }
        return out;
    }

private:
    GraphSnapshot g_;
    AdjacencyMap adj_;
    std::unordered_map<VertexId, std::size_t> dense_;
};

double max_tvd(Tally const& t, std::vector<std::vector<double>> const& law)
{
    double worst = 0;
    for (std::size_t u = 0; u < t.succ.size(); ++u) {
        double n = 0;
        for (auto x : t.succ[u]) {
            n += static_cast<double>(x);
        }
        if (n == 0) {
            continue;
        }
        std::vector<double> freq;
        for (auto x : t.succ[u]) {
            freq.push_back(static_cast<double>(x) / n);
        }
        worst = std::max(worst, total_variation(freq, law[u]));
    }
    return worst;
}

}  // namespace

VerifyReport verify_indistinguishability(VerifyConfig const& cfg, std::span<const Edge> initial,
                                         std::span<const EdgeBatch> batches)
{
    VerifyReport report;
    report.pass = true;
    GraphSnapshot const start = GraphSnapshot::from_edges(initial);
    for (WalkModel const& model : cfg.models) {
        CorpusConfig cc;
        cc.walks_per_vertex = cfg.walks_per_vertex;
        cc.length = cfg.length;
        cc.model = model;
        cc.validate();

        // The final graph does not depend on the corpus seed.
        GraphSnapshot end = start;
        for (auto const& b : batches) {
            end = apply_edge_batch(end, b, {0, nullptr}).graph;
        }
        FinalGraph const fin(end);
        bool const by_state = model.order() == 2;

        unsigned const blocks = block_count(cfg.seeds, cfg.threads);
        std::vector<Tally> upd(blocks, Tally(fin.adj()));
        std::vector<Tally> scr(blocks, Tally(fin.adj()));
        parallel_blocks(cfg.seeds, cfg.threads, [&](std::size_t b, std::size_t e, unsigned worker) {
            for (std::size_t s = b; s < e; ++s) {
                CorpusConfig run = cc;
                run.seed = cfg.seed * 1000003 + s;
                Corpus c = generate_corpus(start, run);
                for (auto const& batch : batches) {
                    c = apply_update(c, batch, MergePolicy{}).corpus;
                }
                fin.count(materialize_walks(c), upd[worker], by_state);

                run.seed += cfg.seeds;
                fin.count(materialize_walks(generate_corpus(end, run)), scr[worker], by_state);
            }
        });
        Tally u(fin.adj());
        Tally f(fin.adj());
        for (unsigned i = 0; i < blocks; ++i) {
            u.add(upd[i]);
            f.add(scr[i]);
        }

        ModelVerdict v;
        v.model = model.name();
        v.max_tvd_updated = max_tvd(u, fin.expected(model, u));
        v.max_tvd_scratch = max_tvd(f, fin.expected(model, f));
        // Successor draws are i.i.d. only given the walk state: the vertex for first-order models,
        // (previous, current) for second-order ones. Sparse cells would break the chi-square
        // approximation and are left out.
        auto test_cell = [&](std::vector<std::uint64_t> const& a, std::vector<std::uint64_t> const& b) {
            std::uint64_t const na = std::accumulate(a.begin(), a.end(), std::uint64_t{0});
            std::uint64_t const nb = std::accumulate(b.begin(), b.end(), std::uint64_t{0});
            if (std::min(na, nb) < cfg.min_cell_count * a.size()) {
                return;
            }
            ++v.cells;
            if (chi_square_homogeneity(a, b).p_value >= cfg.alpha) {
                ++v.cells_passing;
            }
        };
        if (by_state) {
            for (auto const& [state, a] : u.states) {
                auto const it = f.states.find(state);
                if (it != f.states.end()) {
                    test_cell(a, it->second);
                }
            }
        } else {
            for (std::size_t c = 0; c < u.succ.size(); ++c) {
                test_cell(u.succ[c], f.succ[c]);
            }
        }
        v.pass_rate = v.cells == 0 ? 1.0 : static_cast<double>(v.cells_passing) / static_cast<double>(v.cells);
        v.pass = v.max_tvd_updated <= cfg.tvd_max && v.max_tvd_scratch <= cfg.tvd_max &&
                 v.pass_rate >= cfg.cell_pass_rate;
        report.pass = report.pass && v.pass;
        report.models.push_back(std::move(v));
    }
    return report;
}

VerifyReport verify_indistinguishability(VerifyConfig const& cfg)
{
    auto const initial = uniform_graph(cfg.vertices, cfg.edges, cfg.seed);
    std::uniform_int_distribution<VertexId> pick(0, cfg.vertices - 1);
    EdgeStream stream(initial, [&](std::mt19937_64& r) { return Edge{pick(r), pick(r)}; }, cfg.delete_fraction,
                      cfg.seed + 1);
    std::vector<EdgeBatch> batches;
    for (std::size_t i = 0; i < cfg.batches; ++i) {
        batches.push_back(stream.next(cfg.batch_ops));
    }
    return verify_indistinguishability(cfg, initial, batches);
}

std::string to_json(ModelVerdict const& v)
{
    nlohmann::json j{
        {"model", v.model},
        {"cells", v.cells},
        {"max_tvd_updated", v.max_tvd_updated},
        {"max_tvd_scratch", v.max_tvd_scratch},
        {"cells_passing", v.cells_passing},
        {"pass_rate", v.pass_rate},
        {"pass", v.pass},
    };
    return j.dump();
}

// --- memory -----------------------------------------------------------------

std::string MemoryReport::to_json() const
{
    nlohmann::json j{
        {"engine", engine},
        {"graph_bytes", graph_bytes},
        {"walk_bytes", walk_bytes},
        {"index_bytes", index_bytes},
        {"total_bytes", total()},
    };
    return j.dump();
}

MemoryReport memory_report(Corpus const& c, std::string engine)
{
    MemoryReport r;
    r.engine = std::move(engine);
    r.graph_bytes = c.graph.edge_store_bytes();
    r.walk_bytes = c.graph.walk_store_bytes();
    return r;
}

MemoryReport memory_report(IIEngine const& ii)
{
    auto const m = ii.memory();
    MemoryReport r;
    r.engine = "ii";
    r.graph_bytes = m.graph_bytes;
    r.walk_bytes = m.walks_bytes;
    r.index_bytes = m.index_bytes;
    return r;
}

}  // namespace wharf
