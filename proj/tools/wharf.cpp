#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include <wharf/harness.hpp>
#include <wharf/parallel.hpp>

using namespace wharf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct GraphOptions {
    std::string path;
    std::uint32_t scale = 10;
    double degree = 10;
    double skew = 0;  // 0: uniform quadrants
    std::uint64_t seed = 1;

    void add(CLI::App& app)
    {
        app.add_option("--graph", path, "edge list file (`src dst` per line); default: synthetic R-MAT graph");
        app.add_option("--scale", scale, "synthetic graph: log2 of the vertex count")->check(CLI::Range(1, 30));
        app.add_option("--degree", degree, "synthetic graph: average degree")->check(CLI::PositiveNumber);
        app.add_option("--skew", skew, "synthetic graph: skew s (bottom-right ~ s x top-left); 0 = uniform");
        app.add_option("--graph-seed", seed, "synthetic graph seed");
    }

    std::vector<Edge> load() const
    {
        if (!path.empty()) {
            return read_edge_list(path);
        }
        auto const m = static_cast<std::uint64_t>(std::llround(std::ldexp(degree, static_cast<int>(scale)) / 2));
        return rmat_generate(skew > 0 ? RmatParams::skewed(skew, scale, m, seed) : RmatParams::er(scale, m, seed));
    }
};

struct CorpusOptions {
    std::string model = "deepwalk";
    double p = 1;
    double q = 1;
    double alpha = 0.15;
    std::uint32_t nw = 10;
    std::uint32_t len = 80;
    std::uint32_t chunk_b = 32;
    std::uint64_t seed = 1;
    std::string engine = "wharf";
    unsigned threads = 1;

    void add(CLI::App& app)
    {
        app.add_option("--model", model, "walk model")->check(CLI::IsMember({"deepwalk", "node2vec", "ppr"}));
        app.add_option("--p", p, "node2vec return parameter");
        app.add_option("--q", q, "node2vec in-out parameter");
        app.add_option("--alpha", alpha, "ppr restart probability");
        app.add_option("--nw", nw, "walks per vertex");
        app.add_option("--len", len, "walk length");
        app.add_option("--chunk-b", chunk_b, "expected C-tree chunk size");
        app.add_option("--seed", seed, "walk seed");
        app.add_option("--engine", engine, "storage engine")->check(CLI::IsMember({"wharf", "ii", "tree"}));
        app.add_option("--threads", threads, "worker threads; 0 = all cores");
    }

    CorpusConfig config() const
    {
        CorpusConfig c;
        c.walks_per_vertex = nw;
        c.length = len;
        c.seed = seed;
        switch (parse_model_kind(model)) {
        case ModelKind::deepwalk: c.model = WalkModel::deepwalk(); break;
        case ModelKind::node2vec: c.model = WalkModel::node2vec(p, q); break;
        case ModelKind::ppr: c.model = WalkModel::ppr(alpha); break;
        }
        c.validate();
        return c;
    }

    ChunkParams chunk_params() const
    {
        ChunkParams cp;
        cp.b = chunk_b;
        if (engine == "tree") {
            // one node per element, fixed-width payload
            cp.b = 1;
            cp.codec = ChunkCodec::raw64;
        }
        return cp;
    }
};

struct StreamOptions {
    std::vector<std::string> batch_files;
    std::size_t batches = 0;
    std::size_t batch_size = 10000;
    double delete_fraction = 0;
    std::uint64_t seed = 7;
    std::string policy = "on-demand";
    std::string stats_path;
    std::string dump_path;

    void add(CLI::App& app)
    {
        app.add_option("--batch-file", batch_files, "batch files (`+ a b` / `- a b`), applied in order");
        app.add_option("--batches", batches, "synthetic batches (ignored with --batch-file)");
        app.add_option("--batch-size", batch_size, "operations per synthetic batch");
        app.add_option("--delete-fraction", delete_fraction, "share of deletions in synthetic batches")
            ->check(CLI::Range(0.0, 1.0));
        app.add_option("--stream-seed", seed, "synthetic batch seed");
        app.add_option("--policy", policy, "merge policy: on-demand, eager or every:k");
        app.add_option("--stats", stats_path, "per-batch JSON lines (default: stdout)");
        app.add_option("--dump", dump_path, "write the final corpus here");
    }

    std::vector<EdgeBatch> batches_for(std::vector<Edge> const& graph) const
    {
        std::vector<EdgeBatch> out;
        if (!batch_files.empty()) {
            for (auto const& f : batch_files) {
                out.push_back(read_batch_file(f));
            }
            return out;
        }
        VertexId top = 1;
        for (auto const& [a, b] : graph) {
            top = std::max({top, a, b});
        }
        std::uint32_t scale = 1;
        while (scale < 32 && (std::uint64_t{1} << scale) <= top) {
            ++scale;
        }
        RmatParams const up = RmatParams::updates(scale, seed);
        EdgeStream stream(graph, [up](std::mt19937_64& r) { return rmat_sample(up, r); }, delete_fraction, seed);
        for (std::size_t i = 0; i < batches; ++i) {
            out.push_back(stream.next(batch_size));
        }
        return out;
    }
};

// Uniform driver over the three storage engines.
class Runner {
public:
    virtual ~Runner() = default;
    virtual UpdateStats apply(EdgeBatch const& b) = 0;
    /// Brings the store to its compact state (merges pending walk-tree versions).
    virtual void settle() = 0;
    virtual MemoryReport memory() const = 0;
    virtual void dump(std::ostream& out) const = 0;
    virtual std::size_t live_walks() const = 0;
    /// Wall time to regenerate every walk from scratch on the current graph.
    virtual double regenerate_seconds() const = 0;
};

class TreeRunner : public Runner {
public:
    TreeRunner(std::vector<Edge> const& edges, CorpusOptions const& o, MergePolicy policy)
        : engine_(o.engine), policy_(policy), threads_(resolve_threads(o.threads))
    {
        ChunkParams const cp = o.chunk_params();
        corpus_ = generate_corpus(GraphSnapshot::from_edges(edges, cp, cp), o.config(), threads_);
    }

    UpdateStats apply(EdgeBatch const& b) override
    {
        auto r = apply_update(corpus_, b, policy_, threads_);
        corpus_ = std::move(r.corpus);
        return r.stats;
    }
    void settle() override { corpus_ = merge_corpus(corpus_, threads_); }
    MemoryReport memory() const override { return memory_report(corpus_, engine_); }
    void dump(std::ostream& out) const override { dump_corpus(out, corpus_); }
    std::size_t live_walks() const override { return corpus_.roster.live_count(); }
    double regenerate_seconds() const override
    {
        auto const t0 = Clock::now();
        auto const fresh = generate_corpus(corpus_.graph, corpus_.config, threads_);
        return seconds_since(t0);
    }

private:
    std::string engine_;
    MergePolicy policy_;
    unsigned threads_;
    Corpus corpus_;
};

class IIRunner : public Runner {
public:
    IIRunner(std::vector<Edge> const& edges, CorpusOptions const& o)
        : threads_(resolve_threads(o.threads)), ii_(edges, o.config(), threads_)
    {
    }

    UpdateStats apply(EdgeBatch const& b) override { return ii_.apply_batch(b).stats; }
    void settle() override {}
    MemoryReport memory() const override { return memory_report(ii_); }
    void dump(std::ostream& out) const override
    {
        auto const& walks = ii_.walks();
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
    std::size_t live_walks() const override { return ii_.roster().live_count(); }
    double regenerate_seconds() const override
    {
        std::vector<Edge> edges;
        for (VertexId v : ii_.graph().vertex_ids()) {
            auto const adj = ii_.graph().adjacency(v);
            for (std::size_t k = 0; k < adj.size(); ++k) {
                if (v < adj[k]) {
                    edges.emplace_back(v, adj[k]);
                }
            }
        }
        auto const t0 = Clock::now();
        IIEngine fresh(edges, ii_.config(), threads_);
        return seconds_since(t0);
    }

private:
    unsigned threads_;
    IIEngine ii_;
};

std::unique_ptr<Runner> make_runner(std::vector<Edge> const& edges, CorpusOptions const& o, MergePolicy policy)
{
    if (o.engine == "ii") {
        return std::make_unique<IIRunner>(edges, o);
    }
    return std::make_unique<TreeRunner>(edges, o, policy);
}

void write_dump(Runner const& r, std::string const& path)
{
    if (path.empty()) {
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    r.dump(out);
}

struct StreamOutcome {
    std::size_t batches = 0;
    std::size_t updated_walks = 0;
    double update_seconds = 0;
    double generate_seconds = 0;
    std::size_t initial_walks = 0;
};

StreamOutcome run_stream(GraphOptions const& g, CorpusOptions const& c, StreamOptions const& s, Runner*& keep,
                         std::unique_ptr<Runner>& owner)
{
    auto const edges = g.load();
    auto const policy = MergePolicy::parse(s.policy);
    auto const batches = s.batches_for(edges);

    StreamOutcome out;
    auto const t0 = Clock::now();
    owner = make_runner(edges, c, policy);
    out.generate_seconds = seconds_since(t0);
    out.initial_walks = owner->live_walks();
    keep = owner.get();

    std::ofstream file;
    std::ostream* stats = &std::cout;
    if (!s.stats_path.empty()) {
        file.open(s.stats_path);
        if (!file) {
            throw std::runtime_error("cannot write " + s.stats_path);
        }
        stats = &file;
    }
    for (auto const& b : batches) {
        UpdateStats const st = owner->apply(b);
        *stats << st.to_json_line() << '\n';
        out.updated_walks += st.affected_walks + st.fresh_walks;
        out.update_seconds += st.total_seconds;
        ++out.batches;
    }
    return out;
}

int cmd_rmat(GraphOptions const& g, std::string const& out_path)
{
    auto const edges = g.load();
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        out = &file;
    }
    for (auto const& [a, b] : edges) {
        *out << a << ' ' << b << '\n';
    }
    return 0;
}

int cmd_generate(GraphOptions const& g, CorpusOptions const& c, std::string const& dump_path)
{
    auto const edges = g.load();
    auto const t0 = Clock::now();
    auto runner = make_runner(edges, c, MergePolicy{});
    double const secs = seconds_since(t0);
    write_dump(*runner, dump_path);
    nlohmann::json j = nlohmann::json::parse(runner->memory().to_json());
    j["walks"] = runner->live_walks();
    j["generate_seconds"] = secs;
    std::cout << j.dump() << '\n';
    return 0;
}

int cmd_stream(GraphOptions const& g, CorpusOptions const& c, StreamOptions const& s)
{
    Runner* r = nullptr;
    std::unique_ptr<Runner> owner;
    run_stream(g, c, s, r, owner);
    r->settle();
    write_dump(*r, s.dump_path);
    std::cerr << r->memory().to_json() << '\n';
    return 0;
}

int cmd_bench(GraphOptions const& g, CorpusOptions const& c, StreamOptions const& s, std::string const& csv_path)
{
    Runner* r = nullptr;
    std::unique_ptr<Runner> owner;
    auto const o = run_stream(g, c, s, r, owner);
    r->settle();
    write_dump(*r, s.dump_path);
    double const regen = r->regenerate_seconds();

    std::ofstream file;
    std::ostream* csv = &std::cerr;
    if (!csv_path.empty()) {
        file.open(csv_path);
        csv = &file;
    }
    auto const mem = r->memory();
    *csv << "kind,engine,policy,batch_size,batches,walks,seconds,throughput_walks_per_s,latency_s_per_walk,"
            "walk_bytes,index_bytes,graph_bytes\n";
    auto row = [&](char const* kind, std::size_t batches, std::size_t walks, double secs) {
        double const thr = secs > 0 ? static_cast<double>(walks) / secs : 0;
        double const lat = walks > 0 ? secs / static_cast<double>(walks) : 0;
        *csv << kind << ',' << c.engine << ',' << s.policy << ',' << s.batch_size << ',' << batches << ',' << walks
             << ',' << secs << ',' << thr << ',' << lat << ',' << mem.walk_bytes << ',' << mem.index_bytes << ','
             << mem.graph_bytes << '\n';
    };
    row("generate", 0, o.initial_walks, o.generate_seconds);
    if (o.batches > 0) {
        row("update", o.batches, o.updated_walks, o.update_seconds);
    }
    // throughput floor: regenerating every walk after each batch
    row("regenerate", 0, r->live_walks(), regen);
    return 0;
}

int cmd_verify(VerifyConfig cfg, GraphOptions const& g, StreamOptions const& s,
               std::vector<std::string> const& models, CorpusOptions const& c)
{
    cfg.models.clear();
    for (auto const& m : models) {
        CorpusOptions one = c;
        one.model = m;
        cfg.models.push_back(one.config().model);
    }
    VerifyReport report;
    if (!g.path.empty()) {
        auto const edges = read_edge_list(g.path);
        std::vector<EdgeBatch> batches;
        for (auto const& f : s.batch_files) {
            batches.push_back(read_batch_file(f));
        }
        report = verify_indistinguishability(cfg, edges, batches);
    } else {
        report = verify_indistinguishability(cfg);
    }
    for (auto const& m : report.models) {
        std::cout << to_json(m) << '\n';
    }
    std::cout << (report.pass ? "PASS" : "FAIL") << '\n';
    return report.pass ? 0 : 1;
}

int cmd_ppr(GraphOptions const& g, CorpusOptions c, StreamOptions const& s, std::size_t top)
{
    c.model = "ppr";
    auto const edges = g.load();
    auto cfg = c.config();
    Corpus const initial = generate_corpus(GraphSnapshot::from_edges(edges), cfg, resolve_threads(c.threads));
    Corpus corpus = initial;
    for (auto const& b : s.batches_for(edges)) {
        corpus = apply_update(corpus, b, MergePolicy::parse(s.policy), resolve_threads(c.threads)).corpus;
    }
    auto const truth = pagerank(adjacency_map(corpus.graph), c.alpha);
    auto const updating = visit_frequencies(materialize_walks(corpus));
    auto const stale = visit_frequencies(materialize_walks(initial));
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> st;
    for (auto const& [v, x] : truth) {
        t.push_back(x);
        u.push_back(updating.count(v) ? updating.at(v) : 0);
        st.push_back(stale.count(v) ? stale.at(v) : 0);
    }
    std::vector<std::pair<double, VertexId>> ranked;
    for (auto const& [v, x] : truth) {
        ranked.emplace_back(x, v);
    }
    std::sort(ranked.rbegin(), ranked.rend());
    nlohmann::json rows = nlohmann::json::array();
    double worst = 0;
    for (std::size_t i = 0; i < std::min(top, ranked.size()); ++i) {
        VertexId const v = ranked[i].second;
        double const est = updating.count(v) ? updating.at(v) : 0;
        worst = std::max(worst, std::abs(est - ranked[i].first));
        rows.push_back({{"vertex", v}, {"exact", ranked[i].first}, {"estimate", est}});
    }
    nlohmann::json j{
        {"epoch", corpus.graph.epoch()},
        {"smape_updating", smape(u, t)},
        {"smape_static", smape(st, t)},
        {"max_abs_error_top", worst},
        {"top", rows},
    };
    std::cout << j.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random-walk corpus maintenance over streaming graphs"};
    app.require_subcommand(1);

    GraphOptions graph;
    CorpusOptions corpus;
    StreamOptions stream;
    std::string out_path;
    std::string csv_path;
    std::size_t top = 10;
    VerifyConfig vcfg;
    std::vector<std::string> models{"deepwalk", "node2vec"};

    auto* rmat = app.add_subcommand("rmat", "write a synthetic R-MAT edge list");
    graph.add(*rmat);
    rmat->add_option("-o,--out", out_path, "output file (default: stdout)");

    auto* gen = app.add_subcommand("generate", "generate a corpus and report its size");
    graph.add(*gen);
    corpus.add(*gen);
    gen->add_option("--dump", out_path, "write the corpus here");

    auto* str = app.add_subcommand("stream", "apply a batch stream, one stats line per batch");
    graph.add(*str);
    corpus.add(*str);
    stream.add(*str);

    auto* bench = app.add_subcommand("bench", "stream plus CSV throughput summary and regeneration floor");
    graph.add(*bench);
    corpus.add(*bench);
    stream.add(*bench);
    bench->add_option("--csv", csv_path, "CSV summary (default: stderr)");

    auto* verify = app.add_subcommand("verify", "statistical check: updated vs regenerated corpora");
    verify->add_option("--graph", graph.path, "edge list (default: uniform random graph)");
    verify->add_option("--batch-file", stream.batch_files, "batches applied to --graph");
    verify->add_option("--vertices", vcfg.vertices, "random graph vertices");
    verify->add_option("--edges", vcfg.edges, "random graph edges");
    verify->add_option("--batches", vcfg.batches, "random batches");
    verify->add_option("--batch-size", vcfg.batch_ops, "operations per random batch");
    verify->add_option("--nw", vcfg.walks_per_vertex, "walks per vertex");
    verify->add_option("--len", vcfg.length, "walk length");
    verify->add_option("--seeds", vcfg.seeds, "corpus seeds pooled");
    verify->add_option("--seed", vcfg.seed, "graph and batch seed");
    verify->add_option("--models", models, "models to check")->check(CLI::IsMember({"deepwalk", "node2vec", "ppr"}));
    CorpusOptions vmodel;
    vmodel.p = 0.5;
    vmodel.q = 2;
    verify->add_option("--p", vmodel.p, "node2vec return parameter");
    verify->add_option("--q", vmodel.q, "node2vec in-out parameter");
    verify->add_option("--alpha", vmodel.alpha, "ppr restart probability");
    verify->add_option("--threads", vcfg.threads, "worker threads");

    auto* ppr = app.add_subcommand("ppr", "PageRank from restart walks vs power iteration");
    graph.add(*ppr);
    corpus.add(*ppr);
    stream.add(*ppr);
    ppr->add_option("--top", top, "vertices listed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rmat->parsed()) {
            return cmd_rmat(graph, out_path);
        }
        if (gen->parsed()) {
            return cmd_generate(graph, corpus, out_path);
        }
        if (str->parsed()) {
            return cmd_stream(graph, corpus, stream);
        }
        if (bench->parsed()) {
            return cmd_bench(graph, corpus, stream, csv_path);
        }
        if (verify->parsed()) {
            return cmd_verify(vcfg, graph, stream, models, vmodel);
        }
        if (ppr->parsed()) {
            return cmd_ppr(graph, corpus, stream, top);
        }
    } catch (ParseError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
