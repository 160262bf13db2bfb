#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dbcl/evaluate.hpp"
#include "dbcl/structure.hpp"

using namespace dbcl;

namespace {

Dbcm line_of_statics(int n) {
    Dbcm m;
    for (int i = 0; i < n; ++i) m.nodes.push_back({{"a" + std::to_string(i), 0}, Role::static_role()});
    for (int i = 0; i + 1 < n; ++i) m.edges.push_back({m.nodes[i].id, m.nodes[i + 1].id});
    return m;
}

VarId renamed(const VarId& id) { return {"v_" + id.base, id.order}; }

Dbcm rename(const Dbcm& m) {
    Dbcm out;
    for (const auto& n : m.nodes) out.nodes.push_back({renamed(n.id), n.role});
    for (const auto& e : m.edges) out.edges.push_back({renamed(e.from), renamed(e.to)});
    for (const auto& [t, eq] : m.equations) {
        Equation e{eq.intercept, eq.noise_sd, {}};
        for (const auto& [p, c] : eq.coefficients) e.coefficients[renamed(p)] = c;
        out.equations[renamed(t)] = e;
    }
    return out;
}

PatternGraph rename(const PatternGraph& g) {
    PatternGraph out;
    for (const auto& n : g.nodes) out.nodes.push_back({renamed(n.id), n.role});
    for (const auto& e : g.edges) out.edges.push_back({renamed(e.a), renamed(e.b), e.mark});
    return out;
}

bool same_metrics(const EvalReport& a, const EvalReport& b) {
    return a.pct_delta_low == b.pct_delta_low && a.pct_delta_hi == b.pct_delta_hi && a.pct_e_del == b.pct_e_del &&
           a.pct_e_add == b.pct_e_add && a.pct_o_err == b.pct_o_err && a.deleted == b.deleted && a.added == b.added &&
           a.misoriented == b.misoriented;
}

}  // namespace

TEST_CASE("the truth's own pattern scores zero") {
    for (const Dbcm& m : {sho_model({}), coupled_sho_model({}), line_of_statics(5)}) {
        auto r = compare(dbcm_pattern(m), m);
        CHECK(r.pct_delta_low == 0);
        CHECK(r.pct_delta_hi == 0);
        CHECK(r.pct_e_del == 0);
        CHECK(r.pct_e_add == 0);
        CHECK(r.pct_o_err == 0);
        CHECK(r.diagnostics.empty());
    }
}

TEST_CASE("ten true edges, one missing") {
    Dbcm m = line_of_statics(11);
    auto p = dbcm_pattern(m);
    REQUIRE(p.edges.size() == 10);
    p.edges.erase(p.edges.begin() + 4);
    auto r = compare(p, m);
    CHECK(r.pct_e_del == doctest::Approx(10.0));
    CHECK(r.pct_e_add == 0.0);
    CHECK(r.pct_o_err == 0.0);
    CHECK(r.true_edges == 10);
}

TEST_CASE("added and misoriented edges are counted against the true edge count") {
    Dbcm m = sho_model({});
    auto p = dbcm_pattern(m);
    p.edges.push_back({{"F_x", 0}, {"m", 0}, Mark::Undirected});
    p.edges.push_back({{"F_v", 0}, {"m", 0}, Mark::Directed});
    for (auto& e : p.edges)
        if (e.a == VarId{"m", 0} && e.b == VarId{"x", 2}) e.mark = Mark::Undirected;
    auto r = compare(p, m);
    CHECK(r.true_edges == 5);
    CHECK(r.added == 2);
    CHECK(r.pct_e_add == doctest::Approx(40.0));
    CHECK(r.misoriented == 1);
    CHECK(r.pct_o_err == doctest::Approx(20.0));
}

TEST_CASE("prime order errors") {
    Dbcm m = sho_model({});
    PatternGraph low;
    low.nodes = chain_nodes("x", 1);
    for (const char* s : {"F_x", "F_v", "m"}) low.nodes.push_back({{s, 0}, Role::static_role()});
    auto r = compare(low, m);
    CHECK(r.pct_delta_low == 100.0);
    CHECK(r.pct_delta_hi == 0.0);

    PatternGraph high = low;
    high.nodes = chain_nodes("x", 3);
    for (const char* s : {"F_x", "F_v", "m"}) high.nodes.push_back({{s, 0}, Role::static_role()});
    CHECK(compare(high, m).pct_delta_hi == 100.0);

    PatternGraph unresolved = low;
    unresolved.nodes = {{{"x", 0}, Role::unresolved()}};
    for (const char* s : {"F_x", "F_v", "m"}) unresolved.nodes.push_back({{s, 0}, Role::static_role()});
    CHECK(compare(unresolved, m).pct_delta_low == 100.0);

    PatternGraph chained_static = dbcm_pattern(m);
    std::erase_if(chained_static.nodes, [](const Node& n) { return n.id.base == "m"; });
    auto mchain = chain_nodes("m", 1);
    chained_static.nodes.insert(chained_static.nodes.end(), mchain.begin(), mchain.end());
    auto rc = compare(chained_static, m);
    CHECK(rc.static_with_chain == 1);
    CHECK(rc.pct_delta_hi == 0.0);
}

TEST_CASE("mismatched variables are an error listing both sides") {
    Dbcm m = sho_model({});
    PatternGraph g;
    g.nodes = {{{"x", 0}, Role::static_role()}, {{"y", 0}, Role::static_role()}};
    try {
        compare(g, m);
        FAIL("expected an error");
    } catch (const Error& e) {
        std::string what = e.what();
        CHECK(what.find("only in learned [y]") != std::string::npos);
        CHECK(what.find("only in truth [F_v, F_x, m]") != std::string::npos);
    }
}

TEST_CASE("metrics are invariant under consistent renaming") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ShoParams p;
        p.seed = seed;
        p.steps = 1500;
        auto sim = simulate_sho(p);
        auto learned = baseline_pc(sim.data, 2, {});
        CHECK(same_metrics(compare(learned, sim.truth), compare(rename(learned), rename(sim.truth))));
    }
}

TEST_CASE("edgeless truth: the second baseline is edgeless, the first only joins precomputed differences") {
    RandomDbcmOptions opt;
    opt.n_static = 3;
    opt.edge_density = 0;
    Dbcm m = random_dbcm(opt);
    DSeparationOracle oracle(m);
    auto data = sample_dbcm(m, 3000, 4);
    CHECK(baseline_pc(base_variables(m), 2, {}, oracle).edges.empty());
    CHECK(baseline_pc(data, 2, {}).edges.empty());
    for (const auto& g : {baseline_pc(base_variables(m), 1, {}, oracle), baseline_pc(data, 1, {})}) {
        for (const auto& e : g.edges) CHECK((e.a.order > 0 || e.b.order > 0));
        CHECK(compare(g, m).pct_e_del == 0.0);
    }
    CHECK_THROWS_AS(baseline_pc(data, 3, {}), Error);
}

TEST_CASE("benchmark aggregate is the mean of per-dataset reports") {
    BenchmarkSpec spec;
    spec.n_datasets = 3;
    spec.steps = 1500;
    spec.seed = 11;
    int callbacks = 0;
    auto result = run_benchmark(spec, [&](const DatasetReport&) { ++callbacks; });
    CHECK(callbacks == 9);
    CHECK(result.failures.empty());
    REQUIRE(result.rows.size() == 3);
    for (const auto& row : result.rows) {
        std::vector<EvalReport> mine;
        for (const auto& d : result.per_dataset)
            if (d.learner == row.learner) mine.push_back(d.report);
        REQUIRE(mine.size() == 3);
        double e_add = 0;
        for (const auto& r : mine) e_add += r.pct_e_add;
        CHECK(row.mean.pct_e_add == doctest::Approx(e_add / 3));
        CHECK(row.succeeded == 3);
        CHECK(same_metrics(row.mean, aggregate(mine)));
    }
    auto again = run_benchmark(spec);
    for (std::size_t i = 0; i < result.rows.size(); ++i) CHECK(result.rows[i].mean == again.rows[i].mean);
}

TEST_CASE("identity learner on one dataset gives a zero row") {
    for (const char* system : {"sho", "coupled-sho", "random"}) {
        BenchmarkSpec spec;
        spec.system = system;
        spec.n_datasets = 1;
        spec.steps = 200;
        spec.learners = {"truth"};
        spec.random.chain_orders = {1, 2};
        auto r = run_benchmark(spec);
        REQUIRE(r.rows.size() == 1);
        const auto& mean = r.rows[0].mean;
        CHECK(r.rows[0].succeeded == 1);
        CHECK(mean.pct_delta_low == 0);
        CHECK(mean.pct_delta_hi == 0);
        CHECK(mean.pct_e_del == 0);
        CHECK(mean.pct_e_add == 0);
        CHECK(mean.pct_o_err == 0);
    }
}

TEST_CASE("failing datasets are counted and excluded") {
    BenchmarkSpec spec;
    spec.n_datasets = 2;
    spec.sho.damping_b = 0;
    spec.learners = {"truth"};
    auto r = run_benchmark(spec);
    CHECK(r.rows[0].failed == 2);
    CHECK(r.rows[0].succeeded == 0);
    CHECK(r.failures.size() == 2);
    spec.system = "nothing";
    CHECK(run_benchmark(spec).failures.size() == 2);
}

TEST_CASE("second baseline with the oracle on the oscillator") {
    // Regression anchors: the baseline keeps every true edge, joins x to
    // D1(x) and leaves the two integral edges undirected.
    Dbcm m = sho_model({});
    DSeparationOracle oracle(m);
    auto r = compare(baseline_pc(base_variables(m), 2, {}, oracle), m);
    CHECK(r.pct_delta_low == 0.0);
    CHECK(r.pct_delta_hi == 0.0);
    CHECK(r.deleted == 0);
    CHECK(r.added == 1);
    CHECK(r.misoriented == 2);
    CHECK(r.pct_e_add == doctest::Approx(20.0));
    CHECK(r.pct_o_err == doctest::Approx(40.0));
    auto dbcl = compare(learn_dbcm(base_variables(m), {}, oracle), m);
    CHECK(dbcl.deleted + dbcl.added + dbcl.misoriented == 0);
}
