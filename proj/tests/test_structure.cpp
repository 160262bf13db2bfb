#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "dbcl/evaluate.hpp"
#include "dbcl/structure.hpp"
#include "oracles.hpp"

using namespace dbcl;

namespace {

class RecordingTest final : public CiTest {
public:
    explicit RecordingTest(const CiTest& inner) : inner_(inner) {}
    CiDecision test(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const override {
        queries.push_back({x, y, {z.begin(), z.end()}});
        return inner_.test(x, y, z);
    }
    mutable std::vector<CiQuery> queries;

private:
    const CiTest& inner_;
};

Dbcm statics(const std::vector<std::string>& names, const std::vector<std::pair<std::string, std::string>>& edges) {
    Dbcm m;
    for (const auto& n : names) m.nodes.push_back({{n, 0}, Role::static_role()});
    for (const auto& [a, b] : edges) m.edges.push_back({{a, 0}, {b, 0}});
    return m;
}

bool has_edge(const PatternGraph& g, const VarId& a, const VarId& b, Mark mark) {
    for (const auto& e : g.edges) {
        if (e.mark != mark) continue;
        if (e.a == a && e.b == b) return true;
        if (mark == Mark::Undirected && e.a == b && e.b == a) return true;
    }
    return false;
}

Dbcm random_model(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RandomDbcmOptions opt;
    opt.seed = seed;
    opt.n_static = std::uniform_int_distribution<int>(0, 4)(rng);
    int chains = std::uniform_int_distribution<int>(opt.n_static == 0 ? 1 : 0, 3)(rng);
    for (int c = 0; c < chains; ++c) opt.chain_orders.push_back(std::uniform_int_distribution<int>(1, 3)(rng));
    opt.edge_density = std::uniform_real_distribution<double>(0.1, 0.6)(rng);
    opt.enforce_stability = false;
    return random_dbcm(opt);
}

const VarId x{"x", 0}, dx{"x", 1}, ddx{"x", 2}, fx{"F_x", 0}, fv{"F_v", 0}, mass{"m", 0};

}  // namespace

TEST_CASE("chain skeleton and its separating set") {
    Dbcm m = statics({"X", "Y", "Z"}, {{"X", "Y"}, {"Y", "Z"}});
    DSeparationOracle oracle(m);
    auto sk = learn_skeleton(m.nodes, oracle, 3);
    CHECK(sk.graph.edge_count() == 2);
    CHECK(sk.graph.adjacent(0, 1));
    CHECK(sk.graph.adjacent(1, 2));
    CHECK(sk.sepsets.size() == 1);
    CHECK(sk.sepsets.at({0, 2}) == std::vector<int>{1});
    auto p = orient(sk, m.nodes);
    CHECK(p.edges.size() == 2);
    for (const auto& e : p.edges) CHECK(e.mark == Mark::Undirected);
}

TEST_CASE("collider is oriented") {
    Dbcm m = statics({"C", "X", "Y"}, {{"X", "C"}, {"Y", "C"}});
    DSeparationOracle oracle(m);
    auto sk = learn_skeleton(m.nodes, oracle, 3);
    auto p = orient(sk, m.nodes);
    CHECK(has_edge(p, {"X", 0}, {"C", 0}, Mark::Directed));
    CHECK(has_edge(p, {"Y", 0}, {"C", 0}, Mark::Directed));
    CHECK(p.warnings.empty());
}

TEST_CASE("oscillator skeleton matches the true adjacencies and never tests x against D1(x)") {
    Dbcm m = sho_model({});
    DSeparationOracle oracle(m);
    RecordingTest rec(oracle);
    auto sk = learn_skeleton(m.nodes, rec, 3);
    std::set<std::pair<VarId, VarId>> adj;
    for (auto [a, b] : sk.graph.edges()) adj.insert(std::minmax(sk.columns[a].var, sk.columns[b].var));
    std::set<std::pair<VarId, VarId>> expected{std::minmax(x, fx), std::minmax(dx, fv), std::minmax(fx, ddx),
                                               std::minmax(fv, ddx), std::minmax(mass, ddx)};
    CHECK(adj == expected);
    for (const auto& q : rec.queries) {
        auto pair = std::minmax(q.x.var, q.y.var);
        CHECK_FALSE((pair.first == x && pair.second == dx));
        for (const auto& c : q.z) CHECK(c.slice == 1);
    }
    CHECK(sk.forbidden.size() == 1);
}

TEST_CASE("integral variables of different chains are never joined") {
    Dbcm m;
    for (const auto& n : chain_nodes("a", 1)) m.nodes.push_back(n);
    for (const auto& n : chain_nodes("b", 1)) m.nodes.push_back(n);
    m.nodes.push_back({{"s", 0}, Role::static_role()});
    m.edges = {{{"a", 0}, {"s", 0}}, {{"s", 0}, {"b", 1}}};
    REQUIRE(validate_dbcm(m).empty());
    DSeparationOracle oracle(m);
    RecordingTest rec(oracle);
    auto sk = learn_skeleton(m.nodes, rec, 3);
    for (const auto& q : rec.queries) CHECK_FALSE((q.x.var == VarId{"a", 0} && q.y.var == VarId{"b", 0}));
    auto p = orient(sk, m.nodes);
    CHECK_FALSE(has_edge(p, {"a", 0}, {"b", 0}, Mark::Undirected));
    CHECK(validate_pattern(p).empty());
}

TEST_CASE("oscillator orientation follows the integral and propagation rules") {
    Dbcm m = sho_model({});
    DSeparationOracle oracle(m);
    auto p = learn_dbcm(base_variables(m), {}, oracle);
    CHECK(p.edges.size() == 5);
    CHECK(has_edge(p, x, fx, Mark::Directed));
    CHECK(has_edge(p, dx, fv, Mark::Directed));
    CHECK(has_edge(p, fx, ddx, Mark::Directed));
    CHECK(has_edge(p, fv, ddx, Mark::Directed));
    CHECK(has_edge(p, mass, ddx, Mark::Directed));
    CHECK(p.warnings.empty());
    CHECK(p == dbcm_pattern(m));
}

TEST_CASE("propagation rules") {
    SUBCASE("no new v-structure") {
        MixedGraph g(3);
        g.add_directed(0, 1);
        g.add_undirected(1, 2);
        propagate_orientations(g);
        CHECK(g.directed(1, 2));
    }
    SUBCASE("acyclicity") {
        MixedGraph g(3);
        g.add_directed(0, 1);
        g.add_directed(1, 2);
        g.add_undirected(0, 2);
        propagate_orientations(g);
        CHECK(g.directed(0, 2));
    }
    SUBCASE("two colliding paths through a shared neighbour") {
        MixedGraph g(4);
        g.add_undirected(0, 1);
        g.add_undirected(0, 2);
        g.add_undirected(0, 3);
        g.add_directed(1, 3);
        g.add_directed(2, 3);
        propagate_orientations(g);
        CHECK(g.directed(0, 3));
        CHECK(g.undirected(0, 1));
    }
    SUBCASE("locked edges stay undirected") {
        MixedGraph g(3);
        g.add_directed(0, 1);
        g.add_undirected(1, 2);
        propagate_orientations(g, {{1, 2}});
        CHECK(g.undirected(1, 2));
    }
}

TEST_CASE("opposing collider requests leave the edge undirected with a warning") {
    // Separation facts that no DAG can satisfy: a-b-c-d path with both
    // (a, c) and (b, d) separated by the empty set.
    Skeleton sk;
    sk.columns = {{{"a", 0}, 1}, {{"b", 0}, 1}, {{"c", 0}, 1}, {{"d", 0}, 1}};
    sk.graph = MixedGraph(4);
    sk.graph.add_undirected(0, 1);
    sk.graph.add_undirected(1, 2);
    sk.graph.add_undirected(2, 3);
    sk.sepsets[{0, 2}] = {};
    sk.sepsets[{1, 3}] = {};
    sk.sepsets[{0, 3}] = {};
    auto o = pc_orient(sk, std::vector<bool>(4, false));
    CHECK(o.graph.undirected(1, 2));
    CHECK(o.graph.directed(0, 1));
    CHECK(o.graph.directed(3, 2));
    CHECK(o.warnings.size() == 1);
}

TEST_CASE("the enumerated pattern equals the constructed truth pattern") {
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 60; ++seed) {
        Dbcm m = random_model(seed);
        std::size_t contemporaneous = m.edges.size();
        if (contemporaneous > 12) continue;
        ++checked;
        INFO("seed " << seed);
        CHECK(dbcm_pattern(m) == oracle::enumerated_pattern(m));
    }
}

TEST_CASE("oracle learning returns the truth pattern of random models") {
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 120; ++seed) {
        Dbcm m = random_model(seed);
        if (base_variables(m).size() > 8) continue;
        ++checked;
        DSeparationOracle oracle(m);
        auto p = learn_dbcm(base_variables(m), {}, oracle);
        INFO("seed " << seed);
        CHECK(p == dbcm_pattern(m));
        CHECK(validate_pattern(p).empty());
    }
}

TEST_CASE("output does not depend on column order") {
    ShoParams params;
    params.seed = 3;
    params.steps = 3000;
    auto sim = simulate_sho(params);
    auto reference = learn_dbcm(sim.data, {});
    std::vector<Eigen::Index> perm{2, 0, 3, 1};
    TimeSeriesDataset shuffled;
    for (auto j : perm) shuffled.variables.push_back(sim.data.variables[static_cast<std::size_t>(j)]);
    for (const auto& t : sim.data.trajectories) {
        Eigen::MatrixXd v(t.values.rows(), t.values.cols());
        for (std::size_t j = 0; j < perm.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = t.values.col(perm[j]);
        shuffled.trajectories.push_back({t.id, v});
    }
    CHECK(learn_dbcm(shuffled, {}) == reference);
}

TEST_CASE("independent white noise gives an edgeless all-static pattern") {
    TimeSeriesDataset d;
    d.variables = {"a", "b", "c"};
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd v(4000, 3);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) v(i, j) = n01(rng);
    d.trajectories.push_back({"0", v});
    auto p = learn_dbcm(d, {});
    CHECK(p.edges.empty());
    for (const auto& n : p.nodes) CHECK(n.role == Role::static_role());
}
