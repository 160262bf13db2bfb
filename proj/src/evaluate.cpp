#include "dbcl/evaluate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dbcl/graph.hpp"
#include "dbcl/structure.hpp"

namespace dbcl {

PatternGraph dbcm_pattern(const Dbcm& truth) {
    auto violations = validate_dbcm(truth);
    if (!violations.empty()) throw Error(fmt::format("invalid truth model: {}", fmt::join(violations, "; ")));
    std::map<VarId, int> index;
    for (const auto& n : truth.nodes) index.emplace(n.id, static_cast<int>(index.size()));
    const int n = static_cast<int>(truth.nodes.size());
    Digraph dag(n);
    MixedGraph g(n);
    for (const auto& e : truth.edges) {
        dag.add_edge(index.at(e.from), index.at(e.to));
        g.add_undirected(index.at(e.from), index.at(e.to));
    }
    for (const auto& e : truth.edges)
        if (is_integral(truth, e.from)) g.orient(index.at(e.from), index.at(e.to));
    for (int c = 0; c < n; ++c) {
        const auto& pa = dag.parents[c];
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!g.adjacent(pa[i], pa[j])) {
                    g.orient(pa[i], c);
                    g.orient(pa[j], c);
                }
    }
    propagate_orientations(g);

    PatternGraph pg;
    pg.nodes = truth.nodes;
    for (auto [a, b] : g.edges()) {
        const VarId &va = truth.nodes[a].id, &vb = truth.nodes[b].id;
        if (g.directed(a, b)) pg.edges.push_back({va, vb, Mark::Directed});
        else if (g.directed(b, a)) pg.edges.push_back({vb, va, Mark::Directed});
        else pg.edges.push_back({va, vb, Mark::Undirected});
    }
    return canonical(std::move(pg));
}

namespace {

using Pair = std::pair<VarId, VarId>;

Pair unordered(const VarId& a, const VarId& b) { return a < b ? Pair{a, b} : Pair{b, a}; }

// +1: first -> second, -1: second -> first, 0: undirected
std::map<Pair, int> edge_marks(const PatternGraph& g) {
    std::map<Pair, int> out;
    for (const auto& e : g.edges) {
        Pair p = unordered(e.a, e.b);
        int mark = e.mark == Mark::Undirected ? 0 : (p.first == e.a ? 1 : -1);
        out[p] = mark;
    }
    return out;
}

std::string edge_label(const Pair& p, int mark) {
    const char* arrow = mark == 0 ? "--" : (mark > 0 ? "->" : "<-");
    return fmt::format("{} {} {}", p.first.name(), arrow, p.second.name());
}

double percent(int count, int denominator) { return 100.0 * count / std::max(1, denominator); }

}  // namespace

EvalReport compare(const PatternGraph& learned, const Dbcm& truth) {
    std::set<std::string> lb, tb;
    for (const auto& n : learned.nodes) lb.insert(n.id.base);
    for (const auto& n : truth.nodes) tb.insert(n.id.base);
    if (lb != tb) {
        std::vector<std::string> only_l, only_t;
        std::set_difference(lb.begin(), lb.end(), tb.begin(), tb.end(), std::back_inserter(only_l));
        std::set_difference(tb.begin(), tb.end(), lb.begin(), lb.end(), std::back_inserter(only_t));
        throw Error(fmt::format("variable sets differ: only in learned [{}], only in truth [{}]",
                                fmt::join(only_l, ", "), fmt::join(only_t, ", ")));
    }

    EvalReport r;
    auto learned_orders = prime_orders(learned.nodes);
    auto true_orders = prime_orders(truth);
    for (const auto& [base, truth_order] : true_orders) {
        const auto& got = learned_orders.at(base);
        int want = truth_order.value_or(0);
        if (want == 0) {
            if (got.value_or(0) > 0) {
                ++r.static_with_chain;
                r.diagnostics.push_back(fmt::format("{}: static in truth, learned prime order {}", base, *got));
            }
            continue;
        }
        ++r.chain_variables;
        if (!got) {
            ++r.too_low;
            r.diagnostics.push_back(fmt::format("{}: unresolved, true prime order {}", base, want));
        } else if (*got < want) {
            ++r.too_low;
            r.diagnostics.push_back(fmt::format("{}: learned prime order {} below true {}", base, *got, want));
        } else if (*got > want) {
            ++r.too_high;
            r.diagnostics.push_back(fmt::format("{}: learned prime order {} above true {}", base, *got, want));
        }
    }
    r.pct_delta_low = r.chain_variables ? percent(r.too_low, r.chain_variables) : 0.0;
    r.pct_delta_hi = r.chain_variables ? percent(r.too_high, r.chain_variables) : 0.0;

    auto truth_marks = edge_marks(dbcm_pattern(truth));
    auto learned_marks = edge_marks(learned);
    r.true_edges = static_cast<int>(truth_marks.size());
    for (const auto& [pair, mark] : truth_marks) {
        auto it = learned_marks.find(pair);
        if (it == learned_marks.end()) {
            ++r.deleted;
            r.diagnostics.push_back("deleted " + edge_label(pair, mark));
        } else if (it->second != mark) {
            ++r.misoriented;
            r.diagnostics.push_back(
                fmt::format("misoriented {} (truth {})", edge_label(pair, it->second), edge_label(pair, mark)));
        }
    }
    for (const auto& [pair, mark] : learned_marks)
        if (!truth_marks.count(pair)) {
            ++r.added;
            r.diagnostics.push_back("added " + edge_label(pair, mark));
        }
    r.pct_e_del = percent(r.deleted, r.true_edges);
    r.pct_e_add = percent(r.added, r.true_edges);
    r.pct_o_err = percent(r.misoriented, r.true_edges);
    return r;
}

namespace {

std::vector<ColumnRef> table_columns(const std::vector<std::string>& variables, int k_max) {
    std::vector<ColumnRef> cols;
    for (int slice : {0, 1})
        for (const auto& v : variables)
            for (int k = 0; k <= k_max; ++k) cols.push_back({{v, k}, slice});
    std::sort(cols.begin(), cols.end());
    return cols;
}

PatternGraph to_pattern(const Skeleton& sk, const MixedGraph& g, const std::vector<Node>& nodes) {
    std::set<VarId> keep;
    for (const auto& n : nodes) keep.insert(n.id);
    PatternGraph pg;
    pg.nodes = nodes;
    for (auto [a, b] : g.edges()) {
        const ColumnRef &ca = sk.columns[a], &cb = sk.columns[b];
        if (ca.slice != 1 || cb.slice != 1 || !keep.count(ca.var) || !keep.count(cb.var)) continue;
        if (g.directed(a, b)) pg.edges.push_back({ca.var, cb.var, Mark::Directed});
        else if (g.directed(b, a)) pg.edges.push_back({cb.var, ca.var, Mark::Directed});
        else pg.edges.push_back({ca.var, cb.var, Mark::Undirected});
    }
    return canonical(std::move(pg));
}

}  // namespace

PatternGraph baseline_pc(const std::vector<std::string>& variables, int variant, const DetectionConfig& cfg,
                         const CiTest& test) {
    if (variant != 1 && variant != 2) throw Error("baseline variant must be 1 or 2");
    validate_config(cfg);
    auto sk = pc_skeleton(table_columns(variables, cfg.k_max), test, cfg.max_cond_size);
    auto oriented = pc_orient(sk, std::vector<bool>(sk.columns.size(), false));

    std::map<ColumnRef, int> index;
    for (std::size_t i = 0; i < sk.columns.size(); ++i) index[sk.columns[i]] = static_cast<int>(i);
    std::vector<Node> nodes;
    std::vector<std::string> warnings = oriented.warnings;
    std::vector<std::string> names = variables;
    std::sort(names.begin(), names.end());
    for (const auto& v : names) {
        std::optional<int> prime;
        for (int k = 0; k <= cfg.k_max && !prime; ++k)
            if (!sk.graph.adjacent(index.at({{v, k}, 0}), index.at({{v, k}, 1}))) prime = k;
        if (prime) {
            auto chain = chain_nodes(v, *prime);
            nodes.insert(nodes.end(), chain.begin(), chain.end());
        } else {
            nodes.push_back({{v, 0}, Role::unresolved()});
            warnings.push_back("no difference of " + v + " is separated from its own future");
        }
    }
    if (variant == 1) {
        // the search's slice-1 structure covers every precomputed difference,
        // including those outside any detected chain
        std::set<VarId> in_chain;
        for (const auto& n : nodes) in_chain.insert(n.id);
        for (const auto& c : sk.columns)
            if (c.slice == 1 && !in_chain.count(c.var)) nodes.push_back({c.var, Role::static_role()});
        auto pg = to_pattern(sk, oriented.graph, nodes);
        pg.warnings = std::move(warnings);
        return pg;
    }
    std::vector<ColumnRef> cols;
    for (const auto& n : nodes) cols.push_back({n.id, 1});
    std::sort(cols.begin(), cols.end());
    auto sk2 = pc_skeleton(std::move(cols), test, cfg.max_cond_size);
    auto o2 = pc_orient(sk2, std::vector<bool>(sk2.columns.size(), false));
    auto pg = to_pattern(sk2, o2.graph, nodes);
    warnings.insert(warnings.end(), o2.warnings.begin(), o2.warnings.end());
    pg.warnings = std::move(warnings);
    return pg;
}

PatternGraph baseline_pc(const TimeSeriesDataset& data, int variant, const DetectionConfig& cfg) {
    validate_dataset(data);
    validate_config(cfg);
    auto table = build_two_slice(data, cfg.k_max, all_differences(data.variables, cfg.k_max));
    FisherZTest test(table, cfg.alpha);
    auto pg = baseline_pc(data.variables, variant, cfg, test);
    for (auto& w : test.warnings()) pg.warnings.push_back(std::move(w));
    return pg;
}

Simulation benchmark_dataset(const BenchmarkSpec& spec, int index) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(index);
    if (spec.system == "sho") {
        ShoParams p = spec.sho;
        p.steps = spec.steps;
        p.seed = seed;
        return simulate_sho(p);
    }
    if (spec.system == "coupled-sho") {
        CoupledShoParams p = spec.coupled;
        p.steps = spec.steps;
        p.seed = seed;
        return simulate_coupled_sho(p);
    }
    if (spec.system == "random") {
        RandomDbcmOptions opt = spec.random;
        opt.seed = seed;
        Simulation sim;
        sim.truth = random_dbcm(opt);
        sim.data = sample_dbcm(sim.truth, spec.steps, seed, 1, 1000);
        return sim;
    }
    throw Error("unknown system '" + spec.system + "'");
}

PatternGraph run_learner(const std::string& learner, const Simulation& sim, const DetectionConfig& cfg) {
    if (learner == "dbcl") return learn_dbcm(sim.data, cfg);
    if (learner == "pc1") return baseline_pc(sim.data, 1, cfg);
    if (learner == "pc2") return baseline_pc(sim.data, 2, cfg);
    if (learner == "truth") return dbcm_pattern(sim.truth);
    throw Error("unknown learner '" + learner + "'");
}

EvalReport aggregate(const std::vector<EvalReport>& reports) {
    EvalReport m;
    if (reports.empty()) return m;
    for (const auto& r : reports) {
        m.pct_delta_low += r.pct_delta_low;
        m.pct_delta_hi += r.pct_delta_hi;
        m.pct_e_del += r.pct_e_del;
        m.pct_e_add += r.pct_e_add;
        m.pct_o_err += r.pct_o_err;
        m.chain_variables += r.chain_variables;
        m.too_low += r.too_low;
        m.too_high += r.too_high;
        m.static_with_chain += r.static_with_chain;
        m.true_edges += r.true_edges;
        m.deleted += r.deleted;
        m.added += r.added;
        m.misoriented += r.misoriented;
    }
    const double n = static_cast<double>(reports.size());
    m.pct_delta_low /= n;
    m.pct_delta_hi /= n;
    m.pct_e_del /= n;
    m.pct_e_add /= n;
    m.pct_o_err /= n;
    return m;
}

BenchmarkResult run_benchmark(const BenchmarkSpec& spec, const std::function<void(const DatasetReport&)>& on_dataset) {
    if (spec.n_datasets < 1) throw Error("benchmark needs at least one dataset");
    if (spec.learners.empty()) throw Error("benchmark needs at least one learner");
    validate_config(spec.cfg);
    BenchmarkResult result;
    std::map<std::string, std::vector<EvalReport>> by_learner;
    std::map<std::string, int> failed;
    for (int i = 0; i < spec.n_datasets; ++i) {
        const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(i);
        std::optional<Simulation> sim;
        try {
            sim = benchmark_dataset(spec, i);
        } catch (const Error& e) {
            result.failures.push_back(fmt::format("dataset {} (seed {}): {}", i, seed, e.what()));
            for (const auto& l : spec.learners) ++failed[l];
            continue;
        }
        for (const auto& learner : spec.learners) {
            try {
                DatasetReport dr{i, seed, learner, compare(run_learner(learner, *sim, spec.cfg), sim->truth)};
                by_learner[learner].push_back(dr.report);
                if (on_dataset) on_dataset(dr);
                result.per_dataset.push_back(std::move(dr));
            } catch (const Error& e) {
                result.failures.push_back(fmt::format("dataset {} (seed {}), {}: {}", i, seed, learner, e.what()));
                ++failed[learner];
            }
        }
    }
    for (const auto& learner : spec.learners) {
        BenchmarkRow row;
        row.learner = learner;
        row.mean = aggregate(by_learner[learner]);
        row.succeeded = static_cast<int>(by_learner[learner].size());
        row.failed = failed[learner];
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace dbcl
