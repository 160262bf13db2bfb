#include "dbcl/emc.hpp"

#include <map>

#include "dbcl/graph.hpp"

namespace dbcl {

std::string to_string(EmcClass c) {
    switch (c) {
        case EmcClass::Safe: return "emc-safe";
        case EmcClass::ViolationPossible: return "emc-violation-possible";
        case EmcClass::FeedbackEmpty: return "feedback-empty";
        case EmcClass::Undetermined: return "undetermined";
    }
    return "undetermined";
}

EmcClass emc_class_from_string(const std::string& text) {
    for (auto c : {EmcClass::Safe, EmcClass::ViolationPossible, EmcClass::FeedbackEmpty, EmcClass::Undetermined})
        if (to_string(c) == text) return c;
    throw Error("unknown EMC classification '" + text + "'");
}

namespace {

struct Indexed {
    std::map<VarId, int> index;
    MixedGraph graph;
};

Indexed index_pattern(const PatternGraph& g) {
    Indexed out;
    for (const auto& n : g.nodes) out.index.emplace(n.id, static_cast<int>(out.index.size()));
    out.graph = MixedGraph(static_cast<int>(out.index.size()));
    for (const auto& e : g.edges) {
        auto a = out.index.find(e.a), b = out.index.find(e.b);
        if (a == out.index.end() || b == out.index.end())
            throw Error("pattern edge references unknown node " + (a == out.index.end() ? e.a : e.b).name());
        if (e.mark == Mark::Directed) out.graph.add_directed(a->second, b->second);
        else out.graph.add_undirected(a->second, b->second);
    }
    return out;
}

VarId prime_of(const PatternGraph& g, const std::string& x) {
    if (!find_node(g, {x, 0})) throw Error("unknown variable " + x);
    for (const auto& n : g.nodes)
        if (n.id.base == x && n.role.kind == RoleKind::Prime) return n.id;
    throw Error("variable " + x + " has no prime variable");
}

}  // namespace

bool is_self_regulating(const PatternGraph& g, const std::string& x) {
    VarId prime = prime_of(g, x);
    auto ix = index_pattern(g);
    return ix.graph.adjacent(ix.index.at({x, 0}), ix.index.at(prime));
}

bool every_path_has_v_structure(const PatternGraph& pg, const VarId& from, const VarId& to, std::size_t budget) {
    auto ix = index_pattern(pg);
    auto fi = ix.index.find(from), ti = ix.index.find(to);
    if (fi == ix.index.end() || ti == ix.index.end()) throw Error("unknown node in path query");
    if (fi->second == ti->second) throw Error("path query needs two distinct nodes");
    const MixedGraph& g = ix.graph;
    const int n = g.size();
    std::vector<std::vector<int>> nbrs(n);
    for (int v = 0; v < n; ++v) nbrs[v] = g.neighbors(v);

    const int target = ti->second;
    std::vector<int> path{fi->second};
    std::vector<bool> on_path(n, false);
    on_path[fi->second] = true;
    std::size_t steps = 0;

    // Does appending v to the current path complete a v-structure among path nodes?
    auto closes_v_structure = [&](int v) {
        for (std::size_t i = 0; i < path.size(); ++i) {
            int p = path[i];
            if (g.directed(p, v)) {
                for (std::size_t j = i + 1; j < path.size(); ++j) {
                    int r = path[j];
                    if (g.directed(r, v) && !g.adjacent(p, r)) return true;
                }
            }
            if (g.directed(v, p)) {
                for (int r : path)
                    if (r != p && g.directed(r, p) && !g.adjacent(v, r)) return true;
            }
        }
        return false;
    };

    // Iterative DFS; each frame remembers which neighbour to try next.
    std::vector<std::size_t> next{0};
    while (!path.empty()) {
        int v = path.back();
        std::size_t& k = next.back();
        if (k == nbrs[v].size()) {
            on_path[v] = false;
            path.pop_back();
            next.pop_back();
            continue;
        }
        int w = nbrs[v][k++];
        if (on_path[w]) continue;
        if (++steps > budget) throw Error("path enumeration budget exceeded");
        if (closes_v_structure(w)) continue;
        if (w == target) return false;
        path.push_back(w);
        on_path[w] = true;
        next.push_back(0);
    }
    return true;
}

bool feedback_empty(const PatternGraph& g, const std::string& x, std::size_t budget) {
    return every_path_has_v_structure(g, {x, 0}, prime_of(g, x), budget);
}

EmcClass classify(bool self_regulating, bool feedback_empty) {
    if (self_regulating) return EmcClass::Safe;
    if (!feedback_empty) return EmcClass::ViolationPossible;
    return EmcClass::FeedbackEmpty;
}

EmcReport emc_report(const PatternGraph& g, std::size_t budget) {
    EmcReport report;
    std::map<std::string, bool> has_prime;
    for (const auto& n : g.nodes)
        if (n.role.kind == RoleKind::Prime) has_prime[n.id.base] = true;
    for (const auto& [x, _] : has_prime) {
        EmcEntry e;
        e.variable = x;
        e.self_regulating = is_self_regulating(g, x);
        try {
            e.feedback_empty = feedback_empty(g, x, budget);
            e.classification = classify(e.self_regulating, *e.feedback_empty);
        } catch (const Error&) {
            e.classification = e.self_regulating ? EmcClass::Safe : EmcClass::Undetermined;
            report.warnings.push_back("feedback-set search for " + x + " exceeded its path budget");
        }
        report.entries.push_back(std::move(e));
    }
    return report;
}

}  // namespace dbcl
