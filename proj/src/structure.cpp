#include "dbcl/structure.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace dbcl {

namespace {

std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

Skeleton pc_skeleton(std::vector<ColumnRef> columns, const CiTest& test, int max_cond_size,
                     const std::function<bool(int, int)>& forbidden) {
    if (max_cond_size < 0) throw Error("max_cond_size must be non-negative");
    Skeleton sk;
    sk.columns = std::move(columns);
    const int n = static_cast<int>(sk.columns.size());
    sk.graph = MixedGraph(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (forbidden && forbidden(a, b)) sk.forbidden.emplace_back(a, b);
            else sk.graph.add_undirected(a, b);
        }

    for (int level = 0; level <= max_cond_size; ++level) {
        const MixedGraph snapshot = sk.graph;
        bool any_candidate = false;
        std::vector<std::pair<int, int>> removals;
        for (auto [a, b] : snapshot.edges()) {
            std::vector<int> tried_from_a;
            bool separated = false;
            for (int side = 0; side < 2 && !separated; ++side) {
                const int from = side == 0 ? a : b, other = side == 0 ? b : a;
                std::vector<int> cand;
                for (int c : snapshot.neighbors(from))
                    if (c != other) cand.push_back(c);
                if (static_cast<int>(cand.size()) < level) continue;
                any_candidate = true;
                for_each_subset(static_cast<int>(cand.size()), level, [&](const std::vector<int>& idx) {
                    std::vector<int> z;
                    for (int j : idx) z.push_back(cand[j]);
                    // subsets already tried from the other endpoint
                    if (side == 1) {
                        std::vector<int> sorted = z;
                        std::sort(sorted.begin(), sorted.end());
                        bool within_a = std::all_of(sorted.begin(), sorted.end(), [&](int v) {
                            return std::find(tried_from_a.begin(), tried_from_a.end(), v) != tried_from_a.end();
                        });
                        if (within_a) return false;
                    }
                    std::vector<ColumnRef> zc;
                    for (int v : z) zc.push_back(sk.columns[v]);
                    ++sk.query_count;
                    if (test.test(sk.columns[a], sk.columns[b], zc) == CiDecision::Independent) {
                        std::sort(z.begin(), z.end());
                        sk.sepsets[key(a, b)] = z;
                        separated = true;
                        return true;
                    }
                    return false;
                });
                if (side == 0) tried_from_a = cand;
            }
            if (separated) removals.emplace_back(a, b);
        }
        for (auto [a, b] : removals) sk.graph.remove(a, b);
        if (!any_candidate) break;
    }
    return sk;
}

void propagate_orientations(MixedGraph& g, const std::set<std::pair<int, int>>& locked) {
    const int n = g.size();
    auto free_edge = [&](int a, int b) { return g.undirected(a, b) && !locked.count(key(a, b)); };
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (a == b || !free_edge(a, b)) continue;
                bool orient_ab = false;
                // a has a parent c not adjacent to b
                for (int c = 0; c < n && !orient_ab; ++c)
                    orient_ab = c != b && g.directed(c, a) && !g.adjacent(c, b);
                // a -> c -> b
                for (int c = 0; c < n && !orient_ab; ++c)
                    orient_ab = g.directed(a, c) && g.directed(c, b);
                // a -- c -> b and a -- d -> b with c, d non-adjacent
                for (int c = 0; c < n && !orient_ab; ++c) {
                    if (!g.undirected(a, c) || !g.directed(c, b)) continue;
                    for (int d = c + 1; d < n && !orient_ab; ++d)
                        orient_ab = g.undirected(a, d) && g.directed(d, b) && !g.adjacent(c, d);
                }
                // c -> d -> b with a adjacent to c and d, c not adjacent to b
                for (int d = 0; d < n && !orient_ab; ++d) {
                    if (!g.directed(d, b) || !g.adjacent(a, d)) continue;
                    for (int c = 0; c < n && !orient_ab; ++c)
                        orient_ab = c != a && c != b && g.directed(c, d) && g.adjacent(a, c) && !g.adjacent(c, b);
                }
                if (orient_ab) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
    }
}

Orientation pc_orient(const Skeleton& sk, const std::vector<bool>& out_only) {
    const int n = sk.graph.size();
    if (static_cast<int>(out_only.size()) != n) throw Error("role vector does not match skeleton size");
    Orientation out{sk.graph, {}};
    MixedGraph& g = out.graph;
    const bool mixed_slices = std::any_of(sk.columns.begin(), sk.columns.end(),
                                          [&](const ColumnRef& c) { return c.slice != sk.columns.front().slice; });
    auto label = [&](int v) { return mixed_slices ? sk.columns[v].name() : sk.columns[v].var.name(); };

    for (auto [a, b] : sk.graph.edges()) {
        if (out_only[a] && out_only[b]) {
            out.warnings.push_back(fmt::format("edge {} -- {} joins two integral variables", label(a), label(b)));
            continue;
        }
        if (out_only[a]) g.orient(a, b);
        else if (out_only[b]) g.orient(b, a);
    }

    std::set<std::pair<int, int>> locked;
    std::set<std::pair<int, int>> wanted;  // requested orientations from colliders
    for (int c = 0; c < n; ++c) {
        auto nb = sk.graph.neighbors(c);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                int a = nb[i], b = nb[j];
                if (sk.graph.adjacent(a, b)) continue;
                auto sep = sk.sepsets.find(key(a, b));
                if (sep == sk.sepsets.end()) continue;  // never tested: no evidence either way
                if (std::find(sep->second.begin(), sep->second.end(), c) != sep->second.end()) continue;
                wanted.insert({a, c});
                wanted.insert({b, c});
            }
    }
    for (auto [from, to] : wanted) {
        if (wanted.count({to, from})) {
            if (locked.insert(key(from, to)).second) {
                g.make_undirected(from, to);
                out.warnings.push_back(
                    fmt::format("conflicting collider orientations on {} -- {}; left undirected", label(from), label(to)));
            }
            continue;
        }
        if (out_only[to]) {
            out.warnings.push_back(fmt::format("collider at {} would point {} into an integral variable; skipped",
                                               label(to), label(from)));
            continue;
        }
        if (g.directed(to, from)) {
            out.warnings.push_back(
                fmt::format("collider at {} conflicts with orientation {} -> {}; left undirected", label(to), label(to),
                            label(from)));
            g.make_undirected(from, to);
            locked.insert(key(from, to));
            continue;
        }
        g.orient(from, to);
    }

    propagate_orientations(g, locked);

    auto cyclic = nodes_on_cycles(directed_part(g));
    bool reported = false;
    for (auto [a, b] : g.edges()) {
        if (cyclic[a] && cyclic[b] && !g.undirected(a, b)) {
            int from = g.directed(a, b) ? a : b, to = from == a ? b : a;
            if (!has_directed_path(directed_part(g), to, from)) continue;
            if (!reported) {
                out.warnings.push_back("directed cycle among learned orientations; cycle edges left undirected");
                reported = true;
            }
            if (!out_only[from]) g.make_undirected(a, b);
        }
    }
    return out;
}

Skeleton learn_skeleton(const std::vector<Node>& nodes, const CiTest& test, int max_cond_size) {
    std::vector<Node> sorted = nodes;
    std::sort(sorted.begin(), sorted.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    std::vector<ColumnRef> cols;
    std::vector<bool> integral;
    for (const auto& n : sorted) {
        cols.push_back({n.id, 1});
        integral.push_back(n.role.kind == RoleKind::Integral);
    }
    return pc_skeleton(std::move(cols), test, max_cond_size,
                       [&](int a, int b) { return integral[a] && integral[b]; });
}

PatternGraph orient(const Skeleton& skeleton, const std::vector<Node>& nodes) {
    std::map<VarId, Role> roles;
    for (const auto& n : nodes) roles[n.id] = n.role;
    std::vector<bool> integral;
    for (const auto& c : skeleton.columns) {
        auto it = roles.find(c.var);
        if (it == roles.end()) throw Error("skeleton column " + c.var.name() + " has no role");
        integral.push_back(it->second.kind == RoleKind::Integral);
    }
    auto o = pc_orient(skeleton, integral);
    PatternGraph pg;
    pg.nodes = nodes;
    pg.warnings = std::move(o.warnings);
    for (auto [a, b] : o.graph.edges()) {
        const VarId& va = skeleton.columns[a].var;
        const VarId& vb = skeleton.columns[b].var;
        if (o.graph.directed(a, b)) pg.edges.push_back({va, vb, Mark::Directed});
        else if (o.graph.directed(b, a)) pg.edges.push_back({vb, va, Mark::Directed});
        else pg.edges.push_back({va, vb, Mark::Undirected});
    }
    return canonical(std::move(pg));
}

std::vector<Node> structural_nodes(const DetectionResult& detection) { return detection.nodes; }

PatternGraph learn_dbcm(const std::vector<std::string>& variables, const DetectionConfig& cfg, const CiTest& test) {
    auto detection = detect_primes(variables, cfg, test);
    auto nodes = structural_nodes(detection);
    auto skeleton = learn_skeleton(nodes, test, cfg.max_cond_size);
    auto pattern = orient(skeleton, nodes);
    std::vector<std::string> warnings = detection.warnings;
    warnings.insert(warnings.end(), pattern.warnings.begin(), pattern.warnings.end());
    pattern.warnings = std::move(warnings);
    return pattern;
}

PatternGraph learn_dbcm(const TimeSeriesDataset& data, const DetectionConfig& cfg) {
    validate_dataset(data);
    validate_config(cfg);
    auto table = build_two_slice(data, cfg.k_max, all_differences(data.variables, cfg.k_max));
    FisherZTest test(table, cfg.alpha);
    auto pattern = learn_dbcm(data.variables, cfg, test);
    for (auto& w : test.warnings()) pattern.warnings.push_back(std::move(w));
    return pattern;
}

}  // namespace dbcl
