#include "dbcl/core_model.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "dbcl/graph.hpp"

namespace dbcl {

std::string VarId::name() const {
    if (order == 0) return base;
    return fmt::format("D{}({})", order, base);
}

VarId parse_var_id(const std::string& label) {
    if (label.size() > 3 && label[0] == 'D' && label.back() == ')') {
        auto open = label.find('(');
        if (open != std::string::npos && open > 1) {
            int order = 0;
            auto [ptr, ec] = std::from_chars(label.data() + 1, label.data() + open, order);
            if (ec == std::errc() && ptr == label.data() + open && order > 0)
                return {label.substr(open + 1, label.size() - open - 2), order};
        }
    }
    return {label, 0};
}

std::string to_string(RoleKind kind) {
    switch (kind) {
        case RoleKind::Static: return "static";
        case RoleKind::Integral: return "integral";
        case RoleKind::Prime: return "prime";
        case RoleKind::Unresolved: return "unresolved";
    }
    return "static";
}

RoleKind role_kind_from_string(const std::string& text) {
    if (text == "static") return RoleKind::Static;
    if (text == "integral") return RoleKind::Integral;
    if (text == "prime") return RoleKind::Prime;
    if (text == "unresolved") return RoleKind::Unresolved;
    throw Error("unknown role '" + text + "'");
}

std::vector<Node> chain_nodes(const std::string& base, int prime_order) {
    if (prime_order == 0) return {Node{{base, 0}, Role::static_role()}};
    std::vector<Node> out;
    for (int i = 0; i < prime_order; ++i) out.push_back({{base, i}, Role::integral(i)});
    out.push_back({{base, prime_order}, Role::prime(prime_order)});
    return out;
}

const Node* find_node(const Dbcm& model, const VarId& id) {
    for (const auto& n : model.nodes)
        if (n.id == id) return &n;
    return nullptr;
}

bool is_integral(const Dbcm& model, const VarId& id) {
    const Node* n = find_node(model, id);
    return n && n->role.kind == RoleKind::Integral;
}

std::vector<std::string> base_variables(const Dbcm& model) {
    std::set<std::string> names;
    for (const auto& n : model.nodes) names.insert(n.id.base);
    return {names.begin(), names.end()};
}

std::map<std::string, std::optional<int>> prime_orders(const std::vector<Node>& nodes) {
    std::map<std::string, std::optional<int>> out;
    for (const auto& n : nodes) out.emplace(n.id.base, 0);
    for (const auto& n : nodes) {
        if (n.role.kind == RoleKind::Prime) out[n.id.base] = n.role.order;
        else if (n.role.kind == RoleKind::Unresolved) out[n.id.base] = std::nullopt;
    }
    return out;
}

std::map<std::string, std::optional<int>> prime_orders(const Dbcm& model) { return prime_orders(model.nodes); }

namespace {

void check_chains(const std::vector<Node>& nodes, std::vector<std::string>& out) {
    std::map<std::string, std::vector<const Node*>> by_base;
    std::set<VarId> seen;
    for (const auto& n : nodes) {
        if (n.id.base.empty()) out.push_back("node with empty name");
        if (n.id.order < 0) out.push_back(fmt::format("node {} has negative order", n.id.name()));
        if (!seen.insert(n.id).second) out.push_back(fmt::format("duplicate node {}", n.id.name()));
        by_base[n.id.base].push_back(&n);
    }
    for (auto& [base, members] : by_base) {
        std::sort(members.begin(), members.end(),
                  [](const Node* a, const Node* b) { return a->id.order < b->id.order; });
        const Node* top = members.back();
        if (members.size() == 1 && top->id.order == 0 &&
            (top->role.kind == RoleKind::Static || top->role.kind == RoleKind::Unresolved))
            continue;
        bool ok = top->role.kind == RoleKind::Prime && top->role.order == top->id.order &&
                  static_cast<int>(members.size()) == top->id.order + 1;
        for (std::size_t i = 0; ok && i + 1 < members.size(); ++i) {
            const Node* m = members[i];
            ok = m->id.order == static_cast<int>(i) && m->role == Role::integral(static_cast<int>(i));
        }
        if (!ok) out.push_back(fmt::format("variable {} does not form a valid difference chain", base));
    }
}

}  // namespace

std::vector<std::string> validate_dbcm(const Dbcm& model) {
    std::vector<std::string> out;
    check_chains(model.nodes, out);

    std::map<VarId, int> index;
    for (const auto& n : model.nodes) index.emplace(n.id, static_cast<int>(index.size()));

    Digraph g(static_cast<int>(model.nodes.size()));
    std::set<std::pair<VarId, VarId>> seen_edges;
    for (const auto& e : model.edges) {
        auto label = fmt::format("{} -> {}", e.from.name(), e.to.name());
        auto f = index.find(e.from), t = index.find(e.to);
        if (f == index.end() || t == index.end()) {
            out.push_back("edge " + label + " references an unknown node");
            continue;
        }
        if (e.from == e.to) {
            out.push_back("self loop " + label);
            continue;
        }
        if (!seen_edges.insert({e.from, e.to}).second) {
            out.push_back("duplicate edge " + label);
            continue;
        }
        bool from_integral = is_integral(model, e.from), to_integral = is_integral(model, e.to);
        if (from_integral && to_integral) {
            out.push_back("edge " + label + " joins two integral variables");
            continue;
        }
        if (to_integral) {
            out.push_back("edge " + label + " points into integral variable " + e.to.name());
            continue;
        }
        g.add_edge(f->second, t->second);
    }
    auto on_cycle = nodes_on_cycles(g);
    std::vector<std::string> cyclic;
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        if (on_cycle[i]) cyclic.push_back(model.nodes[i].id.name());
    if (!cyclic.empty())
        out.push_back(fmt::format("contemporaneous cycle through {}", fmt::join(cyclic, ", ")));

    if (!model.equations.empty()) {
        for (const auto& n : model.nodes) {
            bool integral = n.role.kind == RoleKind::Integral;
            bool has_eq = model.equations.count(n.id) > 0;
            if (integral && has_eq)
                out.push_back("integral variable " + n.id.name() + " has a structural equation");
            if (!integral && !has_eq)
                out.push_back("variable " + n.id.name() + " has no structural equation");
        }
        for (const auto& [target, eq] : model.equations) {
            if (!index.count(target)) {
                out.push_back("equation for unknown variable " + target.name());
                continue;
            }
            if (eq.noise_sd < 0) out.push_back("negative noise sd for " + target.name());
            for (const auto& [parent, coef] : eq.coefficients) {
                (void)coef;
                if (!seen_edges.count({parent, target}))
                    out.push_back(fmt::format("coefficient {} -> {} has no matching edge", parent.name(),
                                              target.name()));
            }
        }
    }
    return out;
}

PatternGraph canonical(PatternGraph graph) {
    for (auto& e : graph.edges)
        if (e.mark == Mark::Undirected && e.b < e.a) std::swap(e.a, e.b);
    std::sort(graph.nodes.begin(), graph.nodes.end(),
              [](const Node& a, const Node& b) { return a.id < b.id; });
    std::sort(graph.edges.begin(), graph.edges.end(), [](const PatternEdge& x, const PatternEdge& y) {
        return std::tie(x.a, x.b, x.mark) < std::tie(y.a, y.b, y.mark);
    });
    return graph;
}

const Node* find_node(const PatternGraph& graph, const VarId& id) {
    for (const auto& n : graph.nodes)
        if (n.id == id) return &n;
    return nullptr;
}

std::vector<std::string> validate_pattern(const PatternGraph& graph) {
    std::vector<std::string> out;
    check_chains(graph.nodes, out);
    std::map<VarId, int> index;
    for (const auto& n : graph.nodes) index.emplace(n.id, static_cast<int>(index.size()));
    auto integral = [&](const VarId& id) {
        const Node* n = find_node(graph, id);
        return n && n->role.kind == RoleKind::Integral;
    };
    Digraph g(static_cast<int>(graph.nodes.size()));
    for (const auto& e : graph.edges) {
        auto label = fmt::format("{} {} {}", e.a.name(), e.mark == Mark::Directed ? "->" : "--", e.b.name());
        if (!index.count(e.a) || !index.count(e.b)) {
            out.push_back("edge " + label + " references an unknown node");
            continue;
        }
        if (integral(e.a) && integral(e.b)) out.push_back("edge " + label + " joins two integral variables");
        else if (integral(e.b) && e.mark == Mark::Directed) out.push_back("edge " + label + " points into an integral variable");
        else if ((integral(e.a) || integral(e.b)) && e.mark == Mark::Undirected)
            out.push_back("edge " + label + " at an integral variable is undirected");
        if (e.mark == Mark::Directed) g.add_edge(index[e.a], index[e.b]);
    }
    if (!topological_order(g)) out.push_back("directed part of the pattern has a cycle");
    return out;
}

Eigen::Index TimeSeriesDataset::column_of(const std::string& variable) const {
    auto it = std::find(variables.begin(), variables.end(), variable);
    if (it == variables.end()) throw Error("unknown variable '" + variable + "'");
    return it - variables.begin();
}

std::size_t TimeSeriesDataset::total_rows() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += static_cast<std::size_t>(t.values.rows());
    return n;
}

void validate_dataset(const TimeSeriesDataset& data) {
    if (data.variables.empty()) throw Error("dataset has no variables");
    std::set<std::string> names;
    for (const auto& v : data.variables) {
        if (v.empty()) throw Error("dataset has an empty variable name");
        if (!names.insert(v).second) throw Error("duplicate variable '" + v + "'");
    }
    if (!(data.sampling_interval > 0)) throw Error("sampling interval must be positive");
    if (data.trajectories.empty()) throw Error("dataset has no trajectories");
    for (const auto& t : data.trajectories) {
        if (t.values.cols() != static_cast<Eigen::Index>(data.variables.size()))
            throw Error(fmt::format("trajectory '{}' has {} columns, expected {}", t.id, t.values.cols(),
                                    data.variables.size()));
        if (t.values.rows() < 2) throw Error(fmt::format("trajectory '{}' has fewer than 2 rows", t.id));
        if (!t.values.allFinite()) throw Error(fmt::format("trajectory '{}' has missing values", t.id));
    }
}

}  // namespace dbcl
