#include "dbcl/graph.hpp"

#include <cassert>
#include <deque>
#include <stdexcept>

namespace dbcl {

MixedGraph::MixedGraph(int n) : n_(n), links_(static_cast<std::size_t>(n) * n, Link::None) {}

void MixedGraph::set(int a, int b, Link link) {
    links_[static_cast<std::size_t>(a) * n_ + b] = link;
    Link mirror = link;
    if (link == Link::Forward) mirror = Link::Backward;
    else if (link == Link::Backward) mirror = Link::Forward;
    links_[static_cast<std::size_t>(b) * n_ + a] = mirror;
}

void MixedGraph::add_undirected(int a, int b) {
    if (a == b) throw std::invalid_argument("self loop");
    set(a, b, Link::Undirected);
}

void MixedGraph::add_directed(int from, int to) {
    if (from == to) throw std::invalid_argument("self loop");
    set(from, to, Link::Forward);
}

void MixedGraph::orient(int from, int to) {
    assert(adjacent(from, to));
    set(from, to, Link::Forward);
}

void MixedGraph::make_undirected(int a, int b) {
    assert(adjacent(a, b));
    set(a, b, Link::Undirected);
}

void MixedGraph::remove(int a, int b) { set(a, b, Link::None); }

std::vector<int> MixedGraph::neighbors(int a) const {
    std::vector<int> out;
    for (int b = 0; b < n_; ++b)
        if (b != a && adjacent(a, b)) out.push_back(b);
    return out;
}

std::vector<int> MixedGraph::parents(int a) const {
    std::vector<int> out;
    for (int b = 0; b < n_; ++b)
        if (directed(b, a)) out.push_back(b);
    return out;
}

std::vector<int> MixedGraph::children(int a) const {
    std::vector<int> out;
    for (int b = 0; b < n_; ++b)
        if (directed(a, b)) out.push_back(b);
    return out;
}

std::vector<std::pair<int, int>> MixedGraph::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < n_; ++a)
        for (int b = a + 1; b < n_; ++b)
            if (adjacent(a, b)) out.emplace_back(a, b);
    return out;
}

std::size_t MixedGraph::edge_count() const { return edges().size(); }

void Digraph::add_edge(int from, int to) {
    parents[to].push_back(from);
    children[from].push_back(to);
}

std::optional<std::vector<int>> topological_order(const Digraph& g) {
    const int n = g.size();
    std::vector<int> indegree(n);
    for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(g.parents[v].size());
    std::deque<int> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    std::vector<int> order;
    while (!ready.empty()) {
        int v = ready.front();
        ready.pop_front();
        order.push_back(v);
        for (int c : g.children[v])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) return std::nullopt;
    return order;
}

std::vector<bool> nodes_on_cycles(const Digraph& g) {
    // v is on a cycle iff some child of v reaches v.
    std::vector<bool> out(g.size(), false);
    for (int v = 0; v < g.size(); ++v) {
        for (int c : g.children[v]) {
            if (c == v || has_directed_path(g, c, v)) {
                out[v] = true;
                break;
            }
        }
    }
    return out;
}

bool has_directed_path(const Digraph& g, int from, int to) {
    std::vector<bool> seen(g.size(), false);
    std::vector<int> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        for (int c : g.children[v]) {
            if (!seen[c]) {
                seen[c] = true;
                stack.push_back(c);
            }
        }
    }
    return false;
}

bool d_separated(const Digraph& g, const std::vector<int>& xs, const std::vector<int>& ys,
                 const std::vector<int>& zs) {
    const int n = g.size();
    std::vector<bool> in_z(n, false), in_y(n, false), z_ancestor(n, false);
    for (int z : zs) in_z[z] = true;
    for (int y : ys) in_y[y] = true;
    for (int x : xs)
        if (in_y[x]) return false;

    std::vector<int> stack(zs.begin(), zs.end());
    for (int z : zs) z_ancestor[z] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int p : g.parents[v]) {
            if (!z_ancestor[p]) {
                z_ancestor[p] = true;
                stack.push_back(p);
            }
        }
    }

    // (node, arrived_from_child): traversal in the "up" direction when true.
    std::vector<bool> visited_up(n, false), visited_down(n, false);
    std::vector<std::pair<int, bool>> frontier;
    for (int x : xs) frontier.emplace_back(x, true);
    while (!frontier.empty()) {
        auto [v, up] = frontier.back();
        frontier.pop_back();
        if (up ? visited_up[v] : visited_down[v]) continue;
        (up ? visited_up : visited_down)[v] = true;
        if (!in_z[v] && in_y[v]) return false;
        if (up && !in_z[v]) {
            for (int p : g.parents[v]) frontier.emplace_back(p, true);
            for (int c : g.children[v]) frontier.emplace_back(c, false);
        } else if (!up) {
            if (!in_z[v])
                for (int c : g.children[v]) frontier.emplace_back(c, false);
            if (z_ancestor[v])
                for (int p : g.parents[v]) frontier.emplace_back(p, true);
        }
    }
    return true;
}

Digraph directed_part(const MixedGraph& g) {
    Digraph d(g.size());
    for (int a = 0; a < g.size(); ++a)
        for (int b = 0; b < g.size(); ++b)
            if (g.directed(a, b)) d.add_edge(a, b);
    return d;
}

}  // namespace dbcl
