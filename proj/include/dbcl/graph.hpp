#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace dbcl {

/// Index-based graph with at most one edge per node pair; each edge is either
/// undirected or directed. Used by the search, orientation and EMC code.
class MixedGraph {
public:
    enum class Link : std::uint8_t { None, Undirected, Forward, Backward };

    explicit MixedGraph(int n = 0);

    int size() const { return n_; }

    bool adjacent(int a, int b) const { return at(a, b) != Link::None; }
    bool undirected(int a, int b) const { return at(a, b) == Link::Undirected; }
    /// True iff the edge reads a -> b.
    bool directed(int a, int b) const { return at(a, b) == Link::Forward; }

    void add_undirected(int a, int b);
    void add_directed(int from, int to);
    /// Orients an existing edge as from -> to.
    void orient(int from, int to);
    void make_undirected(int a, int b);
    void remove(int a, int b);

    std::vector<int> neighbors(int a) const;
    std::vector<int> parents(int a) const;
    std::vector<int> children(int a) const;
    std::vector<std::pair<int, int>> edges() const;
    std::size_t edge_count() const;

    bool operator==(const MixedGraph&) const = default;

private:
    Link at(int a, int b) const { return links_[static_cast<std::size_t>(a) * n_ + b]; }
    void set(int a, int b, Link link);

    int n_;
    std::vector<Link> links_;
};

/// Directed graph as parent lists.
struct Digraph {
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<int>> children;

    explicit Digraph(int n = 0) : parents(n), children(n) {}
    int size() const { return static_cast<int>(parents.size()); }
    void add_edge(int from, int to);
};

/// Nodes in some topological order, or nullopt when the graph has a cycle.
std::optional<std::vector<int>> topological_order(const Digraph& g);

/// Nodes that lie on at least one directed cycle.
std::vector<bool> nodes_on_cycles(const Digraph& g);

bool has_directed_path(const Digraph& g, int from, int to);

/// d-separation of node sets xs and ys given zs (reachability formulation).
bool d_separated(const Digraph& g, const std::vector<int>& xs, const std::vector<int>& ys,
                 const std::vector<int>& zs);

/// The directed part of a mixed graph.
Digraph directed_part(const MixedGraph& g);

}  // namespace dbcl
