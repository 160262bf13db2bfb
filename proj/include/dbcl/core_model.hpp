#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dbcl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A base variable (order 0) or one of its forward differences (order n >= 1).
struct VarId {
    std::string base;
    int order = 0;

    auto operator<=>(const VarId&) const = default;

    bool is_difference() const { return order > 0; }
    /// Human-readable label: `x` for order 0, `D2(x)` for the second difference.
    std::string name() const;
};

/// Parses labels produced by VarId::name().
VarId parse_var_id(const std::string& label);

enum class RoleKind { Static, Integral, Prime, Unresolved };

/// Role of a contemporaneous node. For Integral and Prime nodes `order` is the
/// difference order of the node inside its base variable's chain.
struct Role {
    RoleKind kind = RoleKind::Static;
    int order = 0;

    bool operator==(const Role&) const = default;

    static Role static_role() { return {RoleKind::Static, 0}; }
    static Role integral(int order) { return {RoleKind::Integral, order}; }
    static Role prime(int order) { return {RoleKind::Prime, order}; }
    static Role unresolved() { return {RoleKind::Unresolved, 0}; }
};

std::string to_string(RoleKind kind);
RoleKind role_kind_from_string(const std::string& text);

struct Node {
    VarId id;
    Role role;

    bool operator==(const Node&) const = default;
};

struct DirectedEdge {
    VarId from;
    VarId to;

    auto operator<=>(const DirectedEdge&) const = default;
};

/// Linear structural equation `target := intercept + sum(coef * parent) + noise_sd * N(0,1)`.
struct Equation {
    double intercept = 0.0;
    double noise_sd = 0.0;
    std::map<VarId, double> coefficients;

    bool operator==(const Equation&) const = default;
};

/// A difference-based causal model over one time slice. Cross-temporal
/// structure is implied by the roles: every integral node V obeys
/// V(t+1) = V(t) + D(V)(t).
struct Dbcm {
    std::vector<Node> nodes;
    std::vector<DirectedEdge> edges;
    /// Only simulation models carry equations; one per non-integral node.
    std::map<VarId, Equation> equations;

    bool operator==(const Dbcm&) const = default;
};

/// Builds the nodes of a chain x, D1(x), ..., Dj(x) with Prime at order j.
/// `prime_order == 0` yields a single static node.
std::vector<Node> chain_nodes(const std::string& base, int prime_order);

const Node* find_node(const Dbcm& model, const VarId& id);
bool is_integral(const Dbcm& model, const VarId& id);

/// Base variable names (order-0 nodes), sorted.
std::vector<std::string> base_variables(const Dbcm& model);

/// Prime order per base variable: 0 for static variables, nullopt when unresolved.
std::map<std::string, std::optional<int>> prime_orders(const std::vector<Node>& nodes);
std::map<std::string, std::optional<int>> prime_orders(const Dbcm& model);

/// Returns one message per violated structural invariant; empty means valid.
std::vector<std::string> validate_dbcm(const Dbcm& model);

enum class Mark { Directed, Undirected };

/// For Mark::Directed the edge reads `a -> b`.
struct PatternEdge {
    VarId a;
    VarId b;
    Mark mark = Mark::Undirected;

    bool operator==(const PatternEdge&) const = default;
};

/// Partially directed contemporaneous graph plus the role annotations that
/// imply the cross-temporal chains.
struct PatternGraph {
    std::vector<Node> nodes;
    std::vector<PatternEdge> edges;
    std::vector<std::string> warnings;

    bool operator==(const PatternGraph&) const = default;
};

/// Sorts nodes and edges, orients undirected edge endpoints canonically.
PatternGraph canonical(PatternGraph graph);

const Node* find_node(const PatternGraph& graph, const VarId& id);

/// Returns one message per violated pattern invariant; empty means valid.
std::vector<std::string> validate_pattern(const PatternGraph& graph);

struct Trajectory {
    std::string id;
    /// rows = time steps, columns = variables
    Eigen::MatrixXd values;
};

struct TimeSeriesDataset {
    std::vector<std::string> variables;
    std::vector<Trajectory> trajectories;
    double sampling_interval = 1.0;

    Eigen::Index column_of(const std::string& variable) const;
    std::size_t total_rows() const;
};

/// Throws dbcl::Error describing the first violated dataset invariant.
void validate_dataset(const TimeSeriesDataset& data);

}  // namespace dbcl
