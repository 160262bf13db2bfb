#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dbcl/core_model.hpp"

// Reference implementations used only by the tests. They favour obviousness
// over speed and share no code with the library algorithms they check.
namespace oracle {

struct Dag {
    int n = 0;
    std::set<std::pair<int, int>> edges;  // (from, to)

    bool has(int a, int b) const { return edges.count({a, b}) > 0; }
    bool adjacent(int a, int b) const { return has(a, b) || has(b, a); }
};

/// Every simple path between x and y in the skeleton, as node sequences.
std::vector<std::vector<int>> simple_paths(int n, const std::set<std::pair<int, int>>& undirected_pairs, int x, int y);

/// d-separation by listing all simple paths and applying the blocking rules.
bool d_separated(const Dag& g, int x, int y, const std::set<int>& z);

bool is_descendant(const Dag& g, int from, int to);  // from ->* to, via transitive closure

/// x[t + n] weighted by signed binomial coefficients.
double binomial_difference(const std::vector<double>& s, int n, std::size_t t);

/// Correlation of the least-squares residuals of x and y on [1, z].
double residual_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& z);

/// Pattern by enumeration: an edge is directed iff every acyclic orientation
/// of the truth's skeleton with the same v-structures, all integral edges
/// pointing out, agrees on its direction.
dbcl::PatternGraph enumerated_pattern(const dbcl::Dbcm& truth);

/// Unrolled two-slice DAG built directly from the definition: node ids are
/// (index in model.nodes) + slice * nodes.size().
Dag unrolled(const dbcl::Dbcm& model);

}  // namespace oracle
