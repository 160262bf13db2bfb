#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dbcl/citest.hpp"
#include "dbcl/graph.hpp"
#include "dbcl/prime_detection.hpp"

namespace dbcl {

/// Separating sets of removed pairs, keyed by node indices (smaller first).
using SepsetTable = std::map<std::pair<int, int>, std::vector<int>>;

struct Skeleton {
    std::vector<ColumnRef> columns;
    MixedGraph graph;
    SepsetTable sepsets;
    /// Pairs that were never tested because they may not be adjacent.
    std::vector<std::pair<int, int>> forbidden;
    std::size_t query_count = 0;
};

/// Level-synchronous PC adjacency search over `columns`. Each pair starts
/// adjacent unless `forbidden` says otherwise; conditioning sets are drawn from
/// the current neighbours of either endpoint.
Skeleton pc_skeleton(std::vector<ColumnRef> columns, const CiTest& test, int max_cond_size,
                     const std::function<bool(int, int)>& forbidden = {});

struct Orientation {
    MixedGraph graph;
    std::vector<std::string> warnings;
};

/// Orients a skeleton: edges out of nodes flagged in `out_only` first, then
/// unshielded colliders, then propagation to a fixpoint.
Orientation pc_orient(const Skeleton& skeleton, const std::vector<bool>& out_only);

/// Propagation closure (four orientation rules). Edges in `locked` stay undirected.
void propagate_orientations(MixedGraph& g, const std::set<std::pair<int, int>>& locked = {});

/// Skeleton search over the slice-1 columns of `nodes`; integral pairs are never tested.
Skeleton learn_skeleton(const std::vector<Node>& nodes, const CiTest& test, int max_cond_size);

/// Orientation under the role constraints, returned as a pattern over `nodes`.
PatternGraph orient(const Skeleton& skeleton, const std::vector<Node>& nodes);

/// Full pipeline with an arbitrary CI procedure (e.g. a d-separation oracle).
PatternGraph learn_dbcm(const std::vector<std::string>& variables, const DetectionConfig& cfg, const CiTest& test);

/// Full pipeline on data with a Fisher z test at cfg.alpha.
PatternGraph learn_dbcm(const TimeSeriesDataset& data, const DetectionConfig& cfg);

/// Nodes that take part in contemporaneous search: unresolved variables are
/// kept chainless and treated as static.
std::vector<Node> structural_nodes(const DetectionResult& detection);

}  // namespace dbcl
