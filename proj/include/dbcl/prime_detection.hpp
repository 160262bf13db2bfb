#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbcl/citest.hpp"

namespace dbcl {

struct DetectionConfig {
    int k_max = 3;
    double alpha = 0.01;
    int max_cond_size = 3;
};

void validate_config(const DetectionConfig& cfg);

struct DetectionResult {
    /// Chain nodes of every resolved variable; unresolved variables appear as a
    /// single order-0 node with the Unresolved role.
    std::vector<Node> nodes;
    std::map<std::string, std::optional<int>> primes;
    /// Retained difference variables (order >= 1): chain members of detected
    /// integral variables plus every order up to k_max of unresolved ones.
    std::set<VarId> retained;
    std::map<std::string, std::vector<ColumnRef>> separating_sets;
    /// Difference variables whose own-future test was issued, in issue order
    /// (one entry per variable, order and candidate pool).
    std::vector<VarId> tested;
    std::size_t query_count = 0;
    std::vector<std::string> warnings;
};

/// Prime-order search for `variables` driven by any CI procedure over
/// two-slice columns.
DetectionResult detect_primes(const std::vector<std::string>& variables, const DetectionConfig& cfg,
                              const CiTest& test);

/// Builds the two-slice table at k_max and runs the search with a Fisher z test.
DetectionResult detect_primes(const TimeSeriesDataset& data, const DetectionConfig& cfg);

/// Calls `visit` on every subset of `pool` of size `size` in lexicographic
/// index order until it returns true. Returns whether any call returned true.
template <typename Visit>
bool for_each_subset(int pool, int size, Visit&& visit) {
    if (size > pool) return false;
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    while (true) {
        if (visit(static_cast<const std::vector<int>&>(idx))) return true;
        int i = size - 1;
        while (i >= 0 && idx[i] == pool - size + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace dbcl
