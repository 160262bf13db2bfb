#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "dbcl/core_model.hpp"

namespace dbcl {

/// Forward finite difference of the requested order; output length is
/// `series.size() - order`. Order 0 is the identity.
std::vector<double> difference(std::span<const double> series, int order);

/// A column of the two-slice table: variable (or difference) at slice 0 or 1.
struct ColumnRef {
    VarId var;
    int slice = 1;

    auto operator<=>(const ColumnRef&) const = default;
    std::string name() const;
};

/// Paired adjacent-time table: row r holds every column at time t (slice 0)
/// and t + 1 (slice 1) for one usable index t of one trajectory.
class TwoSliceDataset {
public:
    TwoSliceDataset(std::vector<ColumnRef> columns, Eigen::MatrixXd rows, std::vector<std::size_t> trajectory_of_row);

    const std::vector<ColumnRef>& columns() const { return columns_; }
    const Eigen::MatrixXd& rows() const { return rows_; }
    const std::vector<std::size_t>& trajectory_of_row() const { return trajectory_of_row_; }
    Eigen::Index row_count() const { return rows_.rows(); }

    bool has(const ColumnRef& c) const { return index_.count(c) > 0; }
    /// Throws dbcl::Error for an unknown column.
    Eigen::Index index_of(const ColumnRef& c) const;
    Eigen::VectorXd column(const ColumnRef& c) const { return rows_.col(index_of(c)); }

private:
    std::vector<ColumnRef> columns_;
    Eigen::MatrixXd rows_;
    std::vector<std::size_t> trajectory_of_row_;
    std::map<ColumnRef, Eigen::Index> index_;
};

/// Builds the two-slice table over every base variable plus the retained
/// difference variables (orders 1..max_order), both slices each. Each
/// trajectory contributes `len - max_order - 1` rows.
TwoSliceDataset build_two_slice(const TimeSeriesDataset& data, int max_order, const std::set<VarId>& retained);

/// All differences of orders 1..max_order of every variable.
std::set<VarId> all_differences(const std::vector<std::string>& variables, int max_order);

}  // namespace dbcl
