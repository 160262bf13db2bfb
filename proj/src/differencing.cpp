#include "dbcl/differencing.hpp"

#include <fmt/format.h>

namespace dbcl {

std::vector<double> difference(std::span<const double> series, int order) {
    if (order < 0) throw Error("difference order must be non-negative");
    if (series.size() <= static_cast<std::size_t>(order))
        throw Error(fmt::format("series of length {} is too short for a difference of order {}", series.size(), order));
    std::vector<double> out(series.begin(), series.end());
    for (int k = 0; k < order; ++k) {
        for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
        out.pop_back();
    }
    return out;
}

std::string ColumnRef::name() const { return fmt::format("{}@{}", var.name(), slice); }

TwoSliceDataset::TwoSliceDataset(std::vector<ColumnRef> columns, Eigen::MatrixXd rows,
                                 std::vector<std::size_t> trajectory_of_row)
    : columns_(std::move(columns)), rows_(std::move(rows)), trajectory_of_row_(std::move(trajectory_of_row)) {
    if (rows_.cols() != static_cast<Eigen::Index>(columns_.size()))
        throw Error("two-slice table column count mismatch");
    if (trajectory_of_row_.size() != static_cast<std::size_t>(rows_.rows()))
        throw Error("two-slice table trajectory index mismatch");
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (!index_.emplace(columns_[i], static_cast<Eigen::Index>(i)).second)
            throw Error("duplicate two-slice column " + columns_[i].name());
}

Eigen::Index TwoSliceDataset::index_of(const ColumnRef& c) const {
    auto it = index_.find(c);
    if (it == index_.end()) throw Error("unknown two-slice column " + c.name());
    return it->second;
}

std::set<VarId> all_differences(const std::vector<std::string>& variables, int max_order) {
    std::set<VarId> out;
    for (const auto& v : variables)
        for (int i = 1; i <= max_order; ++i) out.insert({v, i});
    return out;
}

TwoSliceDataset build_two_slice(const TimeSeriesDataset& data, int max_order, const std::set<VarId>& retained) {
    validate_dataset(data);
    if (max_order < 0) throw Error("maximum difference order must be non-negative");
    for (const auto& r : retained) {
        if (r.order > max_order)
            throw Error(fmt::format("retained variable {} exceeds maximum order {}", r.name(), max_order));
        data.column_of(r.base);
    }

    std::vector<VarId> vars;
    for (const auto& v : data.variables) {
        vars.push_back({v, 0});
        for (int i = 1; i <= max_order; ++i)
            if (retained.count({v, i})) vars.push_back({v, i});
    }
    std::vector<ColumnRef> columns;
    for (int slice : {0, 1})
        for (const auto& v : vars) columns.push_back({v, slice});

    Eigen::Index total = 0;
    for (const auto& t : data.trajectories) {
        if (t.values.rows() <= max_order + 1)
            throw Error(fmt::format("trajectory '{}' of length {} is too short for difference order {}", t.id,
                                    t.values.rows(), max_order));
        total += t.values.rows() - max_order - 1;
    }

    const auto width = static_cast<Eigen::Index>(vars.size());
    Eigen::MatrixXd rows(total, 2 * width);
    std::vector<std::size_t> traj(static_cast<std::size_t>(total));
    Eigen::Index offset = 0;
    for (std::size_t ti = 0; ti < data.trajectories.size(); ++ti) {
        const auto& t = data.trajectories[ti];
        const Eigen::Index usable = t.values.rows() - max_order - 1;
        std::map<std::string, std::vector<std::vector<double>>> diffs;
        for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
            std::vector<double> series(t.values.rows());
            for (Eigen::Index r = 0; r < t.values.rows(); ++r) series[r] = t.values(r, c);
            auto& per_order = diffs[data.variables[c]];
            per_order.push_back(series);
            for (int i = 1; i <= max_order; ++i) per_order.push_back(difference(per_order.back(), 1));
        }
        for (Eigen::Index col = 0; col < width; ++col) {
            const auto& v = vars[col];
            const auto& series = diffs[v.base][v.order];
            for (Eigen::Index r = 0; r < usable; ++r) {
                rows(offset + r, col) = series[r];
                rows(offset + r, width + col) = series[r + 1];
            }
        }
        for (Eigen::Index r = 0; r < usable; ++r) traj[offset + r] = ti;
        offset += usable;
    }
    return TwoSliceDataset(std::move(columns), std::move(rows), std::move(traj));
}

}  // namespace dbcl
