#pragma once

#include <atomic>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dbcl/core_model.hpp"
#include "dbcl/differencing.hpp"
#include "dbcl/graph.hpp"

namespace dbcl {

enum class CiDecision { Independent, Dependent };

struct CiQuery {
    ColumnRef x;
    ColumnRef y;
    std::vector<ColumnRef> z;
    double alpha = 0.01;
};

/// Conditioning set (or x/y given it) is numerically singular.
class DegenerateConditioning : public Error {
public:
    using Error::Error;
};

/// Conditional-independence decision procedure shared by detection and search.
class CiTest {
public:
    virtual ~CiTest() = default;
    virtual CiDecision test(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const = 0;
    virtual std::vector<std::string> warnings() const { return {}; }
};

/// Gaussian partial-correlation test with Fisher's z transform. The
/// correlation matrix of every column is computed once; each query solves
/// its own small submatrix.
class FisherZTest final : public CiTest {
public:
    FisherZTest(const TwoSliceDataset& data, double alpha);

    CiDecision test(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const override;
    std::vector<std::string> warnings() const override;

    /// Throws DegenerateConditioning when the conditioning set is singular or
    /// x or y is (numerically) a linear function of it.
    double partial_correlation(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const;
    /// Two-sided p-value of the Fisher z statistic.
    double p_value(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const;

    double alpha() const { return alpha_; }
    std::size_t degenerate_count() const { return degenerate_.load(); }

private:
    double partial_correlation(Eigen::Index x, Eigen::Index y, std::span<const Eigen::Index> z) const;
    std::vector<Eigen::Index> indices(std::span<const ColumnRef> z) const;

    std::map<ColumnRef, Eigen::Index> index_;
    Eigen::MatrixXd corr_;
    std::vector<bool> constant_;
    Eigen::Index n_;
    double alpha_;
    double critical_;
    mutable std::atomic<std::size_t> degenerate_{0};
};

double partial_correlation(const TwoSliceDataset& data, const CiQuery& q);
/// Degenerate conditioning is decided as Dependent.
CiDecision ci_test(const TwoSliceDataset& data, const CiQuery& q);

/// The DBCM unrolled over slices 0 and 1: contemporaneous edges in both
/// slices, and for each integral node V the cross-temporal parents V@0 and
/// D(V)@0 of V@1. Slice-0 integral nodes are exogenous initial conditions.
class UnrolledGraph {
public:
    explicit UnrolledGraph(const Dbcm& model);

    bool contains(const ColumnRef& c) const { return index_.count(c) > 0; }
    /// Throws dbcl::Error for unknown nodes.
    bool d_separated(std::span<const ColumnRef> xs, std::span<const ColumnRef> ys,
                     std::span<const ColumnRef> zs) const;
    const Digraph& graph() const { return graph_; }
    const std::vector<ColumnRef>& nodes() const { return nodes_; }

private:
    std::vector<int> lookup(std::span<const ColumnRef> cs) const;

    std::vector<ColumnRef> nodes_;
    std::map<ColumnRef, int> index_;
    Digraph graph_;
};

bool d_separation(const Dbcm& model, std::span<const ColumnRef> xs, std::span<const ColumnRef> ys,
                  std::span<const ColumnRef> zs);

/// Perfect independence oracle for a known model. Queries about difference
/// columns the model does not contain are answered Dependent; such columns in
/// the conditioning set are ignored.
class DSeparationOracle final : public CiTest {
public:
    explicit DSeparationOracle(const Dbcm& model) : unrolled_(model) {}
    CiDecision test(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const override;

private:
    UnrolledGraph unrolled_;
};

}  // namespace dbcl
