#include "dbcl/citest.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

namespace dbcl {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;
constexpr double kMinResidualVariance = 1e-10;

double two_sided_critical(double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw Error("significance level must lie in (0, 1)");
    boost::math::normal standard;
    return boost::math::quantile(standard, 1.0 - alpha / 2.0);
}

}  // namespace

FisherZTest::FisherZTest(const TwoSliceDataset& data, double alpha)
    : n_(data.row_count()), alpha_(alpha), critical_(two_sided_critical(alpha)) {
    const auto& cols = data.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) index_.emplace(cols[i], static_cast<Eigen::Index>(i));
    if (n_ < 2) throw Error("too few rows for a correlation");
    Eigen::MatrixXd centered = data.rows().rowwise() - data.rows().colwise().mean();
    Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(n_ - 1);
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    constant_.assign(cols.size(), false);
    for (Eigen::Index i = 0; i < sd.size(); ++i) {
        // relative to the column's own magnitude so tiny-scale differences survive
        double scale = data.rows().col(i).cwiseAbs().maxCoeff();
        if (!(sd(i) > 1e-12 * std::max(scale, 1e-300))) constant_[i] = true;
    }
    corr_ = cov;
    for (Eigen::Index i = 0; i < sd.size(); ++i)
        for (Eigen::Index j = 0; j < sd.size(); ++j)
            corr_(i, j) = (constant_[i] || constant_[j]) ? 0.0 : cov(i, j) / (sd(i) * sd(j));
}

std::vector<Eigen::Index> FisherZTest::indices(std::span<const ColumnRef> z) const {
    std::vector<Eigen::Index> out;
    out.reserve(z.size());
    for (const auto& c : z) {
        auto it = index_.find(c);
        if (it == index_.end()) throw Error("unknown column " + c.name());
        out.push_back(it->second);
    }
    return out;
}

double FisherZTest::partial_correlation(Eigen::Index x, Eigen::Index y, std::span<const Eigen::Index> z) const {
    if (x == y) throw Error("partial correlation needs two distinct columns");
    if (constant_[x] || constant_[y]) throw DegenerateConditioning("constant column in query");
    for (auto c : z) {
        if (c == x || c == y) throw Error("conditioning set contains a queried column");
        if (constant_[c]) throw DegenerateConditioning("constant column in conditioning set");
    }
    if (z.empty()) return std::clamp(corr_(x, y), -1.0, 1.0);

    const auto k = static_cast<Eigen::Index>(z.size());
    Eigen::MatrixXd szz(k, k);
    Eigen::VectorXd szx(k), szy(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        szx(i) = corr_(z[i], x);
        szy(i) = corr_(z[i], y);
        for (Eigen::Index j = 0; j < k; ++j) szz(i, j) = corr_(z[i], z[j]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(szz);
    if (llt.info() != Eigen::Success || llt.rcond() < kMinReciprocalCondition)
        throw DegenerateConditioning("singular conditioning set");
    Eigen::VectorXd bx = llt.solve(szx), by = llt.solve(szy);
    double rxx = 1.0 - szx.dot(bx);
    double ryy = 1.0 - szy.dot(by);
    double rxy = corr_(x, y) - szx.dot(by);
    if (rxx < kMinResidualVariance || ryy < kMinResidualVariance)
        throw DegenerateConditioning("queried column is determined by the conditioning set");
    return std::clamp(rxy / std::sqrt(rxx * ryy), -1.0, 1.0);
}

double FisherZTest::partial_correlation(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const {
    auto ix = indices(std::span<const ColumnRef>(&x, 1))[0];
    auto iy = indices(std::span<const ColumnRef>(&y, 1))[0];
    auto iz = indices(z);
    return partial_correlation(ix, iy, iz);
}

double FisherZTest::p_value(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const {
    const double dof = static_cast<double>(n_) - static_cast<double>(z.size()) - 3.0;
    if (dof <= 0) throw Error(fmt::format("{} rows are too few for a conditioning set of size {}", n_, z.size()));
    double r = partial_correlation(x, y, z);
    if (std::abs(r) >= 1.0) return 0.0;
    double stat = std::abs(std::atanh(r)) * std::sqrt(dof);
    return std::erfc(stat / std::sqrt(2.0));
}

CiDecision FisherZTest::test(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const {
    const double dof = static_cast<double>(n_) - static_cast<double>(z.size()) - 3.0;
    if (dof <= 0) throw Error(fmt::format("{} rows are too few for a conditioning set of size {}", n_, z.size()));
    double r = 0.0;
    try {
        r = partial_correlation(x, y, z);
    } catch (const DegenerateConditioning&) {
        ++degenerate_;
        return CiDecision::Dependent;
    }
    if (std::abs(r) >= 1.0) return CiDecision::Dependent;
    double stat = std::abs(std::atanh(r)) * std::sqrt(dof);
    return stat > critical_ ? CiDecision::Dependent : CiDecision::Independent;
}

std::vector<std::string> FisherZTest::warnings() const {
    if (degenerate_count() == 0) return {};
    return {fmt::format("{} conditional-independence queries had degenerate conditioning and were decided as dependent",
                        degenerate_count())};
}

double partial_correlation(const TwoSliceDataset& data, const CiQuery& q) {
    if (data.row_count() <= static_cast<Eigen::Index>(q.z.size()) + 3)
        throw Error("row count must exceed conditioning size + 3");
    return FisherZTest(data, q.alpha).partial_correlation(q.x, q.y, q.z);
}

CiDecision ci_test(const TwoSliceDataset& data, const CiQuery& q) {
    return FisherZTest(data, q.alpha).test(q.x, q.y, q.z);
}

UnrolledGraph::UnrolledGraph(const Dbcm& model) {
    for (int slice : {0, 1})
        for (const auto& n : model.nodes) {
            index_.emplace(ColumnRef{n.id, slice}, static_cast<int>(nodes_.size()));
            nodes_.push_back({n.id, slice});
        }
    graph_ = Digraph(static_cast<int>(nodes_.size()));
    for (int slice : {0, 1})
        for (const auto& e : model.edges) {
            auto f = index_.find({e.from, slice}), t = index_.find({e.to, slice});
            if (f == index_.end() || t == index_.end())
                throw Error("edge " + e.from.name() + " -> " + e.to.name() + " references an unknown node");
            graph_.add_edge(f->second, t->second);
        }
    for (const auto& n : model.nodes) {
        if (n.role.kind != RoleKind::Integral) continue;
        const int target = index_.at({n.id, 1});
        graph_.add_edge(index_.at({n.id, 0}), target);
        auto diff = index_.find({{n.id.base, n.id.order + 1}, 0});
        if (diff == index_.end()) throw Error("integral variable " + n.id.name() + " has no difference node");
        graph_.add_edge(diff->second, target);
    }
    if (!topological_order(graph_)) throw Error("unrolled model has a contemporaneous cycle");
}

std::vector<int> UnrolledGraph::lookup(std::span<const ColumnRef> cs) const {
    std::vector<int> out;
    for (const auto& c : cs) {
        auto it = index_.find(c);
        if (it == index_.end()) throw Error("unknown node " + c.name());
        out.push_back(it->second);
    }
    return out;
}

bool UnrolledGraph::d_separated(std::span<const ColumnRef> xs, std::span<const ColumnRef> ys,
                                std::span<const ColumnRef> zs) const {
    return dbcl::d_separated(graph_, lookup(xs), lookup(ys), lookup(zs));
}

bool d_separation(const Dbcm& model, std::span<const ColumnRef> xs, std::span<const ColumnRef> ys,
                  std::span<const ColumnRef> zs) {
    return UnrolledGraph(model).d_separated(xs, ys, zs);
}

CiDecision DSeparationOracle::test(const ColumnRef& x, const ColumnRef& y, std::span<const ColumnRef> z) const {
    if (!unrolled_.contains(x) || !unrolled_.contains(y)) return CiDecision::Dependent;
    std::vector<ColumnRef> known;
    for (const auto& c : z)
        if (unrolled_.contains(c)) known.push_back(c);
    bool sep = unrolled_.d_separated(std::span<const ColumnRef>(&x, 1), std::span<const ColumnRef>(&y, 1), known);
    return sep ? CiDecision::Independent : CiDecision::Dependent;
}

}  // namespace dbcl
