#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

std::vector<std::vector<int>> simple_paths(int n, const std::set<std::pair<int, int>>& pairs, int x, int y) {
    std::vector<std::vector<int>> out;
    std::vector<int> path{x};
    std::vector<bool> used(n, false);
    used[x] = true;
    std::function<void(int)> walk = [&](int v) {
        if (v == y) {
            out.push_back(path);
            return;
        }
        for (int w = 0; w < n; ++w) {
            if (used[w] || !(pairs.count({v, w}) || pairs.count({w, v}))) continue;
            used[w] = true;
            path.push_back(w);
            walk(w);
            path.pop_back();
            used[w] = false;
        }
    };
    walk(x);
    return out;
}

bool is_descendant(const Dag& g, int from, int to) {
    std::vector<std::vector<bool>> reach(g.n, std::vector<bool>(g.n, false));
    for (auto [a, b] : g.edges) reach[a][b] = true;
    for (int k = 0; k < g.n; ++k)
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    return reach[from][to];
}

bool d_separated(const Dag& g, int x, int y, const std::set<int>& z) {
    auto paths = simple_paths(g.n, g.edges, x, y);
    for (const auto& p : paths) {
        bool open = true;
        for (std::size_t i = 1; i + 1 < p.size() && open; ++i) {
            int prev = p[i - 1], v = p[i], next = p[i + 1];
            bool collider = g.has(prev, v) && g.has(next, v);
            if (collider) {
                bool activated = z.count(v) > 0;
                for (int w : z)
                    if (is_descendant(g, v, w)) activated = true;
                open = activated;
            } else {
                open = !z.count(v);
            }
        }
        if (open) return false;
    }
    return true;
}

double binomial_difference(const std::vector<double>& s, int n, std::size_t t) {
    double sum = 0.0;
    double c = 1.0;  // C(n, k)
    for (int k = 0; k <= n; ++k) {
        double sign = ((n - k) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * c * s[t + k];
        c = c * (n - k) / (k + 1);
    }
    return sum;
}

double residual_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
    const auto n = x.size();
    Eigen::MatrixXd design(n, z.cols() + 1);
    design.col(0).setOnes();
    if (z.cols() > 0) design.rightCols(z.cols()) = z;
    Eigen::VectorXd rx = x - design * design.colPivHouseholderQr().solve(x);
    Eigen::VectorXd ry = y - design * design.colPivHouseholderQr().solve(y);
    return rx.dot(ry) / std::sqrt(rx.squaredNorm() * ry.squaredNorm());
}

Dag unrolled(const dbcl::Dbcm& model) {
    const int n = static_cast<int>(model.nodes.size());
    std::map<dbcl::VarId, int> idx;
    for (int i = 0; i < n; ++i) idx[model.nodes[i].id] = i;
    Dag g;
    g.n = 2 * n;
    for (int slice = 0; slice < 2; ++slice)
        for (const auto& e : model.edges) g.edges.insert({idx.at(e.from) + slice * n, idx.at(e.to) + slice * n});
    for (int i = 0; i < n; ++i) {
        const auto& node = model.nodes[i];
        if (node.role.kind != dbcl::RoleKind::Integral) continue;
        g.edges.insert({i, i + n});                                               // V(t) -> V(t+1)
        g.edges.insert({idx.at({node.id.base, node.id.order + 1}), i + n});       // D(V)(t) -> V(t+1)
    }
    return g;
}

dbcl::PatternGraph enumerated_pattern(const dbcl::Dbcm& truth) {
    const int n = static_cast<int>(truth.nodes.size());
    std::map<dbcl::VarId, int> idx;
    for (int i = 0; i < n; ++i) idx[truth.nodes[i].id] = i;
    Dag dag;
    dag.n = n;
    for (const auto& e : truth.edges) dag.edges.insert({idx.at(e.from), idx.at(e.to)});
    std::vector<std::pair<int, int>> skeleton(dag.edges.begin(), dag.edges.end());
    if (skeleton.size() > 20) throw std::runtime_error("too many edges to enumerate");

    auto integral = [&](int v) { return truth.nodes[v].role.kind == dbcl::RoleKind::Integral; };
    auto v_structures = [&](const Dag& d) {
        std::set<std::tuple<int, int, int>> out;
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (d.has(a, c) && d.has(b, c) && !d.adjacent(a, b)) out.insert({a, c, b});
        return out;
    };
    auto acyclic = [&](const Dag& d) {
        for (int v = 0; v < n; ++v)
            if (is_descendant(d, v, v)) return false;
        return true;
    };
    const auto target = v_structures(dag);

    std::vector<int> forward(skeleton.size(), 0), backward(skeleton.size(), 0);
    const std::size_t m = skeleton.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        Dag d;
        d.n = n;
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            auto [a, b] = skeleton[i];
            bool flip = (mask >> i) & 1U;
            int from = flip ? b : a, to = flip ? a : b;
            if (integral(to)) ok = false;
            d.edges.insert({from, to});
        }
        if (!ok || !acyclic(d) || v_structures(d) != target) continue;
        for (std::size_t i = 0; i < m; ++i) ((mask >> i) & 1U ? backward : forward)[i]++;
    }

    dbcl::PatternGraph pg;
    pg.nodes = truth.nodes;
    for (std::size_t i = 0; i < m; ++i) {
        auto [a, b] = skeleton[i];
        const auto &va = truth.nodes[a].id, &vb = truth.nodes[b].id;
        if (backward[i] == 0) pg.edges.push_back({va, vb, dbcl::Mark::Directed});
        else if (forward[i] == 0) pg.edges.push_back({vb, va, dbcl::Mark::Directed});
        else pg.edges.push_back({va, vb, dbcl::Mark::Undirected});
    }
    return dbcl::canonical(pg);
}

}  // namespace oracle
