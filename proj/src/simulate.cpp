#include "dbcl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dbcl/graph.hpp"

namespace dbcl {

namespace {

std::vector<int> node_topological_order(const Dbcm& model, const std::map<VarId, int>& index) {
    Digraph g(static_cast<int>(model.nodes.size()));
    for (const auto& e : model.edges) g.add_edge(index.at(e.from), index.at(e.to));
    auto order = topological_order(g);
    if (!order) throw Error("model has a contemporaneous cycle");
    return *order;
}

void require_valid(const Dbcm& model) {
    auto violations = validate_dbcm(model);
    if (!violations.empty()) throw Error(fmt::format("invalid model: {}", fmt::join(violations, "; ")));
}

}  // namespace

LinearDynamics linear_dynamics(const Dbcm& model) {
    require_valid(model);
    std::map<VarId, int> index;
    for (const auto& n : model.nodes) index.emplace(n.id, static_cast<int>(index.size()));
    const int n = static_cast<int>(model.nodes.size());

    LinearDynamics d;
    std::map<VarId, int> state_index, noise_index;
    for (const auto& node : model.nodes) {
        if (node.role.kind == RoleKind::Integral) {
            state_index.emplace(node.id, static_cast<int>(d.state.size()));
            d.state.push_back(node.id);
        } else {
            if (!model.equations.count(node.id)) throw Error("variable " + node.id.name() + " has no equation");
            noise_index.emplace(node.id, static_cast<int>(noise_index.size()));
        }
    }
    const int ns = static_cast<int>(d.state.size()), ne = static_cast<int>(noise_index.size());
    d.L = Eigen::MatrixXd::Zero(n, ns);
    d.N = Eigen::MatrixXd::Zero(n, ne);
    d.k = Eigen::VectorXd::Zero(n);

    for (int v : node_topological_order(model, index)) {
        const Node& node = model.nodes[v];
        if (node.role.kind == RoleKind::Integral) {
            d.L(v, state_index.at(node.id)) = 1.0;
            continue;
        }
        const Equation& eq = model.equations.at(node.id);
        d.k(v) = eq.intercept;
        d.N(v, noise_index.at(node.id)) = eq.noise_sd;
        for (const auto& [parent, coef] : eq.coefficients) {
            int p = index.at(parent);
            d.L.row(v) += coef * d.L.row(p);
            d.N.row(v) += coef * d.N.row(p);
            d.k(v) += coef * d.k(p);
        }
    }

    d.A = Eigen::MatrixXd::Identity(ns, ns);
    d.B = Eigen::MatrixXd::Zero(ns, ne);
    d.c = Eigen::VectorXd::Zero(ns);
    for (int s = 0; s < ns; ++s) {
        int diff = index.at({d.state[s].base, d.state[s].order + 1});
        d.A.row(s) += d.L.row(diff);
        d.B.row(s) = d.N.row(diff);
        d.c(s) = d.k(diff);
    }
    return d;
}

double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Moments stationary_moments(const Dbcm& model) {
    auto d = linear_dynamics(model);
    const auto ns = static_cast<Eigen::Index>(d.state.size());
    if (spectral_radius(d.A) >= 1.0) throw Error("model dynamics are not stable");
    Eigen::VectorXd s_mean = Eigen::VectorXd::Zero(ns);
    Eigen::MatrixXd s_cov = Eigen::MatrixXd::Zero(ns, ns);
    if (ns > 0) {
        s_mean = (Eigen::MatrixXd::Identity(ns, ns) - d.A).fullPivLu().solve(d.c);
        // vec(S) = (I - A kron A)^-1 vec(B B^T)
        Eigen::MatrixXd kron(ns * ns, ns * ns);
        for (Eigen::Index i = 0; i < ns; ++i)
            for (Eigen::Index j = 0; j < ns; ++j) kron.block(i * ns, j * ns, ns, ns) = d.A(i, j) * d.A;
        Eigen::MatrixXd q = d.B * d.B.transpose();
        Eigen::VectorXd vec_q = Eigen::Map<Eigen::VectorXd>(q.data(), q.size());
        Eigen::VectorXd vec_s =
            (Eigen::MatrixXd::Identity(ns * ns, ns * ns) - kron).fullPivLu().solve(vec_q);
        s_cov = Eigen::Map<Eigen::MatrixXd>(vec_s.data(), ns, ns);
        s_cov = 0.5 * (s_cov + s_cov.transpose());
    }
    Moments m;
    m.mean = d.L * s_mean + d.k;
    m.cov = d.L * s_cov * d.L.transpose() + d.N * d.N.transpose();
    return m;
}

Eigen::MatrixXd simulate_nodes(const Dbcm& model, int steps, std::uint64_t seed,
                               const std::map<VarId, double>& initial, int burn_in) {
    if (steps < 1) throw Error("steps must be positive");
    if (burn_in < 0) throw Error("burn-in must be non-negative");
    auto d = linear_dynamics(model);
    const auto ns = static_cast<Eigen::Index>(d.state.size());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(ns);
    for (const auto& [id, value] : initial) {
        auto it = std::find(d.state.begin(), d.state.end(), id);
        if (it == d.state.end()) throw Error("initial value for non-integral variable " + id.name());
        s(it - d.state.begin()) = value;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd e(d.N.cols());
    Eigen::MatrixXd out(steps, static_cast<Eigen::Index>(model.nodes.size()));
    for (int t = 0; t < burn_in + steps; ++t) {
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
        if (t >= burn_in) out.row(t - burn_in) = (d.L * s + d.N * e + d.k).transpose();
        s = d.A * s + d.B * e + d.c;
    }
    return out;
}

TimeSeriesDataset sample_dbcm(const Dbcm& model, int steps, std::uint64_t seed, int trajectories, int burn_in,
                              const std::map<VarId, double>& initial) {
    if (trajectories < 1) throw Error("need at least one trajectory");
    TimeSeriesDataset data;
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        if (model.nodes[i].id.order == 0) {
            data.variables.push_back(model.nodes[i].id.base);
            cols.push_back(static_cast<Eigen::Index>(i));
        }
    for (int t = 0; t < trajectories; ++t) {
        Eigen::MatrixXd all = simulate_nodes(model, steps, seed + static_cast<std::uint64_t>(t), initial, burn_in);
        Trajectory traj{std::to_string(t), Eigen::MatrixXd(steps, static_cast<Eigen::Index>(cols.size()))};
        for (std::size_t c = 0; c < cols.size(); ++c) traj.values.col(static_cast<Eigen::Index>(c)) = all.col(cols[c]);
        data.trajectories.push_back(std::move(traj));
    }
    return data;
}

namespace {

void add_equation(Dbcm& m, const VarId& target, double intercept, double noise,
                  std::initializer_list<std::pair<VarId, double>> parents) {
    Equation eq{intercept, noise, {}};
    for (const auto& [p, c] : parents) {
        eq.coefficients[p] = c;
        m.edges.push_back({p, target});
    }
    m.equations[target] = eq;
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(what);
}

}  // namespace

Dbcm sho_model(const ShoParams& p) {
    Dbcm m;
    m.nodes = chain_nodes("x", 2);
    for (const char* s : {"F_x", "F_v", "m"}) m.nodes.push_back({{s, 0}, Role::static_role()});
    const VarId x{"x", 0}, dx{"x", 1}, ddx{"x", 2}, fx{"F_x", 0}, fv{"F_v", 0}, mass{"m", 0};
    const double c = 1.0 / p.mass_mean, dt2 = p.dt * p.dt;
    // the spring is pre-loaded by the mean weight so the rest position is x = 0
    add_equation(m, fx, p.mass_mean * p.g_const, p.noise_sd, {{x, -p.spring_k}});
    add_equation(m, fv, 0.0, p.noise_sd, {{dx, -p.damping_b / p.dt}});
    add_equation(m, mass, p.mass_mean, p.noise_sd, {});
    add_equation(m, ddx, 0.0, p.noise_sd * dt2, {{fx, dt2 * c}, {fv, dt2 * c}, {mass, -dt2 * c * p.g_const}});
    std::sort(m.edges.begin(), m.edges.end());
    return m;
}

void validate_params(const ShoParams& p) {
    require(p.mass_mean > 0, "mass_mean must be positive");
    require(p.spring_k > 0, "spring_k must be positive");
    require(p.damping_b >= 0, "damping_b must be non-negative");
    require(p.dt > 0, "dt must be positive");
    require(p.noise_sd >= 0, "noise_sd must be non-negative");
    require(p.steps >= 2, "steps must be at least 2");
    require(std::isfinite(p.x0) && std::isfinite(p.v0) && std::isfinite(p.g_const), "parameters must be finite");
    double rho = spectral_radius(linear_dynamics(sho_model(p)).A);
    if (rho >= 1.0) throw Error(fmt::format("unstable oscillator: one-step spectral radius {:.6f}", rho));
}

Simulation simulate_sho(const ShoParams& p) {
    validate_params(p);
    Simulation sim;
    sim.truth = sho_model(p);
    sim.data = sample_dbcm(sim.truth, p.steps, p.seed, 1, 0, {{{"x", 0}, p.x0}, {{"x", 1}, p.v0 * p.dt}});
    sim.data.sampling_interval = p.dt;
    return sim;
}

Dbcm coupled_sho_model(const CoupledShoParams& p) {
    Dbcm m;
    for (const char* x : {"x1", "x2"}) {
        auto chain = chain_nodes(x, 2);
        m.nodes.insert(m.nodes.end(), chain.begin(), chain.end());
    }
    std::vector<std::string> statics{"F_s1", "F_s2", "F_v1", "F_v2", "m1", "m2"};
    const bool coupled = p.coupling_k != 0.0;
    if (coupled) statics.push_back("F_c");
    for (const auto& s : statics) m.nodes.push_back({{s, 0}, Role::static_role()});

    const double dt2 = p.dt * p.dt;
    const VarId x1{"x1", 0}, x2{"x2", 0}, fc{"F_c", 0};
    struct Block {
        VarId x, dx, ddx, fs, fv, mass;
        double mass_mean, k, b, sign;
    };
    const Block blocks[] = {
        {x1, {"x1", 1}, {"x1", 2}, {"F_s1", 0}, {"F_v1", 0}, {"m1", 0}, p.mass1, p.spring_k1, p.damping_b1, 1.0},
        {x2, {"x2", 1}, {"x2", 2}, {"F_s2", 0}, {"F_v2", 0}, {"m2", 0}, p.mass2, p.spring_k2, p.damping_b2, -1.0},
    };
    if (coupled) add_equation(m, fc, 0.0, p.noise_sd, {{x1, -p.coupling_k}, {x2, p.coupling_k}});
    for (const auto& b : blocks) {
        const double c = 1.0 / b.mass_mean;
        add_equation(m, b.fs, b.mass_mean * p.g_const, p.noise_sd, {{b.x, -b.k}});
        add_equation(m, b.fv, 0.0, p.noise_sd, {{b.dx, -b.b / p.dt}});
        add_equation(m, b.mass, b.mass_mean, p.noise_sd, {});
        // F_c pulls m1 towards m2 and m2 towards m1
        if (coupled)
            add_equation(m, b.ddx, 0.0, p.noise_sd * dt2,
                         {{b.fs, dt2 * c}, {b.fv, dt2 * c}, {fc, b.sign * dt2 * c}, {b.mass, -dt2 * c * p.g_const}});
        else
            add_equation(m, b.ddx, 0.0, p.noise_sd * dt2,
                         {{b.fs, dt2 * c}, {b.fv, dt2 * c}, {b.mass, -dt2 * c * p.g_const}});
    }
    std::sort(m.edges.begin(), m.edges.end());
    return m;
}

void validate_params(const CoupledShoParams& p) {
    require(p.mass1 > 0 && p.mass2 > 0, "masses must be positive");
    require(p.spring_k1 > 0 && p.spring_k2 > 0, "spring constants must be positive");
    require(p.coupling_k >= 0, "coupling constant must be non-negative");
    require(p.damping_b1 >= 0 && p.damping_b2 >= 0, "damping must be non-negative");
    require(p.dt > 0, "dt must be positive");
    require(p.noise_sd >= 0, "noise_sd must be non-negative");
    require(p.steps >= 2, "steps must be at least 2");
    double rho = spectral_radius(linear_dynamics(coupled_sho_model(p)).A);
    if (rho >= 1.0) throw Error(fmt::format("unstable coupled oscillator: one-step spectral radius {:.6f}", rho));
}

Simulation simulate_coupled_sho(const CoupledShoParams& p) {
    validate_params(p);
    Simulation sim;
    sim.truth = coupled_sho_model(p);
    sim.data = sample_dbcm(sim.truth, p.steps, p.seed, 1, 0,
                           {{{"x1", 0}, p.x1_0}, {{"x1", 1}, p.v1_0 * p.dt}, {{"x2", 0}, p.x2_0},
                            {{"x2", 1}, p.v2_0 * p.dt}});
    sim.data.sampling_interval = p.dt;
    return sim;
}

namespace {

constexpr double kMinCoefficient = 0.2;

// Coefficients of mu^0..mu^{j-1} such that mu^j = sum a_i mu^i has the given roots.
std::vector<double> feedback_from_roots(const std::vector<double>& roots) {
    std::vector<double> poly{1.0};  // ascending powers of prod (mu - r)
    for (double r : roots) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= r * poly[i];
        }
        poly = std::move(next);
    }
    std::vector<double> a(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) a[i] = -poly[i];
    return a;
}

struct Draft {
    Dbcm model;
    std::map<VarId, std::vector<VarId>> parents;
    std::map<std::pair<VarId, VarId>, double> coef;
};

// Total causal effect of `source` on every node, following contemporaneous edges.
std::map<VarId, double> total_effects(const Draft& d, const VarId& source, const std::vector<VarId>& order) {
    std::map<VarId, double> te;
    te[source] = 1.0;
    for (const auto& v : order) {
        if (v == source) continue;
        double sum = 0.0;
        auto it = d.parents.find(v);
        if (it != d.parents.end())
            for (const auto& p : it->second) {
                auto t = te.find(p);
                if (t != te.end()) sum += d.coef.at({p, v}) * t->second;
            }
        if (sum != 0.0) te[v] = sum;
    }
    return te;
}

}  // namespace

Dbcm random_dbcm(const RandomDbcmOptions& opt) {
    if (opt.n_static < 0) throw Error("n_static must be non-negative");
    if (!(opt.edge_density >= 0 && opt.edge_density <= 1)) throw Error("edge_density must lie in [0, 1]");
    if (opt.max_parents < 0) throw Error("max_parents must be non-negative");
    for (int o : opt.chain_orders)
        if (o < 1) throw Error("chain orders must be at least 1");

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_coef = [&] {
        double mag = kMinCoefficient + 0.6 * unit(rng);
        return unit(rng) < 0.5 ? -mag : mag;
    };

    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        Draft d;
        std::vector<VarId> integrals, free_nodes, statics;
        std::vector<std::pair<std::string, int>> chains;
        for (int i = 0; i < opt.n_static; ++i) {
            VarId s{fmt::format("s{}", i + 1), 0};
            d.model.nodes.push_back({s, Role::static_role()});
            free_nodes.push_back(s);
            statics.push_back(s);
        }
        for (std::size_t c = 0; c < opt.chain_orders.size(); ++c) {
            std::string base = fmt::format("x{}", c + 1);
            for (const auto& n : chain_nodes(base, opt.chain_orders[c])) {
                d.model.nodes.push_back(n);
                (n.role.kind == RoleKind::Integral ? integrals : free_nodes).push_back(n.id);
            }
            chains.emplace_back(base, opt.chain_orders[c]);
        }
        std::shuffle(free_nodes.begin(), free_nodes.end(), rng);
        std::map<VarId, int> pos;
        for (std::size_t i = 0; i < free_nodes.size(); ++i) pos[free_nodes[i]] = static_cast<int>(i);

        auto add_edge = [&](const VarId& from, const VarId& to, double c) {
            d.parents[to].push_back(from);
            d.coef[{from, to}] = c;
        };
        auto has_edge = [&](const VarId& from, const VarId& to) { return d.coef.count({from, to}) > 0; };
        auto in_degree = [&](const VarId& v) {
            auto it = d.parents.find(v);
            return it == d.parents.end() ? 0 : static_cast<int>(it->second.size());
        };

        // designated feedback routes: member -> prime, or member -> mediator -> prime
        std::map<VarId, std::vector<VarId>> designated;  // prime -> designated parents
        if (opt.enforce_stability) {
            std::set<VarId> used;
            for (const auto& [base, order] : chains) {
                VarId prime{base, order};
                for (int i = 0; i < order; ++i) {
                    VarId member{base, i};
                    std::vector<VarId> mediators;
                    for (const auto& s : statics)
                        if (!used.count(s) && pos[s] < pos[prime] && in_degree(s) < opt.max_parents)
                            mediators.push_back(s);
                    if (!mediators.empty() && unit(rng) < 0.5) {
                        VarId s = mediators[static_cast<std::size_t>(unit(rng) * mediators.size()) % mediators.size()];
                        used.insert(s);
                        add_edge(member, s, draw_coef());
                        add_edge(s, prime, 0.0);
                        designated[prime].push_back(s);
                    } else {
                        add_edge(member, prime, 0.0);
                        designated[prime].push_back(member);
                    }
                }
            }
        }

        for (const auto& v : free_nodes) {
            std::vector<VarId> candidates = integrals;
            for (const auto& u : free_nodes)
                if (pos[u] < pos[v]) candidates.push_back(u);
            for (const auto& u : candidates) {
                if (in_degree(v) >= opt.max_parents) break;
                if (has_edge(u, v)) continue;
                if (unit(rng) < opt.edge_density) add_edge(u, v, draw_coef());
            }
        }

        bool ok = true;
        if (opt.enforce_stability) {
            std::vector<VarId> order = integrals;
            order.insert(order.end(), free_nodes.begin(), free_nodes.end());
            std::vector<std::pair<int, std::pair<std::string, int>>> by_pos;
            for (const auto& ch : chains) by_pos.push_back({pos[{ch.first, ch.second}], ch});
            std::sort(by_pos.begin(), by_pos.end());
            for (const auto& [_, ch] : by_pos) {
                const auto& [base, j] = ch;
                VarId prime{base, j};
                std::vector<double> roots(j);
                for (auto& r : roots) r = -0.2 - 1.3 * unit(rng);
                auto target = feedback_from_roots(roots);
                const auto& dp = designated[prime];
                Eigen::MatrixXd t(j, j);
                Eigen::VectorXd rhs(j);
                for (int i = 0; i < j; ++i) {
                    auto te = total_effects(d, {base, i}, order);
                    double fixed = 0.0;
                    for (const auto& p : d.parents[prime]) {
                        double e = te.count(p) ? te.at(p) : 0.0;
                        auto col = std::find(dp.begin(), dp.end(), p);
                        if (col != dp.end()) t(i, col - dp.begin()) = e;
                        else fixed += d.coef.at({p, prime}) * e;
                    }
                    rhs(i) = target[i] - fixed;
                }
                Eigen::FullPivLU<Eigen::MatrixXd> lu(t);
                if (!lu.isInvertible() || lu.rcond() < 1e-6) {
                    ok = false;
                    break;
                }
                Eigen::VectorXd w = lu.solve(rhs);
                for (int i = 0; i < j; ++i) {
                    if (std::abs(w(i)) < kMinCoefficient || std::abs(w(i)) > 20.0) ok = false;
                    d.coef[{dp[i], prime}] = w(i);
                }
                if (!ok) break;
            }
        }
        if (!ok) continue;

        for (const auto& [edge, c] : d.coef) {
            d.model.edges.push_back({edge.first, edge.second});
        }
        for (const auto& v : free_nodes) {
            Equation eq;
            eq.noise_sd = 0.5 + 0.5 * unit(rng);
            auto it = d.parents.find(v);
            if (it != d.parents.end())
                for (const auto& p : it->second) eq.coefficients[p] = d.coef.at({p, v});
            d.model.equations[v] = eq;
        }
        std::sort(d.model.edges.begin(), d.model.edges.end());
        if (opt.enforce_stability && spectral_radius(linear_dynamics(d.model).A) >= 0.98) continue;
        return d.model;
    }
    throw Error(fmt::format("no stable model found in {} attempts", opt.max_attempts));
}

}  // namespace dbcl
