#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dbcl/core_model.hpp"

namespace dbcl {

/// Damped harmonic oscillator. All equations are expressed in difference
/// units: D(x) = v * dt and D2(x) = a * dt^2.
struct ShoParams {
    double mass_mean = 1.0;
    double spring_k = 1.0;
    double damping_b = 0.4;
    double dt = 0.1;
    double noise_sd = 0.1;
    double g_const = 9.8;
    double x0 = 0.0;
    double v0 = 0.0;
    int steps = 5000;
    std::uint64_t seed = 0;
};

/// Two masses joined wall - spring - m1 - coupling spring - m2 - spring - wall,
/// each with its own damper.
struct CoupledShoParams {
    double mass1 = 1.0;
    double mass2 = 1.0;
    double spring_k1 = 1.0;
    double spring_k2 = 1.0;
    double coupling_k = 0.5;
    double damping_b1 = 0.4;
    double damping_b2 = 0.4;
    double dt = 0.1;
    double noise_sd = 0.1;
    double g_const = 9.8;
    double x1_0 = 0.0;
    double v1_0 = 0.0;
    double x2_0 = 0.0;
    double v2_0 = 0.0;
    int steps = 5000;
    std::uint64_t seed = 0;
};

struct Simulation {
    TimeSeriesDataset data;
    Dbcm truth;
};

/// Linear state-space form of a DBCM with equations. The state is the vector
/// of integral variables; s(t+1) = A s(t) + B e(t) + c with e ~ N(0, I), and
/// every node (in model.nodes order) equals L s + N e + k at the same step.
struct LinearDynamics {
    std::vector<VarId> state;
    Eigen::MatrixXd A, B;
    Eigen::VectorXd c;
    Eigen::MatrixXd L, N;
    Eigen::VectorXd k;
};

LinearDynamics linear_dynamics(const Dbcm& model);
double spectral_radius(const Eigen::MatrixXd& a);

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Stationary mean and covariance of every node (model.nodes order). Throws
/// when the one-step map is not stable.
Moments stationary_moments(const Dbcm& model);

Dbcm sho_model(const ShoParams& p);
Dbcm coupled_sho_model(const CoupledShoParams& p);

/// Throws dbcl::Error for invalid or unstable parameters.
void validate_params(const ShoParams& p);
void validate_params(const CoupledShoParams& p);

Simulation simulate_sho(const ShoParams& p);
Simulation simulate_coupled_sho(const CoupledShoParams& p);

/// Samples every node of `model` for `steps` consecutive steps (rows) after
/// discarding `burn_in` steps. Integral variables start at `initial` (zero
/// when absent).
Eigen::MatrixXd simulate_nodes(const Dbcm& model, int steps, std::uint64_t seed,
                               const std::map<VarId, double>& initial = {}, int burn_in = 0);

/// Observed dataset (base variables only) with one trajectory per seed offset.
TimeSeriesDataset sample_dbcm(const Dbcm& model, int steps, std::uint64_t seed, int trajectories = 1,
                              int burn_in = 0, const std::map<VarId, double>& initial = {});

struct RandomDbcmOptions {
    int n_static = 3;
    std::vector<int> chain_orders;
    double edge_density = 0.3;
    std::uint64_t seed = 0;
    int max_parents = 3;
    /// Give every chain member a feedback route to its prime and tune the
    /// coefficients so the one-step map is stable. When false the model is
    /// structural only and its equations may be unstable.
    bool enforce_stability = true;
    int max_attempts = 2000;
};

/// Linear-Gaussian DBCM with static variables s1.., chain variables x1..;
/// every coefficient has magnitude at least 0.2.
Dbcm random_dbcm(const RandomDbcmOptions& opt);

}  // namespace dbcl
