#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dbcl/prime_detection.hpp"
#include "dbcl/simulate.hpp"

namespace dbcl {

struct EvalReport {
    double pct_delta_low = 0.0;
    double pct_delta_hi = 0.0;
    double pct_e_del = 0.0;
    double pct_e_add = 0.0;
    double pct_o_err = 0.0;

    int chain_variables = 0;
    int too_low = 0;
    int too_high = 0;
    /// Static variables in the truth that were given a derivative chain.
    int static_with_chain = 0;
    int true_edges = 0;
    int deleted = 0;
    int added = 0;
    int misoriented = 0;
    std::vector<std::string> diagnostics;

    bool operator==(const EvalReport&) const = default;
};

/// The truth's contemporaneous pattern under the role constraints: the true
/// skeleton with integral edges directed outward, the DAG's v-structures, and
/// the propagation closure.
PatternGraph dbcm_pattern(const Dbcm& truth);

/// Throws dbcl::Error listing the differing names when the base variable sets differ.
EvalReport compare(const PatternGraph& learned, const Dbcm& truth);

/// Unconstrained PC baselines. Variant 1 runs one pass over the full two-slice
/// table; variant 2 reuses its prime orders and reruns PC on the slice-1
/// columns of the detected chains.
PatternGraph baseline_pc(const TimeSeriesDataset& data, int variant, const DetectionConfig& cfg);
PatternGraph baseline_pc(const std::vector<std::string>& variables, int variant, const DetectionConfig& cfg,
                         const CiTest& test);

struct BenchmarkSpec {
    std::string system = "sho";  // sho | coupled-sho | random
    int n_datasets = 20;
    int steps = 5000;
    std::uint64_t seed = 1;
    std::vector<std::string> learners{"dbcl", "pc1", "pc2"};  // also: truth
    DetectionConfig cfg;
    ShoParams sho;
    CoupledShoParams coupled;
    RandomDbcmOptions random;
};

struct DatasetReport {
    int dataset = 0;
    std::uint64_t seed = 0;
    std::string learner;
    EvalReport report;
};

struct BenchmarkRow {
    std::string learner;
    EvalReport mean;
    int succeeded = 0;
    int failed = 0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    std::vector<DatasetReport> per_dataset;
    std::vector<std::string> failures;
};

Simulation benchmark_dataset(const BenchmarkSpec& spec, int index);
PatternGraph run_learner(const std::string& learner, const Simulation& sim, const DetectionConfig& cfg);

/// Mean of each percentage over the given reports; counts are summed.
EvalReport aggregate(const std::vector<EvalReport>& reports);

/// Runs every learner on every generated dataset. `on_dataset`, when set, is
/// called after each (dataset, learner) evaluation.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec,
                              const std::function<void(const DatasetReport&)>& on_dataset = {});

}  // namespace dbcl
