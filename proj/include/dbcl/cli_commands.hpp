#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dbcl/evaluate.hpp"
#include "dbcl/serialization.hpp"

namespace dbcl {

struct SimulateOptions {
    std::string system = "sho";
    int steps = 5000;
    int datasets = 1;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> params;
    std::filesystem::path out = ".";
};

struct LearnOptions {
    std::vector<std::filesystem::path> data;
    DetectionConfig cfg;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> dot;
};

struct EvaluateOptions {
    std::optional<std::filesystem::path> learned;
    std::optional<std::filesystem::path> truth;
    std::optional<std::filesystem::path> benchmark;
    std::optional<std::filesystem::path> out;
};

struct EegOptions {
    std::filesystem::path data;
    double rate = 256.0;
    double window = 0.5;
    double freq = 10.0;
    std::filesystem::path out;
};

/// Applies keys of a JSON object onto parameter structs; unknown keys are errors.
void apply_params(const Json& j, ShoParams& p);
void apply_params(const Json& j, CoupledShoParams& p);
void apply_params(const Json& j, RandomDbcmOptions& p);
BenchmarkSpec benchmark_spec_from_json(const Json& j);

void cmd_simulate(const SimulateOptions& opt, std::ostream& log);
/// Returns the learned pattern; writes the graph (with embedded EMC report) and DOT when requested.
PatternGraph cmd_learn(const LearnOptions& opt, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& opt, std::ostream& log);
void cmd_eeg_preprocess(const EegOptions& opt, std::ostream& log);

/// Aligned text table with one row per learner in the order
/// %D_low %D_hi %E_del %E_add %O_err.
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

/// Root for benchmark run directories: $DBCL_RUN_ROOT or ./runs.
std::filesystem::path run_root();

/// Parses arguments and dispatches. Returns the process exit code: 0 on
/// success, 1 on runtime errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dbcl
