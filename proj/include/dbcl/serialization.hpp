#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dbcl/core_model.hpp"
#include "dbcl/emc.hpp"
#include "dbcl/evaluate.hpp"

namespace dbcl {

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::ordered_json;

Json to_json(const VarId& id);
VarId var_id_from_json(const Json& j);

Json to_json(const Dbcm& model);
Dbcm dbcm_from_json(const Json& j);

Json to_json(const PatternGraph& graph);
PatternGraph pattern_from_json(const Json& j);

Json to_json(const EmcReport& report);
EmcReport emc_report_from_json(const Json& j);

Json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const Json& j);

/// Graphviz rendering; chain links D(k+1)(x) -> Dk(x) are drawn dashed.
std::string to_dot(const PatternGraph& graph);

/// Header row of variable names, optionally led by a `trajectory` column.
void write_csv(std::ostream& out, const TimeSeriesDataset& data);
TimeSeriesDataset read_csv(std::istream& in, const std::string& source = "<stream>");

void write_csv_file(const std::filesystem::path& path, const TimeSeriesDataset& data);
TimeSeriesDataset read_csv_file(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dbcl
