#include "dbcl/serialization.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace dbcl {

namespace {

void check_header(const Json& j, const char* kind) {
    if (!j.is_object()) throw Error(std::string("expected a JSON object for ") + kind);
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion)
        throw Error(std::string("unsupported or missing format_version in ") + kind);
    if (j.value("kind", std::string()) != kind) throw Error(std::string("JSON document is not a ") + kind);
}

Json node_json(const Node& n) {
    Json j = to_json(n.id);
    j["role"] = to_string(n.role.kind);
    if (n.role.kind == RoleKind::Integral || n.role.kind == RoleKind::Prime) j["chain_order"] = n.role.order;
    return j;
}

Node node_from_json(const Json& j) {
    Node n;
    n.id = var_id_from_json(j);
    n.role.kind = role_kind_from_string(j.at("role").get<std::string>());
    n.role.order = j.value("chain_order", 0);
    return n;
}

}  // namespace

Json to_json(const VarId& id) { return Json{{"base", id.base}, {"order", id.order}}; }

VarId var_id_from_json(const Json& j) {
    try {
        return {j.at("base").get<std::string>(), j.at("order").get<int>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed variable id: ") + e.what());
    }
}

Json to_json(const Dbcm& model) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "dbcm";
    j["nodes"] = Json::array();
    for (const auto& n : model.nodes) j["nodes"].push_back(node_json(n));
    j["edges"] = Json::array();
    for (const auto& e : model.edges) j["edges"].push_back({{"from", to_json(e.from)}, {"to", to_json(e.to)}});
    j["equations"] = Json::array();
    for (const auto& [target, eq] : model.equations) {
        Json coefs = Json::array();
        for (const auto& [p, c] : eq.coefficients) coefs.push_back({{"parent", to_json(p)}, {"value", c}});
        j["equations"].push_back(
            {{"target", to_json(target)}, {"intercept", eq.intercept}, {"noise_sd", eq.noise_sd}, {"coefficients", coefs}});
    }
    return j;
}

Dbcm dbcm_from_json(const Json& j) {
    check_header(j, "dbcm");
    try {
        Dbcm m;
        for (const auto& n : j.at("nodes")) m.nodes.push_back(node_from_json(n));
        for (const auto& e : j.at("edges"))
            m.edges.push_back({var_id_from_json(e.at("from")), var_id_from_json(e.at("to"))});
        if (j.contains("equations"))
            for (const auto& e : j.at("equations")) {
                Equation eq;
                eq.intercept = e.at("intercept").get<double>();
                eq.noise_sd = e.at("noise_sd").get<double>();
                for (const auto& c : e.at("coefficients"))
                    eq.coefficients[var_id_from_json(c.at("parent"))] = c.at("value").get<double>();
                m.equations[var_id_from_json(e.at("target"))] = eq;
            }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed model JSON: ") + e.what());
    }
}

Json to_json(const PatternGraph& graph) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "pattern";
    j["nodes"] = Json::array();
    for (const auto& n : graph.nodes) j["nodes"].push_back(node_json(n));
    j["edges"] = Json::array();
    for (const auto& e : graph.edges)
        j["edges"].push_back(
            {{"a", to_json(e.a)}, {"b", to_json(e.b)}, {"mark", e.mark == Mark::Directed ? "directed" : "undirected"}});
    j["warnings"] = graph.warnings;
    return j;
}

PatternGraph pattern_from_json(const Json& j) {
    check_header(j, "pattern");
    try {
        PatternGraph g;
        for (const auto& n : j.at("nodes")) g.nodes.push_back(node_from_json(n));
        for (const auto& e : j.at("edges")) {
            auto mark = e.at("mark").get<std::string>();
            if (mark != "directed" && mark != "undirected") throw Error("unknown edge mark '" + mark + "'");
            g.edges.push_back({var_id_from_json(e.at("a")), var_id_from_json(e.at("b")),
                               mark == "directed" ? Mark::Directed : Mark::Undirected});
        }
        if (j.contains("warnings")) g.warnings = j.at("warnings").get<std::vector<std::string>>();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed pattern JSON: ") + e.what());
    }
}

Json to_json(const EmcReport& report) {
    Json j;
    j["entries"] = Json::array();
    for (const auto& e : report.entries) {
        Json row{{"variable", e.variable}, {"self_regulating", e.self_regulating}};
        row["feedback_empty"] = e.feedback_empty ? Json(*e.feedback_empty) : Json(nullptr);
        row["classification"] = to_string(e.classification);
        j["entries"].push_back(row);
    }
    j["warnings"] = report.warnings;
    return j;
}

EmcReport emc_report_from_json(const Json& j) {
    try {
        EmcReport r;
        for (const auto& row : j.at("entries")) {
            EmcEntry e;
            e.variable = row.at("variable").get<std::string>();
            e.self_regulating = row.at("self_regulating").get<bool>();
            if (!row.at("feedback_empty").is_null()) e.feedback_empty = row.at("feedback_empty").get<bool>();
            e.classification = emc_class_from_string(row.at("classification").get<std::string>());
            r.entries.push_back(e);
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed EMC report JSON: ") + e.what());
    }
}

Json to_json(const EvalReport& r) {
    return Json{{"pct_delta_low", r.pct_delta_low},
                {"pct_delta_hi", r.pct_delta_hi},
                {"pct_e_del", r.pct_e_del},
                {"pct_e_add", r.pct_e_add},
                {"pct_o_err", r.pct_o_err},
                {"chain_variables", r.chain_variables},
                {"too_low", r.too_low},
                {"too_high", r.too_high},
                {"static_with_chain", r.static_with_chain},
                {"true_edges", r.true_edges},
                {"deleted", r.deleted},
                {"added", r.added},
                {"misoriented", r.misoriented},
                {"diagnostics", r.diagnostics}};
}

EvalReport eval_report_from_json(const Json& j) {
    try {
        EvalReport r;
        r.pct_delta_low = j.at("pct_delta_low").get<double>();
        r.pct_delta_hi = j.at("pct_delta_hi").get<double>();
        r.pct_e_del = j.at("pct_e_del").get<double>();
        r.pct_e_add = j.at("pct_e_add").get<double>();
        r.pct_o_err = j.at("pct_o_err").get<double>();
        r.chain_variables = j.at("chain_variables").get<int>();
        r.too_low = j.at("too_low").get<int>();
        r.too_high = j.at("too_high").get<int>();
        r.static_with_chain = j.at("static_with_chain").get<int>();
        r.true_edges = j.at("true_edges").get<int>();
        r.deleted = j.at("deleted").get<int>();
        r.added = j.at("added").get<int>();
        r.misoriented = j.at("misoriented").get<int>();
        r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed report JSON: ") + e.what());
    }
}

std::string to_dot(const PatternGraph& graph) {
    auto quote = [](const VarId& v) { return "\"" + v.name() + "\""; };
    std::string out = "digraph dbcm {\n  rankdir=LR;\n";
    for (const auto& n : graph.nodes) {
        const char* shape = "ellipse";
        if (n.role.kind == RoleKind::Prime) shape = "doublecircle";
        else if (n.role.kind == RoleKind::Integral) shape = "box";
        else if (n.role.kind == RoleKind::Unresolved) shape = "diamond";
        out += fmt::format("  {} [shape={}, tooltip=\"{}\"];\n", quote(n.id), shape, to_string(n.role.kind));
    }
    for (const auto& e : graph.edges) {
        if (e.mark == Mark::Directed) out += fmt::format("  {} -> {};\n", quote(e.a), quote(e.b));
        else out += fmt::format("  {} -> {} [dir=none];\n", quote(e.a), quote(e.b));
    }
    for (const auto& n : graph.nodes)
        if (n.role.kind == RoleKind::Integral)
            out += fmt::format("  {} -> {} [style=dashed, constraint=false];\n",
                               quote({n.id.base, n.id.order + 1}), quote(n.id));
    out += "}\n";
    return out;
}

void write_csv(std::ostream& out, const TimeSeriesDataset& data) {
    validate_dataset(data);
    out << "trajectory";
    for (const auto& v : data.variables) out << ',' << v;
    out << '\n';
    for (const auto& t : data.trajectories)
        for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
            out << t.id;
            for (Eigen::Index c = 0; c < t.values.cols(); ++c) out << ',' << fmt::format("{}", t.values(r, c));
            out << '\n';
        }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t s = 0;
        while (s < field.size() && field[s] == ' ') ++s;
        out.push_back(field.substr(s));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

TimeSeriesDataset read_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw Error(source + ": empty CSV");
    auto header = split_line(line);
    const bool has_id = !header.empty() && header[0] == "trajectory";
    TimeSeriesDataset data;
    data.variables.assign(header.begin() + (has_id ? 1 : 0), header.end());
    const std::size_t width = data.variables.size();

    std::vector<std::string> order;
    std::map<std::string, std::vector<std::vector<double>>> rows;
    std::string current;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (fields.size() != header.size())
            throw Error(fmt::format("{}:{}: expected {} fields, found {}", source, line_no, header.size(), fields.size()));
        std::string id = has_id ? fields[0] : "0";
        if (id != current) {
            if (rows.count(id)) throw Error(fmt::format("{}:{}: rows of trajectory '{}' are not contiguous", source, line_no, id));
            order.push_back(id);
            current = id;
        }
        std::vector<double> values(width);
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& f = fields[c + (has_id ? 1 : 0)];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[c]);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw Error(fmt::format("{}:{}: '{}' is not a number", source, line_no, f));
        }
        rows[id].push_back(std::move(values));
    }
    for (const auto& id : order) {
        const auto& r = rows[id];
        Trajectory t{id, Eigen::MatrixXd(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(width))};
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t c = 0; c < width; ++c)
                t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = r[i][c];
        data.trajectories.push_back(std::move(t));
    }
    try {
        validate_dataset(data);
    } catch (const Error& e) {
        throw Error(source + ": " + e.what());
    }
    return data;
}

void write_csv_file(const std::filesystem::path& path, const TimeSeriesDataset& data) {
    std::ostringstream ss;
    write_csv(ss, data);
    write_text_file(path, ss.str());
}

TimeSeriesDataset read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_csv(in, path.string());
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("error writing " + path.string());
}

}  // namespace dbcl
