#include "dbcl/cli_commands.hpp"

#include <cstdlib>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dbcl/emc.hpp"
#include "dbcl/spectral.hpp"
#include "dbcl/structure.hpp"

namespace dbcl {

namespace {

template <typename T>
void take(const Json& j, const char* key, T& field, std::set<std::string>& seen) {
    if (!j.contains(key)) return;
    seen.insert(key);
    try {
        field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(std::string("parameter '") + key + "' has the wrong type");
    }
}

void reject_unknown(const Json& j, const std::set<std::string>& seen) {
    if (!j.is_object()) throw Error("parameters must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!seen.count(key)) throw Error("unknown parameter '" + key + "'");
}

}  // namespace

void apply_params(const Json& j, ShoParams& p) {
    std::set<std::string> seen;
    take(j, "mass_mean", p.mass_mean, seen);
    take(j, "spring_k", p.spring_k, seen);
    take(j, "damping_b", p.damping_b, seen);
    take(j, "dt", p.dt, seen);
    take(j, "noise_sd", p.noise_sd, seen);
    take(j, "g_const", p.g_const, seen);
    take(j, "x0", p.x0, seen);
    take(j, "v0", p.v0, seen);
    reject_unknown(j, seen);
}

void apply_params(const Json& j, CoupledShoParams& p) {
    std::set<std::string> seen;
    take(j, "mass1", p.mass1, seen);
    take(j, "mass2", p.mass2, seen);
    take(j, "spring_k1", p.spring_k1, seen);
    take(j, "spring_k2", p.spring_k2, seen);
    take(j, "coupling_k", p.coupling_k, seen);
    take(j, "damping_b1", p.damping_b1, seen);
    take(j, "damping_b2", p.damping_b2, seen);
    take(j, "dt", p.dt, seen);
    take(j, "noise_sd", p.noise_sd, seen);
    take(j, "g_const", p.g_const, seen);
    take(j, "x1_0", p.x1_0, seen);
    take(j, "v1_0", p.v1_0, seen);
    take(j, "x2_0", p.x2_0, seen);
    take(j, "v2_0", p.v2_0, seen);
    reject_unknown(j, seen);
}

void apply_params(const Json& j, RandomDbcmOptions& p) {
    std::set<std::string> seen;
    take(j, "n_static", p.n_static, seen);
    take(j, "chain_orders", p.chain_orders, seen);
    take(j, "edge_density", p.edge_density, seen);
    take(j, "max_parents", p.max_parents, seen);
    take(j, "enforce_stability", p.enforce_stability, seen);
    take(j, "max_attempts", p.max_attempts, seen);
    reject_unknown(j, seen);
}

BenchmarkSpec benchmark_spec_from_json(const Json& j) {
    BenchmarkSpec s;
    std::set<std::string> seen;
    take(j, "system", s.system, seen);
    take(j, "n_datasets", s.n_datasets, seen);
    take(j, "steps", s.steps, seen);
    take(j, "seed", s.seed, seen);
    take(j, "learners", s.learners, seen);
    take(j, "alpha", s.cfg.alpha, seen);
    take(j, "k_max", s.cfg.k_max, seen);
    take(j, "max_cond_size", s.cfg.max_cond_size, seen);
    if (j.contains("params")) {
        seen.insert("params");
        const Json& p = j.at("params");
        if (s.system == "sho") apply_params(p, s.sho);
        else if (s.system == "coupled-sho") apply_params(p, s.coupled);
        else if (s.system == "random") apply_params(p, s.random);
    }
    reject_unknown(j, seen);
    if (s.system != "sho" && s.system != "coupled-sho" && s.system != "random")
        throw Error("unknown system '" + s.system + "'");
    if (s.n_datasets < 1) throw Error("n_datasets must be positive");
    if (s.steps < 2) throw Error("steps must be at least 2");
    validate_config(s.cfg);
    return s;
}

void cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
    if (opt.datasets < 1) throw Error("--datasets must be positive");
    if (opt.steps < 2) throw Error("--steps must be at least 2");
    BenchmarkSpec spec;
    spec.system = opt.system;
    spec.steps = opt.steps;
    spec.seed = opt.seed;
    spec.n_datasets = opt.datasets;
    if (opt.params) {
        Json p = read_json_file(*opt.params);
        if (opt.system == "sho") apply_params(p, spec.sho);
        else if (opt.system == "coupled-sho") apply_params(p, spec.coupled);
        else if (opt.system == "random") apply_params(p, spec.random);
    }
    if (opt.system != "sho" && opt.system != "coupled-sho" && opt.system != "random")
        throw Error("unknown system '" + opt.system + "'");
    const int width = std::max(3, static_cast<int>(std::to_string(opt.datasets - 1).size()));
    for (int i = 0; i < opt.datasets; ++i) {
        Simulation sim = benchmark_dataset(spec, i);
        write_csv_file(opt.out / fmt::format("dataset_{:0{}}.csv", i, width), sim.data);
        if (opt.system == "random")
            write_text_file(opt.out / fmt::format("truth_{:0{}}.json", i, width), to_json(sim.truth).dump(2) + "\n");
        else if (i == 0)
            write_text_file(opt.out / "truth.json", to_json(sim.truth).dump(2) + "\n");
    }
    log << fmt::format("wrote {} dataset(s) of {} steps to {}\n", opt.datasets, opt.steps, opt.out.string());
}

PatternGraph cmd_learn(const LearnOptions& opt, std::ostream& log) {
    if (opt.data.empty()) throw Error("no data files given");
    validate_config(opt.cfg);
    TimeSeriesDataset data;
    for (const auto& path : opt.data) {
        auto part = read_csv_file(path);
        if (data.variables.empty()) data.variables = part.variables;
        else if (part.variables != data.variables)
            throw Error(path.string() + ": header does not match " + opt.data.front().string());
        for (auto& t : part.trajectories) {
            if (opt.data.size() > 1) t.id = path.filename().string() + ":" + t.id;
            data.trajectories.push_back(std::move(t));
        }
    }
    for (const auto& t : data.trajectories)
        if (t.values.rows() <= opt.cfg.k_max + 1)
            throw Error(fmt::format("trajectory '{}' has {} rows; at least {} are needed for k_max = {}", t.id,
                                    t.values.rows(), opt.cfg.k_max + 2, opt.cfg.k_max));

    PatternGraph g = learn_dbcm(data, opt.cfg);
    EmcReport emc = emc_report(g);
    Json j = to_json(g);
    j["emc"] = to_json(emc);
    if (opt.out) write_text_file(*opt.out, j.dump(2) + "\n");
    if (opt.dot) write_text_file(*opt.dot, to_dot(g));

    for (const auto& [base, order] : prime_orders(g.nodes)) {
        if (!order) log << fmt::format("{}: unresolved\n", base);
        else if (*order == 0) log << fmt::format("{}: static\n", base);
        else log << fmt::format("{}: prime order {}\n", base, *order);
    }
    log << fmt::format("{} contemporaneous edge(s)\n", g.edges.size());
    for (const auto& e : emc.entries) log << fmt::format("{}: {}\n", e.variable, to_string(e.classification));
    for (const auto& w : g.warnings) log << "warning: " << w << '\n';
    for (const auto& w : emc.warnings) log << "warning: " << w << '\n';
    return g;
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
    std::size_t name_width = 7;
    for (const auto& [name, _] : rows) name_width = std::max(name_width, name.size());
    std::string out = fmt::format("{:<{}} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "learner", name_width, "%D_low", "%D_hi",
                                  "%E_del", "%E_add", "%O_err");
    for (const auto& [name, r] : rows)
        out += fmt::format("{:<{}} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f}\n", name, name_width, r.pct_delta_low,
                           r.pct_delta_hi, r.pct_e_del, r.pct_e_add, r.pct_o_err);
    return out;
}

std::filesystem::path run_root() {
    const char* env = std::getenv("DBCL_RUN_ROOT");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("runs");
}

void cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
    if (opt.benchmark) {
        if (opt.learned || opt.truth) throw Error("--benchmark cannot be combined with --learned/--truth");
        BenchmarkSpec spec = benchmark_spec_from_json(read_json_file(*opt.benchmark));
        const auto dir = run_root() / fmt::format("{}-seed{}", spec.system, spec.seed);
        auto result = run_benchmark(spec, [&](const DatasetReport& d) {
            Json j = to_json(d.report);
            j["dataset"] = d.dataset;
            j["seed"] = d.seed;
            j["learner"] = d.learner;
            write_text_file(dir / fmt::format("dataset_{:03}_{}.json", d.dataset, d.learner), j.dump(2) + "\n");
        });
        std::vector<std::pair<std::string, EvalReport>> rows;
        Json agg = Json::array();
        std::string csv = "learner,pct_delta_low,pct_delta_hi,pct_e_del,pct_e_add,pct_o_err,succeeded,failed\n";
        for (const auto& row : result.rows) {
            rows.emplace_back(row.learner, row.mean);
            Json j = to_json(row.mean);
            j.erase("diagnostics");
            j["learner"] = row.learner;
            j["succeeded"] = row.succeeded;
            j["failed"] = row.failed;
            agg.push_back(j);
            csv += fmt::format("{},{},{},{},{},{},{},{}\n", row.learner, row.mean.pct_delta_low, row.mean.pct_delta_hi,
                               row.mean.pct_e_del, row.mean.pct_e_add, row.mean.pct_o_err, row.succeeded, row.failed);
        }
        Json summary{{"aggregate", agg}, {"failures", result.failures}};
        write_text_file(dir / "aggregate.json", summary.dump(2) + "\n");
        write_text_file(dir / "aggregate.csv", csv);
        if (opt.out) write_text_file(*opt.out, opt.out->extension() == ".csv" ? csv : summary.dump(2) + "\n");
        log << format_table(rows);
        for (const auto& f : result.failures) log << "failed: " << f << '\n';
        log << "per-dataset reports in " << dir.string() << '\n';
        return;
    }
    if (!opt.learned || !opt.truth) throw Error("evaluate needs --learned and --truth, or --benchmark");
    PatternGraph learned = pattern_from_json(read_json_file(*opt.learned));
    Dbcm truth = dbcm_from_json(read_json_file(*opt.truth));
    EvalReport r = compare(learned, truth);
    if (opt.out) {
        if (opt.out->extension() == ".csv")
            write_text_file(*opt.out,
                            fmt::format("pct_delta_low,pct_delta_hi,pct_e_del,pct_e_add,pct_o_err\n{},{},{},{},{}\n",
                                        r.pct_delta_low, r.pct_delta_hi, r.pct_e_del, r.pct_e_add, r.pct_o_err));
        else
            write_text_file(*opt.out, to_json(r).dump(2) + "\n");
    }
    log << format_table({{"learned", r}});
    for (const auto& d : r.diagnostics) log << "  " << d << '\n';
}

void cmd_eeg_preprocess(const EegOptions& opt, std::ostream& log) {
    auto data = read_csv_file(opt.data);
    auto power = band_power_series(data, opt.rate, opt.window, opt.freq);
    write_csv_file(opt.out, power);
    log << fmt::format("wrote {} window(s) x {} channel(s) to {}\n",
                       power.total_rows(), power.variables.size(), opt.out.string());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Difference-based causal model learning"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "Generate trajectories and the true model");
    s->add_option("--system", sim.system, "sho | coupled-sho | random")
        ->check(CLI::IsMember({"sho", "coupled-sho", "random"}));
    s->add_option("--steps", sim.steps, "Records per dataset")->check(CLI::Range(2, 100000000));
    s->add_option("--datasets", sim.datasets, "Number of datasets")->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed, "Base seed; dataset i uses seed + i");
    std::string sim_params;
    s->add_option("--params", sim_params, "JSON file of simulator parameters")->check(CLI::ExistingFile);
    std::string sim_out = ".";
    s->add_option("--out", sim_out, "Output directory");

    LearnOptions learn;
    std::vector<std::string> learn_data;
    std::string learn_out, learn_dot;
    auto* l = app.add_subcommand("learn", "Learn a pattern from CSV trajectories");
    l->add_option("--data", learn_data, "CSV files")->required();
    l->add_option("--alpha", learn.cfg.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    l->add_option("--k-max", learn.cfg.k_max, "Maximum difference order")->check(CLI::NonNegativeNumber);
    l->add_option("--max-cond", learn.cfg.max_cond_size, "Largest conditioning set")->check(CLI::NonNegativeNumber);
    l->add_option("--out", learn_out, "Graph JSON output");
    l->add_option("--dot", learn_dot, "Graphviz output");

    EvaluateOptions ev;
    std::string ev_learned, ev_truth, ev_bench, ev_out;
    auto* e = app.add_subcommand("evaluate", "Score a learned graph or run a benchmark");
    auto* o_learned = e->add_option("--learned", ev_learned, "Learned graph JSON");
    auto* o_truth = e->add_option("--truth", ev_truth, "True model JSON");
    auto* o_bench = e->add_option("--benchmark", ev_bench, "Benchmark spec JSON");
    o_bench->excludes(o_learned)->excludes(o_truth);
    o_learned->needs(o_truth);
    o_truth->needs(o_learned);
    e->add_option("--out", ev_out, "Report output (.json or .csv)");

    EegOptions eeg;
    std::string eeg_data, eeg_out;
    auto* g = app.add_subcommand("eeg-preprocess", "Band power per window");
    g->add_option("--data", eeg_data, "Raw signal CSV")->required();
    g->add_option("--rate", eeg.rate, "Sampling rate in Hz");
    g->add_option("--window", eeg.window, "Window length in seconds");
    g->add_option("--freq", eeg.freq, "Target frequency in Hz");
    g->add_option("--out", eeg_out, "Band-power CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& pe) {
        std::ostringstream o, r;
        int code = app.exit(pe, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? 0 : 2;
    }

    try {
        if (s->parsed()) {
            if (!sim_params.empty()) sim.params = sim_params;
            sim.out = sim_out;
            cmd_simulate(sim, out);
        } else if (l->parsed()) {
            for (const auto& d : learn_data) learn.data.emplace_back(d);
            if (!learn_out.empty()) learn.out = learn_out;
            if (!learn_dot.empty()) learn.dot = learn_dot;
            cmd_learn(learn, out);
        } else if (e->parsed()) {
            if (!ev_learned.empty()) ev.learned = ev_learned;
            if (!ev_truth.empty()) ev.truth = ev_truth;
            if (!ev_bench.empty()) ev.benchmark = ev_bench;
            if (!ev_out.empty()) ev.out = ev_out;
            if (!ev.benchmark && !ev.learned) {
                err << "evaluate needs --learned and --truth, or --benchmark\n";
                return 2;
            }
            cmd_evaluate(ev, out);
        } else if (g->parsed()) {
            eeg.data = eeg_data;
            eeg.out = eeg_out;
            cmd_eeg_preprocess(eeg, out);
        }
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dbcl
