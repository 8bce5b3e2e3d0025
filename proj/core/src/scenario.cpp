#include "gsnell/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace gsnell {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

double require_number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

ProcessSpec parse_process(const json& j, const std::string& field) {
    ProcessSpec spec;
    if (j.is_number()) {
        spec.kind = ProcessSpec::Kind::constant;
        spec.constant = j.get<double>();
        return spec;
    }
    if (!j.is_object()) fail(field, "expected a number or an object");
    const int keys = int(j.contains("expr")) + int(j.contains("table")) + int(j.contains("constant"));
    if (keys != 1) fail(field, "exactly one of expr/table/constant required");
    if (j.contains("constant")) {
        spec.kind = ProcessSpec::Kind::constant;
        spec.constant = require_number(j.at("constant"), field + ".constant");
    } else if (j.contains("expr")) {
        spec.kind = ProcessSpec::Kind::expression;
        if (!j.at("expr").is_string()) fail(field + ".expr", "expected a string");
        try {
            spec.expression = Expression::parse(j.at("expr").get<std::string>());
        } catch (const ExprError& e) {
            fail(field + ".expr", e.what());
        }
    } else {
        spec.kind = ProcessSpec::Kind::table;
        const json& table = j.at("table");
        if (!table.is_array()) fail(field + ".table", "expected an array of per-step rows");
        for (std::size_t k = 0; k < table.size(); ++k) {
            if (!table[k].is_array() || table[k].size() != k + 1)
                fail(field + ".table", "row " + std::to_string(k) + " must hold " +
                                           std::to_string(k + 1) + " values");
            std::vector<double> row;
            for (const auto& v : table[k])
                row.push_back(require_number(v, field + ".table"));
            spec.table.push_back(std::move(row));
        }
    }
    return spec;
}

AdaptedProcess materialize(const ProcessSpec& spec, const ScenarioConfig& config,
                           const TreeModel& model, const std::string& field) {
    const int n = model.steps();
    switch (spec.kind) {
        case ProcessSpec::Kind::constant:
            return AdaptedProcess::constant(n, spec.constant);
        case ProcessSpec::Kind::expression:
            return AdaptedProcess::build(n, [&](int k, int j) {
                ExprEnv env;
                env.k = k;
                env.t = model.grid.time(k);
                env.B = model.brownian(k, j);
                env.S = config.s0 *
                        std::exp(config.sigma * env.B - 0.5 * config.sigma * config.sigma * env.t);
                return spec.expression.eval(env);
            });
        case ProcessSpec::Kind::table: {
            if (static_cast<int>(spec.table.size()) != n + 1)
                fail(field + ".table", "expected " + std::to_string(n + 1) + " rows");
            return AdaptedProcess::build(n, [&](int k, int j) { return spec.table[k][j]; });
        }
        case ProcessSpec::Kind::unset:
            break;
    }
    fail(field, "process definition missing");
}

}  // namespace

namespace {
ScenarioConfig parse_config_document(const json& doc);
}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top-level document must be an object");
    try {
        return parse_config_document(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
}

namespace {
ScenarioConfig parse_config_document(const json& doc) {
    ScenarioConfig config;

    if (!doc.contains("model") || !doc.at("model").is_object())
        fail("model", "required object missing");
    const json& model = doc.at("model");
    if (!model.contains("steps") || !model.at("steps").is_number_integer())
        fail("model.steps", "required integer missing");
    config.steps = model.at("steps").get<int>();
    if (config.steps < 1) fail("model.steps", "must be >= 1");
    if (model.contains("horizon")) config.horizon = require_number(model.at("horizon"), "model.horizon");
    if (config.horizon <= 0.0) fail("model.horizon", "must be positive");
    if (model.contains("up_probability"))
        config.up_probability = require_number(model.at("up_probability"), "model.up_probability");
    if (model.contains("s0")) config.s0 = require_number(model.at("s0"), "model.s0");
    if (model.contains("sigma")) config.sigma = require_number(model.at("sigma"), "model.sigma");

    if (!doc.contains("data") || !doc.at("data").is_object())
        fail("data", "required object missing");
    const json& data = doc.at("data");
    if (!data.contains("L")) fail("data.L", "required process missing");
    config.lower = parse_process(data.at("L"), "data.L");
    if (data.contains("l")) config.obstacle = parse_process(data.at("l"), "data.l");
    if (data.contains("xi")) config.terminal = parse_process(data.at("xi"), "data.xi");

    if (doc.contains("measure")) {
        const json& measure = doc.at("measure");
        if (!measure.is_object()) fail("measure", "expected an object");
        const std::string kind = measure.value("kind", std::string("zero"));
        if (kind == "zero")
            config.measure.kind = MeasureSpec::Kind::zero;
        else if (kind == "lebesgue")
            config.measure.kind = MeasureSpec::Kind::lebesgue;
        else if (kind == "custom")
            config.measure.kind = MeasureSpec::Kind::custom;
        else
            fail("measure.kind", "expected zero | lebesgue | custom");
        if (measure.contains("increments")) {
            if (config.measure.kind != MeasureSpec::Kind::custom)
                fail("measure.increments", "only valid for custom measures");
            config.measure.increments = parse_process(measure.at("increments"), "measure.increments");
        }
        if (measure.contains("atoms")) {
            if (config.measure.kind != MeasureSpec::Kind::custom)
                fail("measure.atoms", "only valid for custom measures");
            if (!measure.at("atoms").is_array()) fail("measure.atoms", "expected an array");
            for (const auto& atom : measure.at("atoms")) {
                if (!atom.is_object() || !atom.contains("step") || !atom.contains("mass"))
                    fail("measure.atoms", "each atom needs {step, mass}");
                MeasureSpec::Atom a;
                a.step = atom.at("step").get<int>();
                a.mass = require_number(atom.at("mass"), "measure.atoms.mass");
                if (a.step < 1 || a.step > config.steps)
                    fail("measure.atoms.step", "outside 1..steps");
                if (a.mass < 0.0) fail("measure.atoms.mass", "must be nonnegative");
                config.measure.atoms.push_back(a);
            }
        }
    }

    if (doc.contains("run")) {
        const json& run = doc.at("run");
        if (!run.is_object()) fail("run", "expected an object");
        if (run.contains("tol")) config.tol = require_number(run.at("tol"), "run.tol");
        if (config.tol <= 0.0) fail("run.tol", "must be positive");
        if (run.contains("seed")) config.seed = run.at("seed").get<std::uint64_t>();
        if (run.contains("full_schedule")) config.full_schedule = run.at("full_schedule").get<bool>();
        if (run.contains("schedule")) {
            const json& schedule = run.at("schedule");
            if (schedule.contains("n0"))
                config.schedule.first = require_number(schedule.at("n0"), "run.schedule.n0");
            if (schedule.contains("growth"))
                config.schedule.growth = require_number(schedule.at("growth"), "run.schedule.growth");
            if (schedule.contains("n_max"))
                config.schedule.last = require_number(schedule.at("n_max"), "run.schedule.n_max");
            if (!(config.schedule.first > 0.0) || !(config.schedule.growth > 1.0) ||
                config.schedule.last < config.schedule.first)
                fail("run.schedule", "need n0 > 0, growth > 1, n_max >= n0");
        }
        if (run.contains("trials")) {
            const json& trials = run.at("trials");
            if (trials.contains("minimality"))
                config.minimality_trials = trials.at("minimality").get<int>();
            if (trials.contains("smallest"))
                config.smallest_trials = trials.at("smallest").get<int>();
        }
        if (run.contains("instances")) config.suite_instances = run.at("instances").get<int>();
    }
    return config;
}
}  // namespace

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

TreeModel ScenarioConfig::build_model() const {
    return TreeModel(TimeGrid(steps, horizon), up_probability);
}

LowerData ScenarioConfig::build_data(const TreeModel& model) const {
    LowerData data;
    data.lower_rcll = materialize(lower, *this, model, "data.L");
    if (obstacle.kind == ProcessSpec::Kind::unset)
        data.lower_measurable = AdaptedProcess::constant(model.steps(), 0.0);
    else
        data.lower_measurable = materialize(obstacle, *this, model, "data.l");
    if (terminal.kind == ProcessSpec::Kind::unset) {
        const auto row = data.lower_rcll.terminal();
        data.terminal.assign(row.begin(), row.end());
    } else {
        const AdaptedProcess xi = materialize(terminal, *this, model, "data.xi");
        const auto row = xi.terminal();
        data.terminal.assign(row.begin(), row.end());
    }

    switch (measure.kind) {
        case MeasureSpec::Kind::zero:
            data.measure = MonotoneMeasure::zero(model.steps());
            break;
        case MeasureSpec::Kind::lebesgue:
            data.measure = MonotoneMeasure::lebesgue(model);
            break;
        case MeasureSpec::Kind::custom: {
            data.measure = MonotoneMeasure::zero(model.steps());
            if (measure.increments.kind != ProcessSpec::Kind::unset) {
                const AdaptedProcess base =
                    materialize(measure.increments, *this, model, "measure.increments");
                for (int k = 1; k <= model.steps(); ++k)
                    for (int j = 0; j <= k; ++j) {
                        const double mass = base.at(k, j);
                        if (mass < 0.0) fail("measure.increments", "negative mass");
                        data.measure.set_increment(k, j, mass);
                    }
            }
            for (const auto& atom : measure.atoms) data.measure.add_atom(atom.step, atom.mass);
            break;
        }
    }
    return data;
}

EnvelopeOptions ScenarioConfig::build_options() const {
    EnvelopeOptions options;
    options.schedule = schedule;
    options.tol = tol;
    options.force_full_schedule = full_schedule;
    options.seed = seed;
    options.minimality_trials = minimality_trials;
    options.smallest_trials = smallest_trials;
    return options;
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string nodes_csv(const LowerData& data, const TreeModel& model, const RbsdeSolution& sol) {
    std::ostringstream os;
    os << "step,node,B,L,l,ddelta,Y,Z,dK_plus\n";
    const int n = model.steps();
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            os << k << ',' << j << ',' << format_double(model.brownian(k, j)) << ','
               << format_double(data.lower_rcll.at(k, j)) << ','
               << format_double(data.lower_measurable.at(k, j)) << ','
               << format_double(data.measure.increment(k, j)) << ','
               << format_double(sol.y.at(k, j)) << ',';
            if (k < n)
                os << format_double(sol.z.at(k, j)) << ','
                   << format_double(sol.k_plus.increment(k, j));
            else
                os << "0,0";
            os << '\n';
        }
    }
    return os.str();
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    os << "n,root_value,sup_gap,k_plus_mass\n";
    for (const auto& row : trace)
        os << format_double(row.n) << ',' << format_double(row.root_value) << ','
           << format_double(row.sup_gap) << ',' << format_double(row.k_plus_mass) << '\n';
    return os.str();
}

json report_to_json(const RunReport& report) {
    json doc;
    doc["root_value"] = report.root_value;
    doc["converged"] = report.converged;
    doc["final_n"] = report.final_n;
    doc["final_gap"] = report.final_gap;
    doc["exit_status"] = report.exit_status;
    doc["wall_ms"] = report.wall_ms;
    if (!report.certificates.empty()) {
        json certs;
        for (const auto& [name, passed] : report.certificates) certs[name] = passed;
        doc["certificates"] = certs;
        doc["residuals"] = {{"skorokhod_lower", report.skorokhod_lower},
                            {"skorokhod_upper", report.skorokhod_upper},
                            {"minimality", report.minimality_residual},
                            {"smallest_violations", report.smallest_violations}};
    }
    if (!report.k_plus_profile.empty()) doc["k_plus_profile"] = report.k_plus_profile;
    if (!report.trace.empty()) {
        json rows = json::array();
        for (const auto& row : report.trace)
            rows.push_back({{"n", row.n},
                            {"root_value", row.root_value},
                            {"sup_gap", row.sup_gap},
                            {"k_plus_mass", row.k_plus_mass}});
        doc["trace"] = rows;
    }
    if (!report.suites.empty()) {
        json suites = json::array();
        for (const auto& suite : report.suites) {
            json s;
            s["name"] = suite.name;
            s["instances"] = suite.instances;
            s["failures"] = suite.failures;
            s["worst"] = suite.worst;
            s["seed"] = suite.seed;
            if (!suite.failure_details.empty()) s["details"] = suite.failure_details;
            suites.push_back(s);
        }
        doc["suites"] = suites;
    }
    return doc;
}

}  // namespace

std::string RunReport::summary_json() const { return report_to_json(*this).dump(2) + "\n"; }

RunReport run_solve(const ScenarioConfig& config,
                    const std::optional<std::filesystem::path>& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const TreeModel model = config.build_model();
    const LowerData data = config.build_data(model);
    const EnvelopeResult result = generalized_snell(data, model, config.build_options());

    RunReport report;
    report.root_value = result.envelope.at(0, 0);
    report.converged = result.solution.diagnostics.converged;
    report.final_n = result.solution.diagnostics.final_n;
    report.final_gap = result.solution.diagnostics.sup_gap;
    report.trace = result.solution.diagnostics.trace;
    report.certificates["skorokhod"] = result.certificates.skorokhod.ok();
    report.certificates["minimality"] = result.certificates.minimality.ok();
    report.certificates["smallest_in_class"] = result.certificates.smallest_in_class.ok();
    report.certificates["supermartingale"] = result.certificates.supermartingale.ok;
    report.skorokhod_lower = result.certificates.skorokhod.lower_residual;
    report.skorokhod_upper = result.certificates.skorokhod.upper_residual;
    report.minimality_residual = result.certificates.minimality.worst_residual;
    report.smallest_violations = result.certificates.smallest_in_class.violations;

    report.k_plus_profile.assign(model.steps() + 1, 0.0);
    for (int k = 0; k < model.steps(); ++k) {
        const auto probs = model.level_probabilities(k);
        for (int j = 0; j <= k; ++j)
            report.k_plus_profile[k] += probs[j] * result.solution.k_plus.increment(k, j);
    }

    bool certificates_ok = true;
    for (const auto& [name, passed] : report.certificates) certificates_ok &= passed;
    if (!report.converged)
        report.exit_status = exit_code::non_convergence;
    else if (!certificates_ok)
        report.exit_status = exit_code::certificate_failure;

    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        atomic_write_file(*out_dir / "nodes.csv", nodes_csv(data, model, result.solution));
        atomic_write_file(*out_dir / "trace.csv", trace_csv(report.trace));
        atomic_write_file(*out_dir / "summary.json", report.summary_json());
    }
    return report;
}

RunReport run_properties(const ScenarioConfig& config, const std::string& suite,
                         const std::optional<std::filesystem::path>& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const int depth = config.steps;
    const int instances = config.suite_instances;
    RunReport report;

    const bool all = suite == "all";
    if (all || suite == "coincidence")
        report.suites.push_back(
            run_coincidence_suite(config.seed, depth, instances, instances / 2));
    if (all || suite == "corollary")
        report.suites.push_back(run_corollary_suite(config.seed, depth, instances));
    if (all || suite == "comparison")
        report.suites.push_back(run_comparison_suite(config.seed, depth, 2 * instances));
    if (all || suite == "atom-split")
        report.suites.push_back(run_atom_split_suite(config.seed, depth, instances));
    if (report.suites.empty())
        throw ConfigError("unknown property suite '" + suite +
                          "' (expected corollary | comparison | coincidence | atom-split | all)");

    bool passed = true;
    for (const auto& s : report.suites) {
        report.certificates[s.name] = s.passed();
        passed &= s.passed();
    }
    report.exit_status = passed ? exit_code::ok : exit_code::certificate_failure;
    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        atomic_write_file(*out_dir / "summary.json", report.summary_json());
    }
    return report;
}

RunReport run_penalization_trace(const ScenarioConfig& config,
                                 const std::optional<std::filesystem::path>& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const TreeModel model = config.build_model();
    const LowerData data = config.build_data(model);
    const RbsdeSolution solution = iterate_to_limit(data, model, config.schedule, config.tol,
                                                    config.full_schedule);
    RunReport report;
    report.root_value = solution.y.at(0, 0);
    report.converged = solution.diagnostics.converged;
    report.final_n = solution.diagnostics.final_n;
    report.final_gap = solution.diagnostics.sup_gap;
    report.trace = solution.diagnostics.trace;
    if (!report.converged) report.exit_status = exit_code::non_convergence;
    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        atomic_write_file(*out_dir / "trace.csv", trace_csv(report.trace));
        atomic_write_file(*out_dir / "summary.json", report.summary_json());
    }
    return report;
}

}  // namespace gsnell
