#include "seqthresh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "seqthresh/error.hpp"

namespace seqthresh {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  fail(ErrorKind::Configuration, key + ": " + what);
}

const json& section(const json& doc, const char* name, bool required) {
  static const json empty = json::object();
  if (!doc.contains(name)) {
    if (required) config_error(name, "missing required section");
    return empty;
  }
  const json& s = doc.at(name);
  if (!s.is_object()) config_error(name, "must be an object");
  return s;
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) config_error(where + "." + key, "unknown key");
  }
}

std::optional<double> number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key, "must be a number");
  return v.get<double>();
}

double required_number(const json& obj, const std::string& where, const char* key) {
  auto v = number(obj, where, key);
  if (!v) config_error(where + "." + key, "missing required key");
  return *v;
}

std::optional<std::uint64_t> count(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_error(where + "." + key, "must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::uint64_t required_count(const json& obj, const std::string& where, const char* key) {
  auto v = count(obj, where, key);
  if (!v) config_error(where + "." + key, "missing required key");
  return *v;
}

std::optional<std::string> text(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_string()) config_error(where + "." + key, "must be a string");
  return v.get<std::string>();
}

ObservationModel parse_model(const json& doc) {
  const json& j = section(doc, "model", true);
  check_keys(j, "model", {"family", "theta0", "theta1", "direction"});
  const auto family_name = text(j, "model", "family");
  if (!family_name) config_error("model.family", "missing required key");
  ObservationModel model;
  try {
    model.family = parse_family(*family_name);
  } catch (const Error& e) {
    config_error("model.family", e.what());
  }
  switch (model.family) {
    case Family::GaussianUnitVar:
      model.theta0 = number(j, "model", "theta0").value_or(0.0);
      model.theta1 = required_number(j, "model", "theta1");
      model.direction = Direction::AlternativeAbove;
      break;
    case Family::GammaEnergy:
      model.theta0 = required_number(j, "model", "theta0");
      model.theta1 = number(j, "model", "theta1").value_or(1.0);
      model.direction = Direction::AlternativeBelow;
      break;
    case Family::PoissonCount:
      model.theta0 = required_number(j, "model", "theta0");
      model.theta1 = required_number(j, "model", "theta1");
      model.direction = Direction::AlternativeBelow;
      break;
  }
  // Optional and fixed by the family; accepted so normalized configs re-parse.
  if (const auto direction = text(j, "model", "direction")) {
    if (*direction != to_string(model.direction)) {
      config_error("model.direction",
                   std::string("must be ") + to_string(model.direction) + " for this family");
    }
  }
  try {
    model.validate();
  } catch (const Error& e) {
    config_error("model.theta0/theta1", e.what());
  }
  return model;
}

SweepAxis parse_sweep(const json& j) {
  if (!j.is_object()) config_error("run.sweep", "must be an object");
  check_keys(j, "run.sweep", {"parameter", "values", "from", "to", "steps"});
  SweepAxis axis;
  const auto parameter = text(j, "run.sweep", "parameter");
  if (!parameter) config_error("run.sweep.parameter", "missing required key");
  try {
    axis.parameter = parse_sweep_parameter(*parameter);
  } catch (const Error& e) {
    config_error("run.sweep.parameter", e.what());
  }
  if (j.contains("values")) {
    if (j.contains("from") || j.contains("to") || j.contains("steps")) {
      config_error("run.sweep", "give either values or from/to/steps, not both");
    }
    const json& values = j.at("values");
    if (!values.is_array()) config_error("run.sweep.values", "must be an array of numbers");
    for (const auto& v : values) {
      if (!v.is_number()) config_error("run.sweep.values", "must be an array of numbers");
      axis.values.push_back(v.get<double>());
    }
  } else {
    const double from = required_number(j, "run.sweep", "from");
    const double to = required_number(j, "run.sweep", "to");
    const auto steps = required_count(j, "run.sweep", "steps");
    if (steps < 1) config_error("run.sweep.steps", "must be >= 1");
    for (std::uint64_t k = 0; k < steps; ++k) {
      axis.values.push_back(steps == 1 ? from
                                       : from + (to - from) * static_cast<double>(k) /
                                                    static_cast<double>(steps - 1));
    }
  }
  return axis;
}

SequentialConfig parse_sequential(const json& j, std::set<std::string>& allowed) {
  allowed.insert({"epsilon", "passes", "threshold_quantile", "budget_mode"});
  SequentialConfig c;
  c.epsilon = number(j, "procedure", "epsilon").value_or(c.epsilon);
  if (auto passes = count(j, "procedure", "passes")) c.passes = static_cast<int>(*passes);
  c.threshold_quantile = number(j, "procedure", "threshold_quantile").value_or(c.threshold_quantile);
  if (auto mode = text(j, "procedure", "budget_mode")) {
    if (*mode == "expectation") {
      c.budget_mode = BudgetMode::Expectation;
    } else if (*mode == "hard_cap") {
      c.budget_mode = BudgetMode::HardCap;
    } else {
      config_error("procedure.budget_mode", "must be expectation or hard_cap");
    }
  }
  return c;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    fail(ErrorKind::Io, "output directory does not exist: " + parent.string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << contents;
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::string csv_header(const std::vector<std::string>& columns) {
  std::string line;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (k) line += ',';
    line += columns[k];
  }
  return line + '\n';
}

// Missing values (NaN) are written as empty fields.
std::string csv_row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) line += ',';
    if (!std::isnan(values[k])) line += format_double(values[k]);
  }
  return line + '\n';
}

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string digits;
  while (v > 0) {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return digits;
}

u128 u128_from_string(const std::string& s) {
  u128 v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') fail(ErrorKind::Configuration, "bad integer: " + s);
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

json maybe_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

RunConfig parse_config(const std::string& text_doc) {
  json doc;
  try {
    doc = json::parse(text_doc);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Configuration, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Configuration, "config must be a JSON object");
  check_keys(doc, "config", {"model", "problem", "procedure", "run"});

  RunConfig config;
  ExperimentConfig& ex = config.experiment;
  ex.model = parse_model(doc);

  const json& problem = section(doc, "problem", true);
  check_keys(problem, "problem", {"n", "s", "m"});
  ex.n = required_count(problem, "problem", "n");
  ex.s = required_count(problem, "problem", "s");
  ex.m = static_cast<int>(required_count(problem, "problem", "m"));

  const json& run = section(doc, "run", false);
  check_keys(run, "run", {"trials", "seed", "threads", "sweep"});
  ex.trials = count(run, "run", "trials").value_or(100);
  ex.seed = count(run, "run", "seed").value_or(1);
  ex.threads = static_cast<unsigned>(count(run, "run", "threads").value_or(1));
  if (run.contains("sweep")) config.sweep = parse_sweep(run.at("sweep"));

  const json& proc = section(doc, "procedure", true);
  const auto type = text(proc, "procedure", "type");
  if (!type) config_error("procedure.type", "missing required key");
  std::set<std::string> allowed{"type"};
  if (*type == "non_sequential") {
    allowed.insert({"tau", "grid_points"});
    if (proc.contains("tau") && !(proc.at("tau").is_string() && proc.at("tau") == "min")) {
      ex.procedure = NonSequentialFixed{required_number(proc, "procedure", "tau")};
    } else {
      NonSequentialMinTau p;
      p.grid_points = count(proc, "procedure", "grid_points").value_or(p.grid_points);
      ex.procedure = p;
    }
  } else if (*type == "sequential") {
    allowed.insert("variant");
    SequentialProcedure p;
    p.config = parse_sequential(proc, allowed);
    const auto variant = text(proc, "procedure", "variant").value_or("parallel");
    if (variant == "parallel") {
      p.variant = SequentialVariant::Parallel;
    } else if (variant == "scanning") {
      p.variant = SequentialVariant::Scanning;
    } else {
      config_error("procedure.variant", "must be parallel or scanning");
    }
    ex.procedure = p;
  } else if (*type == "sprt") {
    allowed.insert({"alpha", "beta", "error_target", "max_steps"});
    SprtProcedure p;
    const auto alpha = number(proc, "procedure", "alpha");
    const auto beta = number(proc, "procedure", "beta");
    const auto target = number(proc, "procedure", "error_target");
    if (target) {
      if (alpha || beta) config_error("procedure", "give alpha/beta or error_target, not both");
      if (ex.s == 0 || ex.s >= ex.n) config_error("procedure.error_target", "requires 0 < s < n");
      p.spec.alpha = *target / static_cast<double>(ex.n - ex.s);
      p.spec.beta = *target / static_cast<double>(ex.s);
      config.error_target = *target;
    } else {
      if (!alpha || !beta) config_error("procedure.alpha/beta", "missing required key");
      p.spec.alpha = *alpha;
      p.spec.beta = *beta;
    }
    p.spec.max_steps = static_cast<std::int64_t>(
        count(proc, "procedure", "max_steps").value_or(p.spec.max_steps));
    try {
      p.spec.validate();
    } catch (const Error& e) {
      config_error("procedure.alpha/beta", e.what());
    }
    ex.procedure = p;
  } else if (*type == "boundary") {
    allowed.insert({"epsilon", "error_target"});
    SequentialProcedure p;
    p.config.epsilon = number(proc, "procedure", "epsilon").value_or(p.config.epsilon);
    config.error_target = number(proc, "procedure", "error_target").value_or(0.1);
    ex.procedure = p;
    config.boundary_only = true;
  } else {
    config_error("procedure.type", "must be non_sequential, sequential, sprt or boundary");
  }
  check_keys(proc, "procedure", allowed);

  ex.validate();
  if (config.boundary_only) {
    // Refuse configurations whose boundary formulas do not apply.
    try {
      boundaries(ex.model.family, ex.n, ex.s, ex.m, boundary_epsilon(ex), config.error_target);
    } catch (const Error& e) {
      fail(e.kind(), std::string("problem.m/s: ") + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

json to_json(const RunConfig& config) {
  const ExperimentConfig& ex = config.experiment;
  json model{{"family", to_string(ex.model.family)},
             {"theta0", ex.model.theta0},
             {"theta1", ex.model.theta1},
             {"direction", to_string(ex.model.direction)}};
  json problem{{"n", ex.n}, {"s", ex.s}, {"m", ex.m}};
  json procedure;
  if (config.boundary_only) {
    procedure = {{"type", "boundary"},
                 {"epsilon", boundary_epsilon(ex)},
                 {"error_target", config.error_target}};
  } else {
    procedure = std::visit(
        Overloaded{
            [](const NonSequentialFixed& p) {
              return json{{"type", "non_sequential"}, {"tau", p.tau}};
            },
            [](const NonSequentialMinTau& p) {
              return json{{"type", "non_sequential"}, {"tau", "min"}, {"grid_points", p.grid_points}};
            },
            [&](const SequentialProcedure& p) {
              return json{{"type", "sequential"},
                          {"variant", p.variant == SequentialVariant::Parallel ? "parallel" : "scanning"},
                          {"epsilon", p.config.epsilon},
                          {"passes", p.config.resolve_passes(ex.n)},
                          {"threshold_quantile", p.config.threshold_quantile},
                          {"budget_mode", to_string(p.config.budget_mode)}};
            },
            [](const SprtProcedure& p) {
              return json{{"type", "sprt"},
                          {"alpha", p.spec.alpha},
                          {"beta", p.spec.beta},
                          {"max_steps", p.spec.max_steps}};
            }},
        ex.procedure);
  }
  json run{{"trials", ex.trials}, {"seed", ex.seed}, {"threads", ex.threads}};
  if (config.sweep) {
    run["sweep"] = {{"parameter", to_string(config.sweep->parameter)},
                    {"values", config.sweep->values}};
  }
  return {{"model", model}, {"problem", problem}, {"procedure", procedure}, {"run", run}};
}

json to_json(const AggregateResult& r) {
  json j{{"kind", to_string(r.kind)},
         {"n", r.n},
         {"s", r.s},
         {"m", r.m},
         {"trials", r.trials},
         {"error_count", r.error_count},
         {"fp_event_count", r.fp_event_count},
         {"fn_event_count", r.fn_event_count},
         {"truncated_trials", r.truncated_trials},
         {"false_positive_sum", r.false_positive_sum},
         {"false_negative_sum", r.false_negative_sum},
         {"measurement_sum", r.measurement_sum},
         {"measurement_sq_sum", u128_to_string(r.measurement_sq_sum)},
         {"pass_survivor_sums", r.pass_survivor_sums},
         {"null_pass_survivor_sums", r.null_pass_survivor_sums},
         {"null_stop_sum", r.null_stop_sum},
         {"null_stop_count", r.null_stop_count},
         {"alt_stop_sum", r.alt_stop_sum},
         {"alt_stop_count", r.alt_stop_count},
         {"best_tau", r.best_tau ? json(*r.best_tau) : json(nullptr)},
         {"error_rate", r.error_rate()},
         {"error_se", r.error_se()},
         {"fp_event_rate", r.fp_event_rate()},
         {"fn_event_rate", r.fn_event_rate()},
         {"mean_measurements", r.mean_measurements()},
         {"measurements_se", r.measurements_se()},
         {"budget_cap", r.budget_cap()},
         {"mean_pass_survivors", r.mean_pass_survivors()},
         {"runtime_seconds", r.runtime_seconds}};
  return j;
}

AggregateResult aggregate_from_json(const json& j) {
  AggregateResult r;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "non_sequential") {
    r.kind = ProcedureKind::NonSequential;
  } else if (kind == "sequential") {
    r.kind = ProcedureKind::Sequential;
  } else if (kind == "sprt") {
    r.kind = ProcedureKind::Sprt;
  } else {
    fail(ErrorKind::Configuration, "unknown result kind: " + kind);
  }
  r.n = j.at("n").get<std::size_t>();
  r.s = j.at("s").get<std::size_t>();
  r.m = j.at("m").get<int>();
  r.trials = j.at("trials").get<std::size_t>();
  r.error_count = j.at("error_count").get<std::size_t>();
  r.fp_event_count = j.at("fp_event_count").get<std::size_t>();
  r.fn_event_count = j.at("fn_event_count").get<std::size_t>();
  r.truncated_trials = j.at("truncated_trials").get<std::size_t>();
  r.false_positive_sum = j.at("false_positive_sum").get<std::uint64_t>();
  r.false_negative_sum = j.at("false_negative_sum").get<std::uint64_t>();
  r.measurement_sum = j.at("measurement_sum").get<std::uint64_t>();
  r.measurement_sq_sum = u128_from_string(j.at("measurement_sq_sum").get<std::string>());
  r.pass_survivor_sums = j.at("pass_survivor_sums").get<std::vector<std::uint64_t>>();
  r.null_pass_survivor_sums = j.at("null_pass_survivor_sums").get<std::vector<std::uint64_t>>();
  r.null_stop_sum = j.at("null_stop_sum").get<std::uint64_t>();
  r.null_stop_count = j.at("null_stop_count").get<std::uint64_t>();
  r.alt_stop_sum = j.at("alt_stop_sum").get<std::uint64_t>();
  r.alt_stop_count = j.at("alt_stop_count").get<std::uint64_t>();
  if (!j.at("best_tau").is_null()) r.best_tau = j.at("best_tau").get<double>();
  r.runtime_seconds = j.at("runtime_seconds").get<double>();
  return r;
}

json to_json(const BoundaryReport& b) {
  return {{"family", to_string(b.family)},
          {"n", b.n},
          {"s", b.s},
          {"m", b.m},
          {"epsilon", b.epsilon},
          {"passes", b.passes},
          {"ns_boundary", maybe_number(b.ns_unreliable_below)},
          {"seq_boundary", maybe_number(b.seq_reliable_beyond)},
          {"seq_boundary_as_stated", maybe_number(b.seq_reliable_beyond_as_stated)},
          {"error_target", b.error_target},
          {"sprt_necessary_divergence", maybe_number(b.sprt_necessary_divergence)},
          {"sequential_gap", b.sequential_gap()}};
}

json to_json(const SweepResult& sweep) {
  json cells = json::array();
  for (const auto& cell : sweep.cells) {
    json c{{"param_value", cell.value},
           {"skipped", !cell.result.has_value()},
           {"skipped_reason", cell.skipped_reason}};
    c["result"] = cell.result ? to_json(*cell.result) : json(nullptr);
    c["boundary"] = cell.boundary ? to_json(*cell.boundary) : json(nullptr);
    cells.push_back(std::move(c));
  }
  return {{"axis", {{"parameter", to_string(sweep.axis.parameter)}, {"values", sweep.axis.values}}},
          {"cells", cells}};
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

const std::vector<std::string> kAggregateColumns = {
    "trials",      "error_rate",         "error_se",       "fp_rate",
    "fn_rate",     "mean_measurements",  "measurements_se", "budget_cap",
    "best_tau"};

const std::vector<std::string> kSweepColumns = {
    "param_value",       "error_rate", "error_se",    "fp_rate",     "fn_rate",
    "mean_measurements", "budget_cap", "ns_boundary", "seq_boundary"};

const std::vector<std::string> kBoundaryColumns = {
    "n",          "s",           "m",
    "epsilon",    "passes",      "ns_boundary",
    "seq_boundary", "seq_boundary_as_stated", "error_target",
    "sprt_necessary_divergence", "sequential_gap"};

const std::vector<std::string> kSprtStudyColumns = {
    "alpha",          "beta",           "log_lower",     "log_upper",
    "mean_stop_null", "mean_stop_alt",  "wald_stop_null", "wald_stop_alt",
    "fp_rate",        "fn_rate",        "mean_measurements", "truncated_trials"};

std::string aggregate_csv(const AggregateResult& r) {
  return csv_header(kAggregateColumns) +
         csv_row({static_cast<double>(r.trials), r.error_rate(), r.error_se(), r.fp_event_rate(),
                  r.fn_event_rate(), r.mean_measurements(), r.measurements_se(), r.budget_cap(),
                  r.best_tau.value_or(kNaN)});
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = csv_header(kSweepColumns);
  for (const auto& cell : sweep.cells) {
    const double ns = cell.boundary ? cell.boundary->ns_unreliable_below : kNaN;
    const double seq = cell.boundary ? cell.boundary->seq_reliable_beyond : kNaN;
    if (cell.result) {
      const auto& r = *cell.result;
      out += csv_row({cell.value, r.error_rate(), r.error_se(), r.fp_event_rate(),
                      r.fn_event_rate(), r.mean_measurements(), r.budget_cap(), ns, seq});
    } else {
      out += csv_row({cell.value, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, ns, seq});
    }
  }
  return out;
}

std::string boundary_csv(const std::vector<BoundaryReport>& reports) {
  std::string out = csv_header(kBoundaryColumns);
  for (const auto& b : reports) {
    out += csv_row({static_cast<double>(b.n), static_cast<double>(b.s), static_cast<double>(b.m),
                    b.epsilon, b.passes, b.ns_unreliable_below, b.seq_reliable_beyond,
                    b.seq_reliable_beyond_as_stated, b.error_target,
                    b.sprt_necessary_divergence, b.sequential_gap() ? 1.0 : 0.0});
  }
  return out;
}

SprtStudy run_sprt_study(const RunConfig& config) {
  const auto* sprt = std::get_if<SprtProcedure>(&config.experiment.procedure);
  if (!sprt) fail(ErrorKind::Usage, "sprt study requires procedure.type = sprt");
  SprtStudy study;
  study.spec = sprt->spec;
  study.result = run_experiment(config.experiment);
  try {
    const auto drifts = llr_drifts(config.experiment.model);
    const auto wald = wald_expected_stops(drifts.mu0, drifts.mu1, sprt->spec.alpha,
                                          sprt->spec.beta);
    study.wald_null = wald.under_null;
    study.wald_alt = wald.under_alternative;
  } catch (const Error&) {
    study.wald_null = study.wald_alt = kNaN;
  }
  return study;
}

json to_json(const SprtStudy& study) {
  return {{"alpha", study.spec.alpha},
          {"beta", study.spec.beta},
          {"log_lower", study.spec.log_lower()},
          {"log_upper", study.spec.log_upper()},
          {"mean_stop_null", study.result.mean_null_stop()},
          {"mean_stop_alt", study.result.mean_alt_stop()},
          {"wald_stop_null", maybe_number(study.wald_null)},
          {"wald_stop_alt", maybe_number(study.wald_alt)},
          {"fp_rate", study.result.fp_component_rate()},
          {"fn_rate", study.result.fn_component_rate()},
          {"result", to_json(study.result)}};
}

std::string sprt_study_csv(const SprtStudy& study) {
  const auto& r = study.result;
  return csv_header(kSprtStudyColumns) +
         csv_row({study.spec.alpha, study.spec.beta, study.spec.log_lower(),
                  study.spec.log_upper(), r.mean_null_stop(), r.mean_alt_stop(), study.wald_null,
                  study.wald_alt, r.fp_component_rate(), r.fn_component_rate(),
                  r.mean_measurements(), static_cast<double>(r.truncated_trials)});
}

OutputFormat output_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return OutputFormat::Csv;
  if (ext == ".json") return OutputFormat::Json;
  fail(ErrorKind::Usage, "output path must end in .csv or .json: " + path.string());
}

void emit_results(const AggregateResult& result, const RunConfig& config,
                  const std::filesystem::path& path) {
  if (output_format(path) == OutputFormat::Csv) {
    write_file(path, aggregate_csv(result));
  } else {
    write_file(path, json{{"config", to_json(config)}, {"result", to_json(result)}}.dump(2) + "\n");
  }
}

void emit_results(const SweepResult& sweep, const RunConfig& config,
                  const std::filesystem::path& path) {
  if (output_format(path) == OutputFormat::Csv) {
    write_file(path, sweep_csv(sweep));
  } else {
    write_file(path, json{{"config", to_json(config)}, {"sweep", to_json(sweep)}}.dump(2) + "\n");
  }
}

void emit_results(const std::vector<BoundaryReport>& reports, const RunConfig& config,
                  const std::filesystem::path& path) {
  if (output_format(path) == OutputFormat::Csv) {
    write_file(path, boundary_csv(reports));
  } else {
    json rows = json::array();
    for (const auto& r : reports) rows.push_back(to_json(r));
    write_file(path, json{{"config", to_json(config)}, {"boundaries", rows}}.dump(2) + "\n");
  }
}

void emit_results(const SprtStudy& study, const RunConfig& config,
                  const std::filesystem::path& path) {
  if (output_format(path) == OutputFormat::Csv) {
    write_file(path, sprt_study_csv(study));
  } else {
    write_file(path, json{{"config", to_json(config)}, {"sprt", to_json(study)}}.dump(2) + "\n");
  }
}

std::vector<BoundaryReport> boundary_grid(const RunConfig& config) {
  const ExperimentConfig& ex = config.experiment;
  std::vector<BoundaryReport> reports;
  auto add = [&](const ExperimentConfig& c) {
    reports.push_back(boundaries(c.model.family, c.n, c.s, c.m, boundary_epsilon(c),
                                 config.error_target));
  };
  if (!config.sweep) {
    add(ex);
    return reports;
  }
  for (double value : config.sweep->values) {
    const auto c = apply_axis_value(ex, config.sweep->parameter, value);
    // theta sweeps do not move the boundaries; one row per value keeps the
    // grid aligned with the sweep.
    add(c);
  }
  return reports;
}

}  // namespace seqthresh
