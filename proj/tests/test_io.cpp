#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "seqthresh/error.hpp"
#include "seqthresh/io.hpp"

using namespace seqthresh;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "model": {"family": "gaussian", "theta1": 2.5},
  "problem": {"n": 512, "s": 4, "m": 2},
  "procedure": {"type": "sequential"},
  "run": {"trials": 20}
})";

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "seqthresh_test_io";
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::string error_message(const std::string& text, ErrorKind* kind = nullptr) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    if (kind) *kind = e.kind();
    return e.what();
  }
  FAIL("expected the config to be rejected: " << text);
  return {};
}

}  // namespace

TEST_CASE("parse_config: minimal document gets defaults") {
  const auto config = parse_config(kMinimal);
  const auto& ex = config.experiment;
  CHECK(ex.model.family == Family::GaussianUnitVar);
  CHECK(ex.model.theta0 == 0.0);
  CHECK(ex.model.theta1 == 2.5);
  CHECK(ex.n == 512);
  CHECK(ex.trials == 20);
  CHECK(ex.seed == 1);
  const auto& seq = std::get<SequentialProcedure>(ex.procedure);
  CHECK(seq.config.epsilon == 0.1);
  CHECK(seq.config.threshold_quantile == 0.5);
  CHECK(seq.config.budget_mode == BudgetMode::Expectation);
  CHECK(seq.variant == SequentialVariant::Parallel);
  CHECK_FALSE(config.sweep.has_value());
}

TEST_CASE("parse_config: procedures") {
  auto with_procedure = [](const std::string& proc) {
    return std::string(R"({"model": {"family": "poisson", "theta0": 4, "theta1": 1},
                          "problem": {"n": 1000, "s": 10, "m": 1},
                          "procedure": )") + proc + "}";
  };
  CHECK(std::holds_alternative<NonSequentialMinTau>(
      parse_config(with_procedure(R"({"type": "non_sequential"})")).experiment.procedure));
  CHECK(std::get<NonSequentialFixed>(
            parse_config(with_procedure(R"({"type": "non_sequential", "tau": 3.5})"))
                .experiment.procedure)
            .tau == 3.5);
  const auto sprt = parse_config(with_procedure(R"({"type": "sprt", "error_target": 0.1})"));
  CHECK(std::get<SprtProcedure>(sprt.experiment.procedure).spec.alpha ==
        doctest::Approx(0.1 / 990));
  const auto scan = parse_config(with_procedure(
      R"({"type": "sequential", "variant": "scanning", "passes": 9, "budget_mode": "hard_cap"})"));
  const auto& seq = std::get<SequentialProcedure>(scan.experiment.procedure);
  CHECK(seq.variant == SequentialVariant::Scanning);
  CHECK(seq.config.passes == 9);
  CHECK(seq.config.budget_mode == BudgetMode::HardCap);
  CHECK(parse_config(with_procedure(R"({"type": "boundary"})")).boundary_only);
}

TEST_CASE("parse_config: rejections name the key") {
  ErrorKind kind{};
  auto msg = error_message(R"({"model": {"family": "gaussian", "theta0": 1, "theta1": 0.5},
      "problem": {"n": 100, "s": 2, "m": 1}, "procedure": {"type": "sequential"}})", &kind);
  CHECK(kind == ErrorKind::Configuration);
  CHECK(msg.find("theta") != std::string::npos);

  msg = error_message(R"({"model": {"family": "gamma", "theta0": 5},
      "problem": {"n": 100, "s": 2, "m": 1}, "procedure": {"type": "boundary"}})", &kind);
  CHECK(kind == ErrorKind::DegenerateBoundary);

  msg = error_message(R"({"model": {"family": "gaussian", "theta1": 1},
      "problem": {"n": 100, "s": 2}, "procedure": {"type": "sequential"}})");
  CHECK(msg.find("problem.m") != std::string::npos);

  msg = error_message(R"({"model": {"family": "gaussian", "theta1": 1, "shape": 2},
      "problem": {"n": 100, "s": 2, "m": 1}, "procedure": {"type": "sequential"}})");
  CHECK(msg.find("shape") != std::string::npos);

  msg = error_message(R"({"model": {"family": "gaussian", "theta1": 1},
      "problem": {"n": 100, "s": 60, "m": 1}, "procedure": {"type": "sequential"}})");
  CHECK_FALSE(msg.empty());

  error_message("not json");
  error_message(R"({"model": {"family": "cauchy", "theta1": 1},
      "problem": {"n": 100, "s": 2, "m": 1}, "procedure": {"type": "sequential"}})");
  error_message(R"({"model": {"family": "gaussian", "theta1": 1},
      "problem": {"n": 100, "s": 2, "m": 1}, "procedure": {"type": "sprt", "alpha": 0.1}})");
}

TEST_CASE("parse_config: sweep grids") {
  const auto config = parse_config(R"({"model": {"family": "gaussian", "theta1": 1},
      "problem": {"n": 100, "s": 2, "m": 1}, "procedure": {"type": "sequential"},
      "run": {"sweep": {"parameter": "theta1", "from": 1, "to": 2, "steps": 5}}})");
  REQUIRE(config.sweep.has_value());
  CHECK(config.sweep->values.size() == 5);
  CHECK(config.sweep->values.front() == 1.0);
  CHECK(config.sweep->values.back() == 2.0);
}

TEST_CASE("normalized config round-trips") {
  const auto config = parse_config(kMinimal);
  const auto j = to_json(config);
  const auto again = parse_config(j.dump());
  CHECK(to_json(again) == j);
  for (const char* key : {"model", "problem", "procedure", "run"}) CHECK(j.contains(key));
  CHECK(j["procedure"].contains("epsilon"));
  CHECK(j["procedure"].contains("threshold_quantile"));
  CHECK(j["run"].contains("seed"));
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("sweep CSV column contract") {
  const std::vector<std::string> expected{"param_value", "error_rate",        "error_se",
                                          "fp_rate",     "fn_rate",           "mean_measurements",
                                          "budget_cap",  "ns_boundary",       "seq_boundary"};
  CHECK(kSweepColumns == expected);
  SweepResult empty;
  const auto csv = sweep_csv(empty);
  CHECK(csv == "param_value,error_rate,error_se,fp_rate,fn_rate,mean_measurements,budget_cap,"
               "ns_boundary,seq_boundary\n");
}

TEST_CASE("emit_results") {
  const auto dir = scratch_dir();
  auto config = parse_config(kMinimal);
  const auto result = run_experiment(config.experiment);

  SUBCASE("JSON round trip") {
    const auto path = dir / "aggregate.json";
    emit_results(result, config, path);
    const auto j = nlohmann::json::parse(read_file(path));
    CHECK(j.contains("config"));
    CHECK(aggregate_from_json(j.at("result")).same_counts(result));
    CHECK(j.at("config") == to_json(config));
  }
  SUBCASE("CSV") {
    const auto path = dir / "aggregate.csv";
    emit_results(result, config, path);
    const auto text = read_file(path);
    std::string header;
    for (std::size_t k = 0; k < kAggregateColumns.size(); ++k) {
      header += (k ? "," : "") + kAggregateColumns[k];
    }
    CHECK(first_line(text) == header);
  }
  SUBCASE("boundary row") {
    auto boundary = parse_config(R"({"model": {"family": "gaussian", "theta1": 1},
        "problem": {"n": 4096, "s": 12, "m": 1}, "procedure": {"type": "boundary"}})");
    const auto reports = boundary_grid(boundary);
    REQUIRE(reports.size() == 1);
    const auto csv = boundary_csv(reports);
    CHECK(csv.find("2.88354507") != std::string::npos);
  }
  SUBCASE("errors") {
    try {
      emit_results(result, config, dir / "missing" / "x.csv");
      FAIL("expected an I/O error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
    CHECK_THROWS_AS(emit_results(result, config, dir / "x.txt"), Error);
    CHECK_THROWS_AS(emit_results(result, config, dir), Error);
  }
  SUBCASE("empty sweep writes a header-only CSV") {
    SweepResult empty;
    const auto path = dir / "empty.csv";
    emit_results(empty, config, path);
    const auto text = read_file(path);
    CHECK(text.find('\n') == text.size() - 1);
  }
}
