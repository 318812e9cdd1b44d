#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "seqthresh/error.hpp"
#include "seqthresh/harness.hpp"

using namespace seqthresh;

namespace {

ExperimentConfig gaussian_config(double theta1, std::size_t n, std::size_t s, int m,
                                 ProcedureSpec procedure, std::size_t trials) {
  ExperimentConfig c;
  c.model = ObservationModel::gaussian(0.0, theta1);
  c.n = n;
  c.s = s;
  c.m = m;
  c.procedure = procedure;
  c.trials = trials;
  c.seed = 2024;
  return c;
}

SequentialProcedure sequential(std::optional<int> passes = std::nullopt) {
  SequentialProcedure p;
  p.config.passes = passes;
  return p;
}

}  // namespace

TEST_CASE("generate_instance") {
  auto config = gaussian_config(1.0, 100, 5, 1, sequential(), 1);
  const auto a = generate_instance(config, 17);
  const auto b = generate_instance(config, 17);
  CHECK(a.support == b.support);
  CHECK(a.seed == b.seed);
  CHECK(a.support != generate_instance(config, 18).support);

  std::vector<int> hits(100, 0);
  for (std::size_t t = 0; t < 10000; ++t) {
    const auto inst = generate_instance(config, t);
    REQUIRE(inst.support.size() == 5);
    REQUIRE(std::adjacent_find(inst.support.begin(), inst.support.end()) == inst.support.end());
    for (auto i : inst.support) ++hits[i];
  }
  for (int h : hits) CHECK(std::abs(h / 10000.0 - 0.05) <= 0.01);
}

TEST_CASE("ExperimentConfig validation") {
  auto config = gaussian_config(1.0, 100, 51, 1, sequential(), 1);
  CHECK_THROWS_AS(config.validate(), Error);
  config.s = 50;
  CHECK_NOTHROW(config.validate());
  config.trials = 0;
  CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("results do not depend on thread count or trial order") {
  const ProcedureSpec procedures[] = {sequential(), NonSequentialFixed{1.0},
                                      NonSequentialMinTau{128},
                                      SprtProcedure{SprtSpec{0.01, 0.01, 100000}}};
  for (const auto& procedure : procedures) {
    auto config = gaussian_config(1.5, 256, 4, 2, procedure, 40);
    config.threads = 1;
    const auto serial = run_experiment(config);
    config.threads = 4;
    const auto threaded = run_experiment(config);
    CHECK(serial.same_counts(threaded));
    CHECK(serial.best_tau == threaded.best_tau);

    std::vector<std::size_t> order(config.trials);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffler(9);
    std::shuffle(order.begin(), order.end(), shuffler);
    CHECK(serial.same_counts(run_experiment_ordered(config, order)));
  }
}

TEST_CASE("AggregateResult merge is associative and commutative") {
  auto config = gaussian_config(1.0, 128, 3, 1, sequential(), 1);
  std::vector<AggregateResult> parts(3);
  for (std::size_t t = 0; t < 30; ++t) {
    const auto inst = generate_instance(config, t);
    parts[t % 3].add_trial(
        run_sequential_parallel(inst, config.model, std::get<SequentialProcedure>(config.procedure).config));
  }
  AggregateResult left = parts[0];
  left.merge(parts[1]);
  left.merge(parts[2]);
  AggregateResult right = parts[1];
  right.merge(parts[2]);
  AggregateResult other = parts[0];
  other.merge(right);
  AggregateResult reversed = parts[2];
  reversed.merge(parts[1]);
  reversed.merge(parts[0]);
  CHECK(left.same_counts(other));
  CHECK(left.same_counts(reversed));
  CHECK(left.trials == 30);
}

TEST_CASE("single trial gives a 0/1 error rate") {
  const auto r = run_experiment(gaussian_config(1.0, 64, 2, 1, sequential(), 1));
  CHECK((r.error_rate() == 0.0 || r.error_rate() == 1.0));
}

TEST_CASE("sequential with one strong support component") {
  const auto r = run_experiment(gaussian_config(20.0, 1024, 1, 1, sequential(20), 2000));
  const double bound = 1023.0 / std::pow(2.0, 20);
  CHECK(r.error_rate() <= bound + 3.0 * binomial_se(bound, r.trials) + 1.0 / r.trials);
  CHECK(r.budget_cap() == 2048.0);
}

TEST_CASE("non-sequential at the alternative median misses half the support") {
  const int m = 2;
  // T_{.,2m} under the alternative is N(theta1, 1/(2m)); its median is theta1.
  const std::size_t s = 3;
  const auto r = run_experiment(gaussian_config(8.0, 200, s, m, NonSequentialFixed{8.0}, 4000));
  const double expected = 1.0 - std::pow(0.5, double(s));
  CHECK(std::abs(r.fn_event_rate() - expected) <= 3.0 * binomial_se(expected, r.trials));
  CHECK(r.fn_component_rate() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("run_sweep") {
  const auto base = gaussian_config(1.0, 256, 4, 2, sequential(), 20);
  SUBCASE("empty grid") {
    try {
      run_sweep(base, SweepAxis{SweepParameter::Theta1, {}});
      FAIL("expected a configuration error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Configuration);
    }
  }
  SUBCASE("invalid values are skipped and flagged") {
    const auto sweep = run_sweep(base, SweepAxis{SweepParameter::Theta1, {2.0, -1.0, 3.0}});
    REQUIRE(sweep.cells.size() == 3);
    CHECK(sweep.cells[0].result.has_value());
    CHECK_FALSE(sweep.cells[1].result.has_value());
    CHECK_FALSE(sweep.cells[1].skipped_reason.empty());
    CHECK(sweep.cells[2].result.has_value());
    CHECK(sweep.cells[0].boundary.has_value());
  }
  SUBCASE("n axis accepts only integers") {
    CHECK_THROWS_AS(apply_axis_value(base, SweepParameter::N, 100.5), Error);
    CHECK(apply_axis_value(base, SweepParameter::N, 512).n == 512);
    CHECK(parse_sweep_parameter("theta0") == SweepParameter::Theta0);
    CHECK_THROWS_AS(parse_sweep_parameter("gamma"), Error);
  }
}

// Exact error of the best fixed tau for the Gaussian model: a trial succeeds
// iff every null statistic is at most tau and every support statistic exceeds it.
double exact_min_tau_error(std::size_t n, std::size_t s, int m, double theta1) {
  const double sd = std::sqrt(1.0 / (2.0 * m));
  auto log_phi = [](double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); };
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 20000; ++k) {
    const double tau = -1.0 + (theta1 + 4.0) * k / 20000.0;
    const double ok = double(n - s) * log_phi(tau / sd) + double(s) * log_phi((theta1 - tau) / sd);
    best = std::max(best, ok);
  }
  return 1.0 - std::exp(best);
}

double crossing_of(const std::vector<double>& xs, const std::vector<double>& errors) {
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (errors[k - 1] >= 0.5 && errors[k] < 0.5) {
      return xs[k - 1] + (xs[k] - xs[k - 1]) * (errors[k - 1] - 0.5) / (errors[k - 1] - errors[k]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct CrossingStudy {
  double boundary = 0.0;
  double empirical = 0.0;
  double exact = 0.0;
};

const CrossingStudy& crossing_study() {
  static const CrossingStudy study = [] {
    const std::size_t n = 4096, s = 12;
    const int m = 2;
    CrossingStudy out;
    out.boundary = gaussian_boundaries(n, s, m, 0.1).ns_unreliable_below;
    auto base = gaussian_config(out.boundary, n, s, m, NonSequentialMinTau{}, 300);
    base.threads = 0;
    SweepAxis axis{SweepParameter::Theta1, {}};
    for (int k = 0; k <= 20; ++k) axis.values.push_back(out.boundary * (0.5 + 0.05 * k));
    const auto sweep = run_sweep(base, axis);
    std::vector<double> empirical, exact;
    for (const auto& cell : sweep.cells) {
      empirical.push_back(cell.result->error_rate());
      exact.push_back(exact_min_tau_error(n, s, m, cell.value));
    }
    out.empirical = crossing_of(axis.values, empirical);
    out.exact = crossing_of(axis.values, exact);
    return out;
  }();
  return study;
}

TEST_CASE("min-tau sweep crosses 1/2 where the exact finite-n error does") {
  const auto& study = crossing_study();
  MESSAGE("empirical crossing " << study.empirical / study.boundary << " x boundary, exact "
                                << study.exact / study.boundary);
  CHECK(std::abs(study.empirical - study.exact) <= 0.05 * study.exact);
  // The sweep range [0.5, 1.5] x boundary brackets the crossing.
  CHECK(study.empirical > 0.5 * study.boundary);
  CHECK(study.empirical < 1.5 * study.boundary);
}

// The first-order boundary sqrt(log(n-s)/m) drops the -log log n correction
// of the Gaussian maximum, so at n = 4096 the crossing sits near 1.38x of it
// (1.24x even at n = 2^30). Kept to document the gap; expected to fail.
TEST_CASE("min-tau crossing within 15% of the asymptotic boundary" * doctest::should_fail()) {
  const auto& study = crossing_study();
  CHECK(study.empirical >= 0.85 * study.boundary);
  CHECK(study.empirical <= 1.15 * study.boundary);
}

TEST_CASE("elimination_profile") {
  SUBCASE("non-sequential results are rejected") {
    const auto r = run_experiment(gaussian_config(1.0, 64, 2, 1, NonSequentialFixed{0.5}, 5));
    try {
      elimination_profile(r);
      FAIL("expected a usage error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Usage);
    }
  }
  SUBCASE("null components halve each pass") {
    auto config = gaussian_config(0.0, 4096, 2, 1, sequential(8), 200);
    const auto r = run_experiment(config);
    const auto rows = elimination_profile(r);
    REQUIRE(rows.size() == 8);
    for (int k = 1; k <= 8; ++k) {
      const double expected = 4096.0 / std::pow(2.0, k);
      // Binomial sd of the per-trial count, averaged over trials.
      const double se = std::sqrt(4096.0 * std::pow(0.5, k) * (1 - std::pow(0.5, k)) / 200.0);
      CHECK(rows[k - 1].pass == k);
      CHECK(std::abs(rows[k - 1].mean_survivors - expected) <= 3.0 * se);
      CHECK(std::abs(rows[k - 1].null_survival_ratio - 0.5) <= 0.1);
    }
  }
  SUBCASE("huge gap keeps the support") {
    const auto r = run_experiment(gaussian_config(12.0, 2048, 8, 2, sequential(12), 100));
    const auto rows = elimination_profile(r);
    for (const auto& row : rows) {
      const double expected = 2040.0 / std::pow(2.0, double(row.pass)) + 8.0;
      CHECK(std::abs(row.mean_survivors - expected) <= 0.05 * expected + 1.0);
    }
  }
}

TEST_CASE("trend: error falls with n when theta1 tracks the sequential boundary") {
  double previous_seq = 1.0;
  double previous_gap = 0.0;
  for (int e : {10, 12, 14}) {
    const std::size_t n = std::size_t{1} << e;
    const std::size_t s = 8;
    const int m = 2;
    const auto b = gaussian_boundaries(n, s, m, 0.5);
    const auto r = run_experiment(
        gaussian_config(1.1 * b.seq_reliable_beyond, n, s, m,
                        [&] {
                          SequentialProcedure p;
                          p.config.epsilon = 0.5;
                          return p;
                        }(),
                        300));
    MESSAGE("n=" << n << " sequential error " << r.error_rate());
    CHECK(r.error_rate() <= previous_seq + 2.0 * r.error_se());
    previous_seq = r.error_rate();

    const auto ns = run_experiment(
        gaussian_config(0.9 * b.ns_unreliable_below, n, s, m, NonSequentialMinTau{}, 300));
    MESSAGE("n=" << n << " min-tau error " << ns.error_rate());
    CHECK(ns.error_rate() >= 0.4);
    CHECK(ns.error_rate() >= previous_gap - 2.0 * ns.error_se());
    previous_gap = ns.error_rate();
  }
}
