#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/poisson.hpp>

#include "seqthresh/distributions.hpp"
#include "seqthresh/error.hpp"
#include "seqthresh/rng.hpp"
#include "seqthresh/theory.hpp"

using namespace seqthresh;

namespace {

ErrorKind error_kind(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Usage;
}

// Composite Simpson on [a, b] with 20000 panels.
template <class F>
double simpson(F f, double a, double b) {
  const int panels = 20000;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// E[LLR] under the null (alt = false) or the alternative, by quadrature.
double expected_llr(const ObservationModel& model, bool alt) {
  const double theta = model.theta(alt);
  switch (model.family) {
    case Family::GaussianUnitVar:
      return simpson(
          [&](double y) {
            return std::exp(-0.5 * (y - theta) * (y - theta)) / std::sqrt(2 * M_PI) *
                   log_likelihood_ratio(model, y);
          },
          theta - 40.0, theta + 40.0);
    case Family::GammaEnergy:
      return simpson(
          [&](double y) { return std::exp(-y / theta) / theta * log_likelihood_ratio(model, y); },
          0.0, 80.0 * theta);
    case Family::PoissonCount: {
      double acc = 0.0;
      for (int k = 0; k < 400; ++k) {
        acc += poisson_pmf(k, theta) * log_likelihood_ratio(model, k);
      }
      return acc;
    }
  }
  return 0.0;
}

}  // namespace

TEST_CASE("boundaries: frozen values") {
  const auto g = gaussian_boundaries(4096, 12, 1, 0.1);
  CHECK(g.ns_unreliable_below == doctest::Approx(2.88354507148).epsilon(1e-10));
  CHECK(g.passes == doctest::Approx(13.2).epsilon(1e-12));
  CHECK(g.seq_reliable_beyond == doctest::Approx(3.18280488858).epsilon(1e-10));
  CHECK(g.seq_reliable_beyond_as_stated ==
        doctest::Approx(std::sqrt(2.0 * std::log(12.0 * 12.0))).epsilon(1e-12));

  const auto gm = gamma_boundaries(10000, 10, 2, 0.1);
  CHECK(gm.ns_unreliable_below == doctest::Approx(19.9949981239).epsilon(1e-10));
  const double K = 1.1 * std::log2(10000.0);
  CHECK(gm.seq_reliable_beyond == doctest::Approx(std::log(K * 10)).epsilon(1e-12));
  CHECK(gm.seq_reliable_beyond_as_stated ==
        doctest::Approx(std::log(10 * std::log2(10000.0)) / 2).epsilon(1e-12));
  CHECK(gm.sequential_gap());

  const auto p = poisson_boundaries(65536, 16, 1, 0.1);
  CHECK(p.ns_unreliable_below == doctest::Approx(5.54505535926).epsilon(1e-10));
  CHECK(p.seq_reliable_beyond ==
        doctest::Approx(std::log(1.1 * 16 * 16) + 1.0).epsilon(1e-12));

  CHECK(boundaries(Family::PoissonCount, 65536, 16, 1, 0.1).ns_unreliable_below ==
        p.ns_unreliable_below);
}

TEST_CASE("boundaries: preconditions") {
  CHECK(error_kind([] { gamma_boundaries(1000, 10, 1, 0.1); }) == ErrorKind::DegenerateBoundary);
  CHECK_THROWS_AS(gaussian_boundaries(100, 1, 1, 0.1), Error);
  CHECK_THROWS_AS(gaussian_boundaries(100, 100, 1, 0.1), Error);
  CHECK_THROWS_AS(poisson_boundaries(100, 5, 0, 0.1), Error);
}

TEST_CASE("boundaries: shape of the gaps") {
  // Gamma: ns/seq ratio grows without bound with s = log n.
  double previous = 0.0;
  for (int e = 8; e <= 40; e += 4) {
    const std::size_t n = std::size_t{1} << e;
    const auto s = static_cast<std::size_t>(std::log(double(n)));
    const auto r = gamma_boundaries(n, s, 2, 0.1);
    const double ratio = r.ns_unreliable_below / r.seq_reliable_beyond;
    CHECK(ratio > previous);
    previous = ratio;
  }
  CHECK(previous > 10.0);

  // Gamma: the ns boundary decreases to 2(m-1) as m grows.
  double last = 1e300;
  for (int m = 2; m <= 400; m *= 2) {
    const double b = gamma_boundaries(10000, 10, m, 0.1).ns_unreliable_below;
    CHECK(b > 2.0 * (m - 1));
    CHECK(b / (2.0 * (m - 1)) < last);
    last = b / (2.0 * (m - 1));
  }
  CHECK(last < 1.02);

  // The Gaussian sequential boundary beats the non-sequential one for large n.
  CHECK(gaussian_boundaries(std::size_t{1} << 30, 8, 1, 0.1).sequential_gap());
}

TEST_CASE("sprt necessary divergence and KL") {
  CHECK(sprt_necessary_divergence(1000, 100, 2, 0.01) ==
        doctest::Approx(2.302585093).epsilon(1e-9));
  for (double theta : {0.3, 1.0, 2.5}) {
    CHECK(kl_null_to_alt(ObservationModel::gaussian(0.0, theta)) ==
          doctest::Approx(theta * theta / 2));
  }
  CHECK(kl_null_to_alt(ObservationModel::gaussian(1.0, 1.0)) == 0.0);
  CHECK(kl_null_to_alt(ObservationModel::poisson(2.0, 2.0)) == 0.0);
  CHECK(kl_alt_to_null(ObservationModel::gamma_energy(1.0)) == 0.0);
}

TEST_CASE("KL closed forms agree with the expected log-likelihood ratio") {
  const std::vector<ObservationModel> models{
      ObservationModel::gaussian(0.0, 0.25), ObservationModel::gaussian(-1.0, 2.0),
      ObservationModel::gamma_energy(2.0),   ObservationModel::gamma_energy(9.0),
      ObservationModel::poisson(3.0, 1.0),   ObservationModel::poisson(12.0, 0.4)};
  for (const auto& model : models) {
    CHECK(kl_null_to_alt(model) == doctest::Approx(-expected_llr(model, false)).epsilon(1e-7));
    CHECK(kl_alt_to_null(model) == doctest::Approx(expected_llr(model, true)).epsilon(1e-7));
    const auto drift = llr_drifts(model);
    CHECK(drift.mu0 == doctest::Approx(-kl_null_to_alt(model)));
    CHECK(drift.mu1 == doctest::Approx(kl_alt_to_null(model)));
  }
}

TEST_CASE("wald_expected_stops") {
  const auto w = wald_expected_stops(-0.5, 0.5, 0.01, 0.01);
  CHECK(w.under_null == doctest::Approx(9.00643490626).epsilon(1e-10));
  CHECK(w.under_alternative == doctest::Approx(w.under_null).epsilon(1e-14));
  CHECK(error_kind([] { wald_expected_stops(0.0, 0.5, 0.01, 0.01); }) == ErrorKind::DriftSign);
  CHECK(error_kind([] { wald_expected_stops(-0.5, -0.1, 0.01, 0.01); }) == ErrorKind::DriftSign);

  // Small error regime: E0 ~ log(1/beta) / D0.
  const double beta = 1e-12;
  const auto tiny = wald_expected_stops(-0.5, 0.5, 1e-12, beta);
  CHECK(tiny.under_null == doctest::Approx(std::log(1.0 / beta) / 0.5).epsilon(1e-6));
}

TEST_CASE("limits of the smallest null statistic") {
  CHECK(gamma_min_limit(1) == doctest::Approx(0.393469340287).epsilon(1e-11));
  CHECK(gamma_min_limit(2) == doctest::Approx(0.0408105428909).epsilon(1e-11));
  CHECK(gamma_min_limit(20) < 1e-40);
  CHECK(gamma_min_probability(100000, 10, 1) == doctest::Approx(0.392831146).epsilon(1e-8));
  // Finite-n probability approaches the limit.
  CHECK(std::abs(gamma_min_probability(std::size_t{1} << 40, 10, 1) - gamma_min_limit(1)) <
        1e-6);

  CHECK(poisson_min_zero_prob(10000, 10, 1, std::log(9990.0) / 2) ==
        doctest::Approx(0.632138972).epsilon(1e-8));
  CHECK(poisson_min_zero_prob(11, 10, 2, 0.7) == doctest::Approx(std::exp(-2.8)).epsilon(1e-12));
  CHECK(poisson_min_zero_prob(1000, 10, 1, 400.0) < 1e-300);
}

TEST_CASE("Chernoff bound") {
  CHECK(poisson_chernoff_tail(10.0, 1.0) == doctest::Approx(8.10308e-7).epsilon(1e-5));
  CHECK(poisson_chernoff_tail(10.0, 1.0) >= poisson_tail_at_least(10, 1.0));
  CHECK(poisson_tail_at_least(10, 1.0) == doctest::Approx(1.11425478339e-7).epsilon(1e-10));
  for (double rate : {0.1, 1.0, 7.0, 50.0}) {
    CHECK(poisson_chernoff_tail(M_E * rate, rate) == doctest::Approx(std::exp(-rate)));
  }
  CHECK(error_kind([] { poisson_chernoff_tail(1.0, 1.0); }) == ErrorKind::BoundInapplicable);

  Stream rng(4);
  for (int i = 0; i < 500; ++i) {
    const double rate = std::exp(std::log(0.01) + rng.uniform() * std::log(1e4));
    const double gamma = rate * (1.0 + 20.0 * rng.uniform()) + 1e-9;
    const double exact = boost::math::cdf(
        boost::math::complement(boost::math::poisson_distribution<>(rate), std::ceil(gamma) - 1));
    CHECK(poisson_chernoff_tail(gamma, rate) >= exact * (1 - 1e-9));
  }
}

TEST_CASE("sequential budget helpers") {
  CHECK(sequential_budget_bound(4096, 12, 2, 13) == 16648.0);
  CHECK(sequential_false_positive_bound(4096, 0, 16) == 0.0625);
  CHECK(sequential_expected_measurements(4096, 12, 2, 13, 0.5, 1.0) <= 16648.0);
  CHECK(sequential_expected_measurements(4096, 12, 2, 13, 0.5, 0.9977) ==
        doctest::Approx(16646.006).epsilon(1e-3));
  CHECK(sequential_expected_measurements(100, 0, 1, 5, 1.0, 1.0) == 500.0);
}
