#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/philox.hpp"
#include "spadecb/simulator.hpp"

using namespace spadecb;
using testutil::pi;
using testutil::scenario;

TEST_CASE("Philox4x32-10 known answers") {
  const auto z = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);
  const auto f = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(f[0] == 0x408f276du);
  CHECK(f[1] == 0x41c83b0eu);
  CHECK(f[2] == 0xa20bc7c6u);
  CHECK(f[3] == 0x6d5451fdu);
}

TEST_CASE("Philox streams") {
  PhiloxStream a(7, 0), b(7, 0), c(7, 1), d(8, 0);
  std::set<std::uint32_t> seen;
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    differ_c |= x != c.next_u32();
    differ_d |= x != d.next_u32();
  }
  CHECK(differ_c);
  CHECK(differ_d);
  PhiloxStream u(1, 2);
  double mean = 0, var = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    mean += x;
  }
  CHECK(mean / n == doctest::Approx(0.5).epsilon(0.01));
  PhiloxStream g(3, 4);
  mean = 0;
  for (int i = 0; i < n; ++i) {
    const double x = g.normal();
    mean += x;
    var += x * x;
  }
  CHECK(std::abs(mean / n) < 0.01);
  CHECK(var / n == doctest::Approx(1.0).epsilon(0.02));
  for (double m : {0.3, 4.0, 75.0}) {
    PhiloxStream p(5, 6);
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(p.poisson(m));
      s += k;
      s2 += k * k;
    }
    CHECK(s / n == doctest::Approx(m).epsilon(0.02));
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(m).epsilon(0.03));
  }
}

TEST_CASE("outcome tables") {
  const auto p = scenario(1.2, 0.4, 0.7, 0.9, 0.3, -0.5, 2.0, 0.1);
  for (int h : {1, 2})
    for (double t0 : {0.0, 0.4, 1.3}) {
      const auto tab = outcome_probabilities(p, h, t0);
      CHECK(tab.sum() == doctest::Approx(1.0).epsilon(1e-12));
      double side = 0;
      for (int n = 0; n <= tab.n0_max; ++n) side += tab.prob[3 * n + 1] + tab.prob[3 * n + 2];
      const double tr = h == 1 ? p.trace1() : p.trace2();
      CHECK(side == doctest::Approx(p.chi * p.chi * p.I0 * tr).epsilon(1e-10));
      // thermal n00 marginal at leading order
      double p0 = tab.prob[0] + tab.prob[1] + tab.prob[2];
      CHECK(p0 == doctest::Approx(1.0 / (1.0 + p.I0)).epsilon(0.05));
    }
  const auto pt = outcome_probabilities(scenario(0, 0, 1, 1, 0, 0), 1, 0.3);
  for (int n = 0; n <= pt.n0_max; ++n) {
    CHECK(pt.prob[3 * n + 1] == 0.0);
    CHECK(pt.prob[3 * n + 2] == 0.0);
  }
  CHECK_THROWS_AS(outcome_probabilities(scenario(1, 1, 1, 1, 0, 0, 50.0, 0.5), 1, 0.0), DomainError);
  CHECK_THROWS_AS(outcome_probabilities(p, 3, 0.0), DomainError);
}

TEST_CASE("classical Chernoff of the tables") {
  const auto p = scenario(1.2, 0.4, 1.2, 0.4, 0.3, 0.3);
  const auto t = outcome_probabilities(p, 1, 0.0);
  CHECK(classical_chernoff(t, t).exponent < 1e-14);
  // the table exponent tracks the closed form for a faint source
  const auto q = scenario(1.0, 0.2, 0.3, 0.8, 0.4, -0.3, 0.01, 0.1);
  const double t0 = 0.2;
  const auto c = classical_chernoff(outcome_probabilities(q, 1, t0), outcome_probabilities(q, 2, t0));
  CHECK(c.exponent == doctest::Approx(spade_exponent(q, t0).exponent).epsilon(0.02));
}

TEST_CASE("measurement basis") {
  const auto m = MeasurementBasis{0.3}.projection();
  CHECK((m * m.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(m(1, 1) == doctest::Approx(std::cos(0.3)));
  CHECK(m(1, 2) == doctest::Approx(std::sin(0.3)));
  const auto p = scenario(1.0, 0.5, 0.5, 0.5, 0.0, 0.0, 3.0, 0.1);
  const auto g = measured_covariance(p, 1, MeasurementBasis{0.0});
  CHECK(g(0, 0) == doctest::Approx(3.0 * (1 - 0.01 * 1.5)).epsilon(1e-12));
  CHECK(g(1, 1) == doctest::Approx(3.0 * 0.01 * 1.0).epsilon(1e-12));
  CHECK(g(2, 2) == doctest::Approx(3.0 * 0.01 * 0.5).epsilon(1e-12));
}

TEST_CASE("sampling paths") {
  const auto p = scenario(2.0, 1.0, 1.0, 1.0, 0.2, 0.0, 1.5, 0.05);
  const MeasurementBasis b{0.2};
  const auto tab = outcome_probabilities(p, 1, b.theta0);
  SimConfig cfg;
  cfg.frames_per_trial = 400000;
  std::vector<double> freq_exact(tab.size()), freq_closed(tab.size());
  for (auto mode : {SamplingMode::p_function_exact, SamplingMode::closed_form_probs}) {
    cfg.sampling_mode = mode;
    PhiloxStream rng(11, 0);
    const auto f = sample_frames(p, 1, b, cfg, rng);
    REQUIRE(f.size() == 400000u);
    auto& freq = mode == SamplingMode::p_function_exact ? freq_exact : freq_closed;
    for (int k : f) freq[k] += 1.0 / f.size();
  }
  double mean_n00 = 0;
  for (int k = 0; k < tab.other_code(); ++k) mean_n00 += (k / 3) * freq_exact[k];
  CHECK(mean_n00 == doctest::Approx(p.I0 * (1 - p.chi * p.chi * p.trace1())).epsilon(0.02));
  // the two paths agree on the leading outcomes within sampling noise
  for (int k : {0, 1, 2, 3, 4, 5}) {
    const double sd = std::sqrt(tab.prob[k] / cfg.frames_per_trial);
    CAPTURE(k);
    CHECK(std::abs(freq_exact[k] - tab.prob[k]) < 5 * sd + 2e-4);
    CHECK(std::abs(freq_closed[k] - tab.prob[k]) < 5 * sd);
  }
}

TEST_CASE("likelihood ratio test") {
  OutcomeTable a, b;
  a.n0_max = b.n0_max = 0;
  a.prob = {0.5, 0.25, 0.25, 0.0};
  b.prob = {0.25, 0.25, 0.5, 0.0};
  CHECK(lr_test({0}, a, b) == 1);
  CHECK(lr_test({2}, a, b) == 2);
  CHECK(lr_test({1}, a, b) == 1);  // tie
  CHECK(lr_test({0, 2}, a, b) == 1);
  CHECK(lr_test({3}, a, b) == 1);  // both floored
}

TEST_CASE("error exponent estimation") {
  SimConfig cfg;
  cfg.trials = 50;
  cfg.min_errors = 1;
  cfg.max_trials = 50;
  cfg.seed = 9;
  const auto same = scenario(1.0, 0.5, 1.0, 0.5, 0.2, 0.2);
  const auto fit = estimate_error_exponent(same, 0.0, cfg, {10, 40});
  REQUIRE(fit.points.size() == 2);
  CHECK(std::abs(fit.xi_theory) < 1e-15);
  for (const auto& pt : fit.points) CHECK(pt.errors_h1 == 0);
  // determinism
  const auto p = scenario(0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 1.0, 0.1);
  cfg.sampling_mode = SamplingMode::closed_form_probs;
  const auto a = estimate_error_exponent(p, 0.0, cfg, {100, 400});
  const auto b = estimate_error_exponent(p, 0.0, cfg, {100, 400});
  CHECK(simulation_csv(a, p, 0.0, cfg) == simulation_csv(b, p, 0.0, cfg));
  CHECK(a.xi_theory == doctest::Approx(0.002).epsilon(1e-12));
  CHECK(trial_stream(1, 1, 0) != trial_stream(1, 2, 0));
  CHECK(trial_stream(1, 1, 0) != trial_stream(2, 1, 0));
  CHECK(trial_stream(1, 1, 0) != trial_stream(1, 1, 1));
  CHECK(sampling_mode_from_string("exact") == SamplingMode::p_function_exact);
  CHECK_THROWS_AS(sampling_mode_from_string("bogus"), DomainError);
}
