#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spadecb/philox.hpp"
#include "spadecb/subdiff.hpp"

namespace spadecb {

/// HG00 and the HG10 / HG01 pair rotated by theta0. The rotated pair measures
/// along (cos theta0, sin theta0) and its normal in the (10, 01) plane.
struct MeasurementBasis {
  double theta0 = 0.0;

  /// 3x6 projection from the (00, 10, 01, 20, 11, 02) modes.
  Eigen::Matrix<double, 3, 6> projection() const;
};

enum class FrameCategory { none = 0, one_in_10 = 1, one_in_01 = 2, other = 3 };

struct FrameOutcome {
  int n00 = 0;
  FrameCategory j = FrameCategory::none;
};

/// Per-frame outcome law. Outcome codes: 3 * n00 + j for j in {none,
/// one_in_10, one_in_01} and n00 <= n0_max (the last n00 bucket absorbs the
/// geometric tail), then a final code for "other".
struct OutcomeTable {
  int n0_max = 0;
  std::vector<double> prob;

  int size() const { return static_cast<int>(prob.size()); }
  int other_code() const { return 3 * (n0_max + 1); }
  int code(const FrameOutcome& o) const;
  double sum() const;
};

OutcomeTable outcome_probabilities(const ScenarioParams& p, int hypothesis, double theta0);

/// -ln min_s sum_k P1^s P2^{1-s} of two outcome tables, with 0^s = 0.
ChernoffResult classical_chernoff(const OutcomeTable& t1, const OutcomeTable& t2);

enum class SamplingMode { closed_form_probs, p_function_exact };

std::string to_string(SamplingMode m);
SamplingMode sampling_mode_from_string(const std::string& s);

struct SimConfig {
  int frames_per_trial = 1000;
  int trials = 1000;
  std::uint64_t seed = 1;
  SamplingMode sampling_mode = SamplingMode::p_function_exact;
  int min_errors = 50;       // at the largest N
  int max_trials = 1 << 20;  // widening stops here
};

/// Three-mode covariance (00 and the rotated pair) of hypothesis 1 or 2.
Eigen::Matrix3d measured_covariance(const ScenarioParams& p, int hypothesis,
                                    const MeasurementBasis& basis);

/// Draws frames_per_trial outcome codes. The exact path draws the three
/// projected coherent amplitudes from the Gaussian P-function and Poisson
/// counts given them.
std::vector<int> sample_frames(const ScenarioParams& p, int hypothesis,
                               const MeasurementBasis& basis, const SimConfig& cfg,
                               PhiloxStream& rng);

/// Raw counts (n00, n10, n01) for one exact-path frame.
std::array<std::uint64_t, 3> sample_exact_counts(const Eigen::Matrix3d& amp, PhiloxStream& rng);

/// Larger summed log-likelihood wins; ties go to hypothesis 1. Probabilities
/// are floored at 1e-300.
int lr_test(const std::vector<int>& outcomes, const OutcomeTable& t1, const OutcomeTable& t2);

struct ExponentPoint {
  int N = 0;
  int trials = 0;
  long errors_h1 = 0;
  long errors_h2 = 0;
  double p_hat = 0.0;
};

struct ExponentFit {
  std::vector<ExponentPoint> points;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Slope of -ln P_e - (1/2) ln N, for interior s* where P_e ~ N^{-1/2} e^{-N xi}.
  double slope_prefactor_corrected = 0.0;
  double xi_theory = 0.0;  // spade_exponent at theta0
  double xi_q = 0.0;
  double ratio = 0.0;      // slope / xi_theory
  std::vector<std::string> warnings;
};

/// Stream id of one (trial, hypothesis, N index) simulation.
std::uint64_t trial_stream(std::uint64_t trial, int hypothesis, std::size_t n_index);

/// Monte Carlo estimate of the error exponent. Trials start at cfg.trials and
/// double until at least cfg.min_errors errors occur at the largest N.
ExponentFit estimate_error_exponent(const ScenarioParams& p, double theta0, const SimConfig& cfg,
                                    const std::vector<int>& N_list);

/// CSV with a '#' line echoing the scenario, theta0 and config (seed included),
/// then columns N,trials,errors_h1,errors_h2,p_hat,slope_fit,xi_theory.
std::string simulation_csv(const ExponentFit& fit, const ScenarioParams& p, double theta0,
                           const SimConfig& cfg);

}  // namespace spadecb
