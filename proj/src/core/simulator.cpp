#include "spadecb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spadecb/covariance.hpp"
#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/optimize.hpp"

namespace spadecb {

Eigen::Matrix<double, 3, 6> MeasurementBasis::projection() const {
  const double c = std::cos(theta0), s = std::sin(theta0);
  Eigen::Matrix<double, 3, 6> m = Eigen::Matrix<double, 3, 6>::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = c;
  m(1, 2) = s;
  m(2, 1) = -s;
  m(2, 2) = c;
  return m;
}

int OutcomeTable::code(const FrameOutcome& o) const {
  if (o.j == FrameCategory::other) return other_code();
  return 3 * std::min(o.n00, n0_max) + static_cast<int>(o.j);
}

double OutcomeTable::sum() const {
  double acc = 0.0;
  for (double v : prob) acc += v;
  return acc;
}

OutcomeTable outcome_probabilities(const ScenarioParams& p, int hypothesis, double theta0) {
  p.validate();
  if (hypothesis != 1 && hypothesis != 2) throw DomainError("hypothesis must be 1 or 2");
  const bool h1 = hypothesis == 1;
  const double vx = h1 ? p.V1x : p.V2x;
  const double vy = h1 ? p.V1y : p.V2y;
  const double th = h1 ? p.theta1 : p.theta2;
  const double t = vx + vy;
  const auto [mx, my] = rotated_variances(vx, vy, th - theta0);
  const double c2 = p.chi * p.chi;
  const double i0 = p.I0;
  if (c2 * i0 * t >= 0.1) {
    throw DomainError("outcome_probabilities: chi^2 I0 (Vx + Vy) = " + csv::format_double(c2 * i0 * t) +
                      " is too large for the order-chi^2 law; use a smaller chi");
  }
  const double q = i0 / (1.0 + i0);
  int m = 0;
  while (std::pow(q, m + 1) >= 1e-12) ++m;

  OutcomeTable tab;
  tab.n0_max = m;
  tab.prob.assign(3 * (m + 1) + 1, 0.0);
  const double pre = 1.0 / ((1.0 + i0) * (1.0 + i0));
  const double side = c2 * i0 * (1.0 + i0);
  for (int n = 0; n < m; ++n) {
    const double base = std::pow(q, n) * pre;
    tab.prob[3 * n + 0] = base * (1.0 + i0 - c2 * (i0 * i0 + n) * t);
    tab.prob[3 * n + 1] = base * side * mx;
    tab.prob[3 * n + 2] = base * side * my;
  }
  // Geometric tail N >= m folded into the last bucket.
  const double qm = std::pow(q, m);
  const double s0 = qm / (1.0 - q);
  const double s1 = qm * (m * (1.0 - q) + q) / ((1.0 - q) * (1.0 - q));
  tab.prob[3 * m + 0] = pre * ((1.0 + i0 - c2 * i0 * i0 * t) * s0 - c2 * t * s1);
  tab.prob[3 * m + 1] = pre * side * mx * s0;
  tab.prob[3 * m + 2] = pre * side * my * s0;
  for (int k = 0; k < tab.other_code(); ++k) {
    if (tab.prob[k] < 0.0) {
      throw DomainError("outcome_probabilities: negative probability at n00 = " +
                        std::to_string(k / 3) + "; the expansion breaks down, use a smaller chi");
    }
  }
  tab.prob[tab.other_code()] = std::max(0.0, 1.0 - tab.sum());
  return tab;
}

ChernoffResult classical_chernoff(const OutcomeTable& t1, const OutcomeTable& t2) {
  if (t1.size() != t2.size()) throw DomainError("outcome tables differ in size");
  auto spow = [](double x, double e) {
    if (x <= 0.0) return 0.0;
    return e == 0.0 ? 1.0 : std::pow(x, e);
  };
  auto f = [&](double s) {
    double acc = 0.0;
    for (int k = 0; k < t1.size(); ++k) acc += spow(t1.prob[k], s) * spow(t2.prob[k], 1.0 - s);
    return acc;
  };
  const auto m = minimize_scalar(f, 0.0, 1.0);
  ChernoffResult r;
  r.exponent = std::max(0.0, -std::log(m.f));
  r.s_star = m.x;
  r.method = Method::trispade;
  r.multimodal = m.multimodal;
  return r;
}

std::string to_string(SamplingMode m) {
  return m == SamplingMode::closed_form_probs ? "closed_form_probs" : "p_function_exact";
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "closed_form_probs" || s == "closed") return SamplingMode::closed_form_probs;
  if (s == "p_function_exact" || s == "exact") return SamplingMode::p_function_exact;
  throw DomainError("unknown sampling mode '" + s + "'");
}

Eigen::Matrix3d measured_covariance(const ScenarioParams& p, int hypothesis,
                                    const MeasurementBasis& basis) {
  p.validate();
  if (hypothesis != 1 && hypothesis != 2) throw DomainError("hypothesis must be 1 or 2");
  const bool h1 = hypothesis == 1;
  const auto mom = h1 ? scenario_moments(p.V1x, p.V1y, p.theta1)
                      : scenario_moments(p.V2x, p.V2y, p.theta2);
  const auto cov = hg_covariance_chi2(mom, p.I0, p.chi);
  const auto proj = basis.projection();
  Eigen::Matrix3d g = proj * cov.entries * proj.transpose();
  return 0.5 * (g + g.transpose());
}

namespace {

Eigen::Matrix3d amplitude_factor(const Eigen::Matrix3d& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
  Eigen::Vector3d d = es.eigenvalues();
  const double tol = 1e-12 * std::max(g.trace(), 1e-300);
  if (d.minCoeff() < -tol) {
    throw DomainError("sampled covariance is not positive semidefinite (eigenvalue " +
                      csv::format_double(d.minCoeff()) + ")");
  }
  d = d.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

int classify(std::uint64_t n00, std::uint64_t n10, std::uint64_t n01, int n0_max) {
  const int n0 = static_cast<int>(std::min<std::uint64_t>(n00, static_cast<std::uint64_t>(n0_max)));
  if (n10 == 0 && n01 == 0) return 3 * n0;
  if (n10 == 1 && n01 == 0) return 3 * n0 + 1;
  if (n10 == 0 && n01 == 1) return 3 * n0 + 2;
  return 3 * (n0_max + 1);
}

// Draws one frame code; `cdf` is used by the closed-form path, `amp` by the exact one.
struct FrameSampler {
  SamplingMode mode;
  std::vector<double> cdf;
  Eigen::Matrix3d amp;
  int n0_max;

  FrameSampler(const ScenarioParams& p, int hyp, const MeasurementBasis& basis, SamplingMode m)
      : mode(m) {
    const auto tab = outcome_probabilities(p, hyp, basis.theta0);
    n0_max = tab.n0_max;
    cdf.resize(tab.prob.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < tab.prob.size(); ++k) {
      acc += tab.prob[k];
      cdf[k] = acc;
    }
    if (mode == SamplingMode::p_function_exact) amp = amplitude_factor(measured_covariance(p, hyp, basis));
  }

  int draw(PhiloxStream& rng) const {
    if (mode == SamplingMode::closed_form_probs) {
      const double u = rng.uniform() * cdf.back();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    }
    const auto n = sample_exact_counts(amp, rng);
    return classify(n[0], n[1], n[2], n0_max);
  }
};

}  // namespace

std::array<std::uint64_t, 3> sample_exact_counts(const Eigen::Matrix3d& amp, PhiloxStream& rng) {
  Eigen::Vector3d zr, zi;
  for (int k = 0; k < 3; ++k) {
    zr[k] = rng.normal() * M_SQRT1_2;
    zi[k] = rng.normal() * M_SQRT1_2;
  }
  const Eigen::Vector3d br = amp * zr;
  const Eigen::Vector3d bi = amp * zi;
  std::array<std::uint64_t, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = rng.poisson(br[k] * br[k] + bi[k] * bi[k]);
  return out;
}

std::vector<int> sample_frames(const ScenarioParams& p, int hypothesis,
                               const MeasurementBasis& basis, const SimConfig& cfg,
                               PhiloxStream& rng) {
  if (cfg.frames_per_trial < 0) throw DomainError("frames_per_trial must be nonnegative");
  const FrameSampler sampler(p, hypothesis, basis, cfg.sampling_mode);
  std::vector<int> out(static_cast<std::size_t>(cfg.frames_per_trial));
  for (auto& o : out) o = sampler.draw(rng);
  return out;
}

namespace {

std::vector<double> llr_table(const OutcomeTable& t1, const OutcomeTable& t2) {
  if (t1.size() != t2.size()) throw DomainError("outcome tables differ in size");
  std::vector<double> llr(t1.size());
  for (int k = 0; k < t1.size(); ++k) {
    llr[k] = std::log(std::max(t1.prob[k], 1e-300)) - std::log(std::max(t2.prob[k], 1e-300));
  }
  return llr;
}

}  // namespace

int lr_test(const std::vector<int>& outcomes, const OutcomeTable& t1, const OutcomeTable& t2) {
  const auto llr = llr_table(t1, t2);
  double acc = 0.0;
  for (int o : outcomes) {
    if (o < 0 || o >= static_cast<int>(llr.size())) throw DomainError("outcome code out of range");
    acc += llr[o];
  }
  return acc >= 0.0 ? 1 : 2;
}

std::uint64_t trial_stream(std::uint64_t trial, int hypothesis, std::size_t n_index) {
  return (static_cast<std::uint64_t>(hypothesis & 3) << 62) |
         (static_cast<std::uint64_t>(n_index & 0x3FFF) << 48) | (trial & 0xFFFFFFFFFFFFull);
}

ExponentFit estimate_error_exponent(const ScenarioParams& p, double theta0, const SimConfig& cfg,
                                    const std::vector<int>& N_list) {
  p.validate();
  if (N_list.size() < 2) throw DomainError("N_list needs at least two entries");
  const auto [nmin_it, nmax_it] = std::minmax_element(N_list.begin(), N_list.end());
  if (*nmin_it <= 0) throw DomainError("frame counts must be positive");
  if (*nmax_it < 4 * *nmin_it) throw DomainError("N_list must span at least a factor of 4");
  if (cfg.trials <= 0) throw DomainError("trials must be positive");

  const MeasurementBasis basis{theta0};
  const auto t1 = outcome_probabilities(p, 1, theta0);
  const auto t2 = outcome_probabilities(p, 2, theta0);
  const auto llr = llr_table(t1, t2);
  const FrameSampler s1(p, 1, basis, cfg.sampling_mode);
  const FrameSampler s2(p, 2, basis, cfg.sampling_mode);

  // errors[trial] bit 0: hypothesis 1 misjudged, bit 1: hypothesis 2 misjudged.
  auto run = [&](std::size_t n_index, int frames, int begin, int end, std::vector<unsigned char>& errs) {
    errs.resize(static_cast<std::size_t>(end));
    parallel_for(static_cast<std::size_t>(end - begin), [&](std::size_t k) {
      const std::uint64_t trial = static_cast<std::uint64_t>(begin) + k;
      unsigned char e = 0;
      for (int hyp = 1; hyp <= 2; ++hyp) {
        PhiloxStream rng(cfg.seed, trial_stream(trial, hyp, n_index));
        const FrameSampler& s = hyp == 1 ? s1 : s2;
        double acc = 0.0;
        for (int f = 0; f < frames; ++f) acc += llr[s.draw(rng)];
        const int decision = acc >= 0.0 ? 1 : 2;
        if (decision != hyp) e |= static_cast<unsigned char>(hyp);
      }
      errs[trial] = e;
    });
  };
  auto count = [](const std::vector<unsigned char>& errs, long& e1, long& e2) {
    e1 = e2 = 0;
    for (unsigned char e : errs) {
      e1 += e & 1;
      e2 += (e >> 1) & 1;
    }
  };

  ExponentFit fit;
  const std::size_t imax = static_cast<std::size_t>(nmax_it - N_list.begin());
  std::vector<std::vector<unsigned char>> errs(N_list.size());
  int trials = cfg.trials;
  run(imax, N_list[imax], 0, trials, errs[imax]);
  long e1 = 0, e2 = 0;
  count(errs[imax], e1, e2);
  while (e1 + e2 < cfg.min_errors && trials < cfg.max_trials) {
    const int next = std::min(2 * trials, cfg.max_trials);
    run(imax, N_list[imax], trials, next, errs[imax]);
    trials = next;
    count(errs[imax], e1, e2);
  }
  if (e1 + e2 < cfg.min_errors) {
    fit.warnings.push_back("only " + std::to_string(e1 + e2) + " errors at N = " +
                           std::to_string(N_list[imax]) + " after " + std::to_string(trials) +
                           " trials");
  }
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (i != imax) run(i, N_list[i], 0, trials, errs[i]);
    ExponentPoint pt;
    pt.N = N_list[i];
    pt.trials = trials;
    count(errs[i], pt.errors_h1, pt.errors_h2);
    pt.p_hat = static_cast<double>(pt.errors_h1 + pt.errors_h2) / (2.0 * trials);
    fit.points.push_back(pt);
  }

  // Weighted least squares of y = -ln p_hat against N with binomial variances.
  struct Obs {
    double x, y, w;
  };
  std::vector<Obs> obs;
  for (const auto& pt : fit.points) {
    if (pt.errors_h1 + pt.errors_h2 == 0) {
      fit.warnings.push_back("no errors at N = " + std::to_string(pt.N) + "; point dropped");
      continue;
    }
    const double var = (1.0 - pt.p_hat) / (2.0 * pt.trials * pt.p_hat);
    obs.push_back({static_cast<double>(pt.N), -std::log(pt.p_hat), 1.0 / std::max(var, 1e-300)});
  }
  if (obs.size() < 2) throw DomainError("fewer than two frame counts produced errors; cannot fit a slope");
  auto wls = [&](auto&& ytrans, double& slope, double& se) {
    double sw = 0, sx = 0, sy = 0;
    for (const auto& o : obs) {
      sw += o.w;
      sx += o.w * o.x;
      sy += o.w * ytrans(o);
    }
    const double xb = sx / sw, yb = sy / sw;
    double sxx = 0, sxy = 0;
    for (const auto& o : obs) {
      sxx += o.w * (o.x - xb) * (o.x - xb);
      sxy += o.w * (o.x - xb) * (ytrans(o) - yb);
    }
    slope = sxy / sxx;
    se = std::sqrt(1.0 / sxx);
  };
  double se_corr = 0.0;
  wls([](const Obs& o) { return o.y; }, fit.slope, fit.slope_stderr);
  wls([](const Obs& o) { return o.y - 0.5 * std::log(o.x); }, fit.slope_prefactor_corrected, se_corr);
  fit.ci_low = fit.slope - 1.96 * fit.slope_stderr;
  fit.ci_high = fit.slope + 1.96 * fit.slope_stderr;
  fit.xi_theory = spade_exponent(p, theta0).exponent;
  fit.xi_q = qcb_subdiff(p).exponent;
  fit.ratio = fit.xi_theory > 0.0 ? fit.slope / fit.xi_theory : std::nan("");
  return fit;
}

std::string simulation_csv(const ExponentFit& fit, const ScenarioParams& p, double theta0,
                           const SimConfig& cfg) {
  std::ostringstream ss;
  ss << "# scenario v1x=" << csv::format_double(p.V1x) << " v1y=" << csv::format_double(p.V1y)
     << " v2x=" << csv::format_double(p.V2x) << " v2y=" << csv::format_double(p.V2y)
     << " theta1=" << csv::format_double(p.theta1) << " theta2=" << csv::format_double(p.theta2)
     << " i0=" << csv::format_double(p.I0) << " chi=" << csv::format_double(p.chi)
     << " theta0=" << csv::format_double(theta0) << "\n";
  ss << "# config seed=" << cfg.seed << " trials=" << cfg.trials
     << " sampling=" << to_string(cfg.sampling_mode) << " min_errors=" << cfg.min_errors
     << " max_trials=" << cfg.max_trials << "\n";
  ss << "# fit slope=" << csv::format_double(fit.slope) << " ci=[" << csv::format_double(fit.ci_low)
     << "," << csv::format_double(fit.ci_high) << "] slope_prefactor_corrected="
     << csv::format_double(fit.slope_prefactor_corrected) << " xi_q=" << csv::format_double(fit.xi_q)
     << " ratio=" << csv::format_double(fit.ratio) << "\n";
  for (const auto& w : fit.warnings) ss << "# warning: " << w << "\n";
  ss << "N,trials,errors_h1,errors_h2,p_hat,slope_fit,xi_theory\n";
  for (const auto& pt : fit.points) {
    ss << pt.N << ',' << pt.trials << ',' << pt.errors_h1 << ',' << pt.errors_h2 << ','
       << csv::format_double(pt.p_hat) << ',' << csv::format_double(fit.slope) << ','
       << csv::format_double(fit.xi_theory) << '\n';
  }
  return ss.str();
}

}  // namespace spadecb
