#include "spadecb/subdiff.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "spadecb/covariance.hpp"
#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"

namespace spadecb {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// a^s b^{1-s} with 0^s = 0, written through precomputed logs.
struct GeoTerm {
  double la = 0.0, lb = 0.0;
  bool zero = false;

  GeoTerm(double a, double b) {
    zero = a <= 0.0 || b <= 0.0;
    if (!zero) {
      la = std::log(a);
      lb = std::log(b);
    }
  }
  double operator()(double s) const { return zero ? 0.0 : std::exp(s * la + (1.0 - s) * lb); }
};

// s T1 + (1 - s) T2 - sum_k a_k^s b_k^{1-s}
struct Objective {
  double t1, t2;
  GeoTerm terms[4];
  int n;

  double operator()(double s) const {
    double v = s * t1 + (1.0 - s) * t2;
    for (int k = 0; k < n; ++k) v -= terms[k](s);
    return v;
  }
};

// cos^2 and sin^2, exact when delta sits within 1e-12 of a multiple of pi/2 so
// that aligned measurements give exactly vanishing variances.
std::pair<double, double> cos_sin_sq(double delta) {
  const double k = std::round(delta / kHalfPi);
  if (std::abs(delta - k * kHalfPi) <= 1e-12) {
    const bool odd = std::fmod(std::abs(k), 2.0) == 1.0;
    return odd ? std::pair{0.0, 1.0} : std::pair{1.0, 0.0};
  }
  const double c = std::cos(delta), s = std::sin(delta);
  return {c * c, s * s};
}

double canonical_angle(double t) {
  double r = std::fmod(t, kHalfPi);
  if (r < 0.0) r += kHalfPi;
  if (r >= kHalfPi) r = 0.0;
  return r;
}

// Normalised (units of I0 chi^2) TRISPADE exponent and its s*.
ConcaveMax spade_normalised(const ScenarioParams& p, double theta0) {
  const auto [a1, b1] = rotated_variances(p.V1x, p.V1y, p.theta1 - theta0);
  const auto [a2, b2] = rotated_variances(p.V2x, p.V2y, p.theta2 - theta0);
  const Objective f{p.trace1(), p.trace2(), {GeoTerm(a1, a2), GeoTerm(b1, b2), GeoTerm(0, 0), GeoTerm(0, 0)}, 2};
  return maximize_concave(f);
}

ConcaveMax qcb_normalised(const ScenarioParams& p) {
  const auto [c2, s2] = cos_sin_sq(p.dtheta());
  // Cross terms weighted by cos^2 and sin^2, written as a^s b^{1-s} with the
  // weight folded into both factors.
  const Objective f{p.trace1(),
                    p.trace2(),
                    {GeoTerm(c2 * p.V1x, c2 * p.V2x), GeoTerm(c2 * p.V1y, c2 * p.V2y),
                     GeoTerm(s2 * p.V1x, s2 * p.V2y), GeoTerm(s2 * p.V1y, s2 * p.V2x)},
                    4};
  return maximize_concave(f);
}

ChernoffResult make_result(double value, double s, double scale, Method m) {
  ChernoffResult r;
  r.exponent = std::max(0.0, value) * scale;
  r.s_star = s;
  r.method = m;
  return r;
}

}  // namespace

void ScenarioParams::validate() const {
  for (double v : {V1x, V1y, V2x, V2y}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("variances must be finite and nonnegative");
  }
  if (!std::isfinite(theta1) || !std::isfinite(theta2)) throw DomainError("angles must be finite");
  if (!(I0 > 0.0) || !std::isfinite(I0)) throw DomainError("I0 must be positive");
  if (!(chi > 0.0) || chi > kChiRefuse) {
    throw DomainError("chi must lie in (0, " + csv::format_double(kChiRefuse) + "]");
  }
}

SecondMoments scenario_moments(double Vx, double Vy, double theta) {
  return moments_from_frame(PrincipalFrame{Vx, Vy, theta});
}

std::pair<double, double> rotated_variances(double Vx, double Vy, double delta) {
  const auto [c2, s2] = cos_sin_sq(delta);
  return {c2 * Vx + s2 * Vy, s2 * Vx + c2 * Vy};
}

ChernoffResult qcb_subdiff(const ScenarioParams& p) {
  p.validate();
  const auto m = qcb_normalised(p);
  return make_result(m.value, m.s, p.scale(), Method::subdiff_qcb);
}

ChernoffResult spade_exponent(const ScenarioParams& p, double theta0) {
  p.validate();
  const auto m = spade_normalised(p, theta0);
  auto r = make_result(m.value, m.s, p.scale(), Method::trispade);
  r.theta0_star = theta0;
  return r;
}

ChernoffResult spade_optimal(const ScenarioParams& p) {
  p.validate();
  constexpr int kGrid = 361;
  struct Cand {
    double theta0;
    ConcaveMax m;
  };
  auto eval = [&](double t) { return Cand{canonical_angle(t), spade_normalised(p, t)}; };

  std::vector<Cand> grid;
  grid.reserve(kGrid);
  for (int k = 0; k < kGrid; ++k) grid.push_back(eval(kHalfPi * k / (kGrid - 1)));

  std::vector<Cand> cands;
  // The pattern is pi/2-periodic, so the last grid point duplicates the first.
  const int period = kGrid - 1;
  const double step = kHalfPi / period;
  for (int k = 0; k < period; ++k) {
    const double left = grid[(k + period - 1) % period].m.value;
    const double right = grid[(k + 1) % period].m.value;
    const double mid = grid[k].m.value;
    if (!(mid >= left && mid >= right)) continue;
    cands.push_back(grid[k]);
    // Golden refinement on [theta_k - step, theta_k + step].
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = grid[k].theta0 - step, b = grid[k].theta0 + step;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = spade_normalised(p, c).value, fd = spade_normalised(p, d).value;
    while (b - a > 1e-10) {
      if (fc >= fd) {
        b = d; d = c; fd = fc;
        c = b - invphi * (b - a);
        fc = spade_normalised(p, c).value;
      } else {
        a = c; c = d; fc = fd;
        d = a + invphi * (b - a);
        fd = spade_normalised(p, d).value;
      }
    }
    cands.push_back(eval(fc >= fd ? c : d));
  }
  const double mean = 0.5 * (p.theta1 + p.theta2);
  for (double t : {p.theta1, p.theta2, mean + kHalfPi / 2.0, mean - kHalfPi / 2.0}) {
    cands.push_back(eval(t));
  }

  Cand best = grid[0];
  for (const auto& c : cands) {
    const double tie = 1e-14 * std::max(1.0, std::abs(best.m.value));
    if (c.m.value > best.m.value + tie ||
        (std::abs(c.m.value - best.m.value) <= tie && c.theta0 < best.theta0)) {
      best = c;
    }
  }
  auto r = make_result(best.m.value, best.m.s, p.scale(), Method::trispade);
  r.theta0_star = best.theta0;
  return r;
}

double gap_from(double xi_q, const ScenarioParams& p, double theta0) {
  const double xi = spade_exponent(p, theta0).exponent;
  if (!(xi_q > 1e-14 * p.scale() * (p.trace1() + p.trace2())) || xi_q == 0.0) {
    throw DomainError("gap undefined: the quantum Chernoff exponent vanishes (identical sources)");
  }
  return (xi_q - xi) / xi_q;
}

double gap(const ScenarioParams& p, double theta0) {
  return gap_from(qcb_subdiff(p).exponent, p, theta0);
}

ChernoffResult oneD_qcb(double V1, double V2, double dtheta, double scale) {
  if (!(V1 > 0.0) || !(V2 > 0.0)) {
    throw DomainError("oneD_qcb needs positive variances; use qcb_subdiff for zero variances");
  }
  const double c2 = cos_sin_sq(dtheta).first;
  const Objective f{V1, V2, {GeoTerm(c2 * V1, c2 * V2), GeoTerm(0, 0), GeoTerm(0, 0), GeoTerm(0, 0)}, 1};
  const auto m = maximize_concave(f);
  return make_result(m.value, m.s, scale, Method::subdiff_qcb);
}

bool oneD_optimality_region(double V1, double V2, double dtheta) {
  if (!(V1 > 0.0) || !(V2 > 0.0)) throw DomainError("oneD_optimality_region needs positive variances");
  const double c2 = cos_sin_sq(dtheta).first;
  auto holds = [&](double r) { return c2 * std::log(r) >= (r - 1.0) - 1e-15 * std::max(1.0, r); };
  return holds(V1 / V2) || holds(V2 / V1);
}

double oneD_boundary_ratio(double dtheta) {
  const double c2 = cos_sin_sq(dtheta).first;
  if (c2 >= 1.0) return 1.0;
  if (c2 <= 0.0) return 0.0;
  // h(u) = c2 u - e^u + 1 in u = ln r; positive at ln c2, negative far left.
  auto h = [&](double u) { return c2 * u - std::exp(u) + 1.0; };
  double hi = std::log(c2);
  double lo = hi - 1.0;
  while (h(lo) > 0.0) {
    lo = hi - 2.0 * (hi - lo);
    if (lo < -800.0) return 0.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

ChernoffResult rotated_qcb(double Vx, double Vy, double dtheta, double scale) {
  if (!(Vx >= 0.0) || !(Vy >= 0.0)) throw DomainError("variances must be nonnegative");
  const double s2 = cos_sin_sq(dtheta).second;
  const double d = std::sqrt(Vx) - std::sqrt(Vy);
  return make_result(s2 * d * d, 0.5, scale, Method::subdiff_qcb);
}

AmGmBound amgm_cs_lower_bound(double delta1, double delta2, double s) {
  if (!(s >= 0.0) || s > 1.0) throw DomainError("s must lie in [0, 1]");
  auto spow = [](double x, double e) {
    if (x <= 0.0) return 0.0;
    return e == 0.0 ? 1.0 : std::pow(x, e);
  };
  const auto [cc1, ss1] = cos_sin_sq(delta1);
  const auto [cc2, ss2] = cos_sin_sq(delta2);
  AmGmBound b;
  b.lhs = spow(ss1, s) * spow(ss2, 1.0 - s) + spow(cc1, s) * spow(cc2, 1.0 - s);
  b.rhs = cos_sin_sq(delta1 - delta2).first;
  return b;
}

}  // namespace spadecb
