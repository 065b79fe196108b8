#pragma once

#include <utility>

#include "spadecb/chernoff.hpp"
#include "spadecb/source.hpp"

namespace spadecb {

/// Two hypotheses described by their principal variances and orientations.
/// Exponents are reported in nats per frame, i.e. multiplied by I0 * chi^2.
struct ScenarioParams {
  double V1x = 0.0;
  double V1y = 0.0;
  double V2x = 0.0;
  double V2y = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double I0 = 1.0;
  double chi = 0.1;

  double dtheta() const { return theta1 - theta2; }
  double scale() const { return I0 * chi * chi; }
  double trace1() const { return V1x + V1y; }
  double trace2() const { return V2x + V2y; }
  /// Throws DomainError on negative or non-finite variances, I0 <= 0, or chi
  /// outside (0, kChiRefuse].
  void validate() const;
};

/// Centred moments of a source with the given principal frame.
SecondMoments scenario_moments(double Vx, double Vy, double theta);

/// Variances seen by a demultiplexer rotated by delta relative to the
/// principal frame: (cos^2 Vx + sin^2 Vy, sin^2 Vx + cos^2 Vy).
std::pair<double, double> rotated_variances(double Vx, double Vy, double delta);

ChernoffResult qcb_subdiff(const ScenarioParams& p);

/// Chernoff exponent of rotated TRISPADE at angle theta0.
ChernoffResult spade_exponent(const ScenarioParams& p, double theta0);

/// Best TRISPADE rotation over theta0 in [0, pi/2]; ties go to the smallest angle.
ChernoffResult spade_optimal(const ScenarioParams& p);

/// (xi_Q - xi(theta0)) / xi_Q. Throws DomainError when xi_Q vanishes.
double gap(const ScenarioParams& p, double theta0);

/// Same as gap() for a precomputed quantum exponent.
double gap_from(double xi_q, const ScenarioParams& p, double theta0);

/// 1D sources of variances V1, V2 at relative angle dtheta. `scale` is I0 chi^2.
ChernoffResult oneD_qcb(double V1, double V2, double dtheta, double scale = 1.0);

/// True when the s-maximum of oneD_qcb sits at an endpoint, i.e. TRISPADE
/// aligned with the smaller-variance image is optimal.
bool oneD_optimality_region(double V1, double V2, double dtheta);

/// Root r* in (0, cos^2 dtheta) of cos^2(dtheta) ln r = r - 1. The optimality
/// region is r* <= V1/V2 <= 1/r*.
double oneD_boundary_ratio(double dtheta);

/// Identical sources rotated by dtheta: sin^2(dtheta) (sqrt Vx - sqrt Vy)^2, s* = 1/2.
ChernoffResult rotated_qcb(double Vx, double Vy, double dtheta, double scale = 1.0);

struct AmGmBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = (sin^2 d1)^s (sin^2 d2)^{1-s} + (cos^2 d1)^s (cos^2 d2)^{1-s},
/// rhs = cos^2(d1 - d2), with 0^s = 0 for all s.
AmGmBound amgm_cs_lower_bound(double delta1, double delta2, double s);

/// Maximum of a concave function on [0, 1] (golden section, endpoints compared).
struct ConcaveMax {
  double s = 0.0;
  double value = 0.0;
};
template <class F>
ConcaveMax maximize_concave(F&& f, double tol = 1e-12);

}  // namespace spadecb

#include "spadecb/detail/concave.hpp"
