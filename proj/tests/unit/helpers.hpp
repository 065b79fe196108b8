#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "spadecb/covariance.hpp"
#include "spadecb/subdiff.hpp"

namespace testutil {

using std::numbers::pi;

inline spadecb::CovMatrix generic(const Eigen::MatrixXd& m) {
  spadecb::CovMatrix c;
  c.entries = m;
  c.I0 = m.trace();
  return c;
}

inline Eigen::Matrix2d rot(double t) {
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

inline spadecb::ScenarioParams scenario(double v1x, double v1y, double v2x, double v2y, double t1,
                                        double t2, double i0 = 1.0, double chi = 0.1) {
  spadecb::ScenarioParams p;
  p.V1x = v1x;
  p.V1y = v1y;
  p.V2x = v2x;
  p.V2y = v2y;
  p.theta1 = t1;
  p.theta2 = t2;
  p.I0 = i0;
  p.chi = chi;
  return p;
}

// Matrix power of a symmetric PSD matrix by eigendecomposition, 0^s = 0.
inline Eigen::MatrixXd psd_pow(const Eigen::MatrixXd& m, double s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd d = es.eigenvalues();
  const double top = d.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = d[i] <= 1e-14 * top ? 0.0 : std::pow(d[i], s);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace testutil
