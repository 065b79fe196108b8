#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "spadecb/covariance.hpp"

namespace spadecb {

enum class Method { general, faint, commuting, subdiff_qcb, trispade };

std::string to_string(Method m);

/// Exponent in nats per frame plus the optimiser witnesses.
struct ChernoffResult {
  double exponent = 0.0;
  double s_star = 0.0;
  std::optional<double> theta0_star;
  Method method = Method::general;
  bool multimodal = false;
};

// g_s(x) = 1 / ((x+1)^s - x^s) and lambda_s(x) = ((x+1)^s + x^s) / ((x+1)^s - x^s)
// for x >= 0 and s in (0, 1]. s = 0 throws DomainError.
double g_func(double x, double s);
double lambda_func(double x, double s);
double log_g_func(double x, double s);

/// Eigen-decomposition of a covariance with roundoff clamping. Eigenvalues in
/// [-max(1e-10 * max, truncation_error), 1e-12 * max] are set to 0 and count as
/// outside the support; anything more negative is a DomainError.
struct GammaSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthogonal, columns

  static GammaSpectrum of(const CovMatrix& c);
  static GammaSpectrum of(const Eigen::MatrixXd& m, double truncation_error = 0.0);

  Eigen::Index rank() const;
  /// U f(D) U^T.
  template <class F>
  Eigen::MatrixXd apply(F&& f) const {
    Eigen::VectorXd d(eigenvalues.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(eigenvalues[i]);
    return eigenvectors * d.asDiagonal() * eigenvectors.transpose();
  }
};

/// 2^M det g_s(g1) det g_{1-s}(g2) / det(lambda_s(g1) + lambda_{1-s}(g2)), s in (0,1).
double q_of_s(const CovMatrix& g1, const CovMatrix& g2, double s);
double log_q_of_s(const CovMatrix& g1, const CovMatrix& g2, double s);

/// Limits of Q(s) as s -> 0+ and s -> 1-. With K spanning the kernel of g1,
/// Q(0+) = 1 / det(1 + K^T g2 K).
double q_at_zero(const CovMatrix& g1, const CovMatrix& g2);
double q_at_one(const CovMatrix& g1, const CovMatrix& g2);

/// -ln min_s Q(s) over s in [1e-9, 1 - 1e-9] plus the endpoint limits.
ChernoffResult qcb_general(const CovMatrix& g1, const CovMatrix& g2);

/// I0 - min_s tr(g1^s g2^{1-s}) with 0^s = 0 on [0, 1]. Requires equal traces.
ChernoffResult qcb_faint(const CovMatrix& g1, const CovMatrix& g2);

/// ||g1 g2 - g2 g1||_F <= tol ||g1||_F ||g2||_F.
bool commute_check(const CovMatrix& g1, const CovMatrix& g2, double tol = 1e-8);

/// ln max_s prod_i [(1+x_i)^s (1+y_i)^{1-s} - x_i^s y_i^{1-s}] over the joint
/// eigenvalues. Throws PreconditionError unless commute_check(g1, g2, 1e-8).
ChernoffResult qcb_commuting(const CovMatrix& g1, const CovMatrix& g2);

/// Joint eigenvalues (x_i, y_i) of a commuting pair.
std::pair<Eigen::VectorXd, Eigen::VectorXd> joint_spectrum(const CovMatrix& g1,
                                                           const CovMatrix& g2);

/// qcb_commuting when the pair commutes at 1e-8, qcb_general otherwise.
ChernoffResult qcb_auto(const CovMatrix& g1, const CovMatrix& g2);

}  // namespace spadecb
