#include "spadecb/chernoff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/optimize.hpp"

namespace spadecb {

std::string to_string(Method m) {
  switch (m) {
    case Method::general: return "general";
    case Method::faint: return "faint";
    case Method::commuting: return "commuting";
    case Method::subdiff_qcb: return "subdiff_qcb";
    case Method::trispade: return "trispade";
  }
  return "unknown";
}

namespace {

constexpr double kDelta = 1e-9;

void check_s(double s) {
  if (!(s > 0.0) || s > 1.0) throw DomainError("s must lie in (0, 1]; use the endpoint limits at s = 0");
}

// (1 + 1/x)^s - 1, so that (x+1)^s - x^s = x^s * D.
double excess(double x, double s) { return std::expm1(s * std::log1p(1.0 / x)); }

bool is_zero(double x) { return x == 0.0 || !std::isfinite(1.0 / x); }

// Support convention: 0^s = 0 for every s in [0, 1], x^0 = 1 for x > 0.
double spow(double x, double s) {
  if (x <= 0.0) return 0.0;
  if (s == 0.0) return 1.0;
  return std::pow(x, s);
}

double logdet_spd(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().array().log().sum();
}

void check_pair(const CovMatrix& g1, const CovMatrix& g2) {
  if (g1.entries.rows() != g1.entries.cols() || g2.entries.rows() != g2.entries.cols()) {
    throw DomainError("covariance matrices must be square");
  }
  if (g1.dim() != g2.dim()) {
    throw DomainError("dimension mismatch: " + std::to_string(g1.dim()) + " vs " +
                      std::to_string(g2.dim()));
  }
  if (!g1.basis.compatible_with(g2.basis)) {
    throw DomainError("basis mismatch: '" + g1.basis.describe() + "' vs '" + g2.basis.describe() +
                      "'");
  }
}

// Both spectra and the overlap W = U1^T U2.
struct PairSpectra {
  GammaSpectrum s1, s2;
  Eigen::MatrixXd w;

  PairSpectra(const CovMatrix& g1, const CovMatrix& g2)
      : s1(GammaSpectrum::of(g1)), s2(GammaSpectrum::of(g2)) {
    w = s1.eigenvectors.transpose() * s2.eigenvectors;
  }

  double log_q(double s) const {
    check_s(s);
    if (s >= 1.0) throw DomainError("log_q: s must be below 1");
    const Eigen::Index m = s1.eigenvalues.size();
    double acc = static_cast<double>(m) * std::numbers::ln2;
    Eigen::VectorXd l1(m), l2(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      acc += log_g_func(s1.eigenvalues[i], s) + log_g_func(s2.eigenvalues[i], 1.0 - s);
      l1[i] = lambda_func(s1.eigenvalues[i], s);
      l2[i] = lambda_func(s2.eigenvalues[i], 1.0 - s);
    }
    Eigen::MatrixXd a = w * l2.asDiagonal() * w.transpose();
    a.diagonal() += l1;
    return acc - logdet_spd(0.5 * (a + a.transpose()));
  }
};

double log_q_zero(const GammaSpectrum& s1, const Eigen::MatrixXd& g2) {
  const Eigen::Index k = s1.eigenvalues.size() - s1.rank();
  if (k == 0) return 0.0;
  // Eigenvalues are ascending, so the kernel is the leading block of columns.
  const Eigen::MatrixXd kern = s1.eigenvectors.leftCols(k);
  Eigen::MatrixXd b = kern.transpose() * g2 * kern;
  b = 0.5 * (b + b.transpose());
  b.diagonal().array() += 1.0;
  return -logdet_spd(b);
}

}  // namespace

double log_g_func(double x, double s) {
  check_s(s);
  if (is_zero(x)) return 0.0;
  return -s * std::log(x) - std::log(excess(x, s));
}

double g_func(double x, double s) { return std::exp(log_g_func(x, s)); }

double lambda_func(double x, double s) {
  check_s(s);
  if (is_zero(x)) return 1.0;
  const double d = excess(x, s);
  return (2.0 + d) / d;
}

GammaSpectrum GammaSpectrum::of(const CovMatrix& c) {
  return of(c.entries, c.truncation_error);
}

GammaSpectrum GammaSpectrum::of(const Eigen::MatrixXd& m, double truncation_error) {
  if (m.rows() != m.cols()) throw DomainError("covariance must be square");
  if (!m.allFinite()) throw DomainError("covariance has non-finite entries");
  GammaSpectrum out;
  if (m.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  const double top = std::max(out.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  const double neg_floor = -std::max(1e-10 * top, truncation_error);
  const double zero_band = 1e-12 * top;
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    double& v = out.eigenvalues[i];
    if (v < neg_floor) {
      throw DomainError("covariance is not positive semidefinite (eigenvalue " +
                        csv::format_double(v) + ")");
    }
    if (v <= zero_band) v = 0.0;
  }
  return out;
}

Eigen::Index GammaSpectrum::rank() const {
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) r += eigenvalues[i] > 0.0;
  return r;
}

double log_q_of_s(const CovMatrix& g1, const CovMatrix& g2, double s) {
  check_pair(g1, g2);
  check_s(s);
  if (s >= 1.0) throw DomainError("q_of_s: s must lie in (0, 1)");
  return PairSpectra(g1, g2).log_q(s);
}

double q_of_s(const CovMatrix& g1, const CovMatrix& g2, double s) {
  return std::exp(log_q_of_s(g1, g2, s));
}

double q_at_zero(const CovMatrix& g1, const CovMatrix& g2) {
  check_pair(g1, g2);
  GammaSpectrum::of(g2);
  return std::exp(log_q_zero(GammaSpectrum::of(g1), g2.entries));
}

double q_at_one(const CovMatrix& g1, const CovMatrix& g2) { return q_at_zero(g2, g1); }

ChernoffResult qcb_general(const CovMatrix& g1, const CovMatrix& g2) {
  check_pair(g1, g2);
  const PairSpectra ps(g1, g2);
  const auto inner = minimize_scalar([&](double s) { return ps.log_q(s); }, kDelta, 1.0 - kDelta);
  double best = inner.f;
  double s_star = inner.x;
  const double at0 = log_q_zero(ps.s1, g2.entries);
  const double at1 = log_q_zero(ps.s2, g1.entries);
  if (at0 < best) {
    best = at0;
    s_star = 0.0;
  }
  if (at1 < best) {
    best = at1;
    s_star = 1.0;
  }
  ChernoffResult r;
  r.exponent = std::max(0.0, -best);
  r.s_star = s_star;
  r.method = Method::general;
  r.multimodal = inner.multimodal;
  return r;
}

ChernoffResult qcb_faint(const CovMatrix& g1, const CovMatrix& g2) {
  check_pair(g1, g2);
  const double t1 = g1.entries.trace();
  const double t2 = g2.entries.trace();
  if (std::abs(t1 - t2) > 1e-9 * std::max({1.0, std::abs(t1), std::abs(t2)})) {
    throw DomainError("qcb_faint: total intensities differ (" + csv::format_double(t1) + " vs " +
                      csv::format_double(t2) + ")");
  }
  const PairSpectra ps(g1, g2);
  const Eigen::MatrixXd w2 = ps.w.array().square();
  const Eigen::VectorXd& d1 = ps.s1.eigenvalues;
  const Eigen::VectorXd& d2 = ps.s2.eigenvalues;
  auto tr = [&](double s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d1.size(); ++i) {
      const double a = spow(d1[i], s);
      if (a == 0.0) continue;
      for (Eigen::Index j = 0; j < d2.size(); ++j) acc += a * spow(d2[j], 1.0 - s) * w2(i, j);
    }
    return acc;
  };
  const auto m = minimize_scalar(tr, 0.0, 1.0);
  ChernoffResult r;
  r.exponent = std::max(0.0, t1 - m.f);
  r.s_star = m.x;
  r.method = Method::faint;
  r.multimodal = m.multimodal;
  return r;
}

bool commute_check(const CovMatrix& g1, const CovMatrix& g2, double tol) {
  if (g1.dim() != g2.dim()) throw DomainError("commute_check: dimension mismatch");
  const Eigen::MatrixXd c = g1.entries * g2.entries - g2.entries * g1.entries;
  return c.norm() <= tol * g1.entries.norm() * g2.entries.norm();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> joint_spectrum(const CovMatrix& g1,
                                                           const CovMatrix& g2) {
  check_pair(g1, g2);
  const auto s1 = GammaSpectrum::of(g1);
  GammaSpectrum::of(g2);
  const Eigen::Index m = s1.eigenvalues.size();
  Eigen::VectorXd xs(m), ys(m);
  const double top1 = m ? s1.eigenvalues.maxCoeff() : 0.0;
  const double cluster_tol = 1e-8 * std::max(top1, 1e-300);
  const double top2 = g2.entries.cwiseAbs().maxCoeff();
  Eigen::Index start = 0;
  while (start < m) {
    Eigen::Index end = start + 1;
    while (end < m && s1.eigenvalues[end] - s1.eigenvalues[end - 1] <= cluster_tol) ++end;
    const Eigen::Index len = end - start;
    const Eigen::MatrixXd u = s1.eigenvectors.middleCols(start, len);
    Eigen::MatrixXd b = u.transpose() * g2.entries * u;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b + b.transpose()));
    // x from the Rayleigh quotient of the common eigenvector, not the cluster mean
    const Eigen::MatrixXd w = u * es.eigenvectors();
    const Eigen::MatrixXd a = w.transpose() * g1.entries * w;
    for (Eigen::Index k = 0; k < len; ++k) {
      double x = a(k, k);
      if (x <= 1e-12 * std::max(top1, 1e-300)) x = 0.0;
      xs[start + k] = x;
      double y = es.eigenvalues()[k];
      if (y <= 1e-12 * top2) y = 0.0;
      ys[start + k] = y;
    }
    start = end;
  }
  return {xs, ys};
}

ChernoffResult qcb_commuting(const CovMatrix& g1, const CovMatrix& g2) {
  check_pair(g1, g2);
  if (!commute_check(g1, g2, 1e-8)) {
    throw PreconditionError("qcb_commuting: covariance matrices do not commute");
  }
  const auto [xs, ys] = joint_spectrum(g1, g2);
  auto neg = [&](double s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
      const double x = xs[i], y = ys[i];
      double term = s * std::log1p(x) + (1.0 - s) * std::log1p(y);
      const double px = spow(x / (1.0 + x), s);
      const double py = spow(y / (1.0 + y), 1.0 - s);
      term += std::log1p(-px * py);
      acc += term;
    }
    return -acc;
  };
  const auto m = minimize_scalar(neg, 0.0, 1.0);
  ChernoffResult r;
  r.exponent = std::max(0.0, -m.f);
  r.s_star = m.x;
  r.method = Method::commuting;
  r.multimodal = m.multimodal;
  return r;
}

ChernoffResult qcb_auto(const CovMatrix& g1, const CovMatrix& g2) {
  check_pair(g1, g2);
  if (commute_check(g1, g2, 1e-8)) return qcb_commuting(g1, g2);
  return qcb_general(g1, g2);
}

}  // namespace spadecb
