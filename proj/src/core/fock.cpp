#include "spadecb/fock.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"

namespace spadecb {

namespace {

constexpr double kTailEps = 1e-12;

double log_thermal(double mean, int k) {
  if (mean <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(mean / (1.0 + mean)) - std::log1p(mean);
}

double thermal_p(double mean, int k) { return std::exp(log_thermal(mean, k)); }

// tr(A^s B^{1-s}) = sum_ij a_i^s b_j^{1-s} W_ij^2 with 0^s = 0.
struct PowerTrace {
  std::vector<Eigen::VectorXd> la, lb;  // log eigenvalues, -inf for zero
  std::vector<Eigen::MatrixXd> w2;

  double operator()(double s) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < la.size(); ++n) {
      const auto& a = la[n];
      const auto& b = lb[n];
      Eigen::VectorXd pa(a.size()), pb(b.size());
      for (Eigen::Index i = 0; i < a.size(); ++i) pa[i] = std::isinf(a[i]) ? 0.0 : std::exp(s * a[i]);
      for (Eigen::Index j = 0; j < b.size(); ++j) {
        pb[j] = std::isinf(b[j]) ? 0.0 : std::exp((1.0 - s) * b[j]);
      }
      acc += pa.dot(w2[n] * pb);
    }
    return acc;
  }
};

FockQcb minimise_on_grid(const PowerTrace& tr, int s_points) {
  if (s_points < 2) throw DomainError("s grid needs at least 2 points");
  FockQcb out;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s_points; ++k) {
    const double s = static_cast<double>(k) / (s_points - 1);
    const double v = tr(s);
    if (v < best) {
      best = v;
      out.s_star = s;
    }
  }
  out.exponent = std::max(0.0, -std::log(best));
  return out;
}

Eigen::VectorXd log_or_minus_inf(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? std::log(v[i]) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace

int thermal_cutoff(double mean, double eps) {
  if (mean <= 0.0) return 0;
  const double q = mean / (1.0 + mean);
  // q^{c+1} < eps
  int c = static_cast<int>(std::ceil(std::log(eps) / std::log(q))) - 1;
  c = std::max(c, 0);
  while (std::pow(q, c + 1) >= eps) ++c;
  while (c > 0 && std::pow(q, c) < eps) --c;
  return c;
}

Eigen::VectorXd thermal_fock(double mean, int cutoff) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("thermal mean must be nonnegative");
  if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
  const int need = thermal_cutoff(mean, kTailEps);
  if (cutoff < need) {
    throw TruncationError("cutoff " + std::to_string(cutoff) + " leaves a thermal tail above 1e-12; need " +
                              std::to_string(need),
                          need);
  }
  Eigen::VectorXd p(cutoff + 1);
  for (int k = 0; k <= cutoff; ++k) p[k] = thermal_p(mean, k);
  return p / p.sum();
}

int two_mode_dim(int cutoff) { return (cutoff + 1) * (cutoff + 2) / 2; }

int two_mode_index(int n1, int n2) {
  const int n = n1 + n2;
  return n * (n + 1) / 2 + n2;
}

int required_cutoff(double mean1, double mean2, double eps) {
  double cum = 0.0;
  for (int n = 0; n < 100000; ++n) {
    for (int k = 0; k <= n; ++k) cum += thermal_p(mean1, n - k) * thermal_p(mean2, k);
    if (1.0 - cum < eps) return n;
  }
  throw TruncationError("no practical cutoff reaches the requested tail", 100000);
}

Eigen::MatrixXd FockRotation::dense() const {
  const int dim = two_mode_dim(cutoff);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n <= cutoff; ++n) {
    out.block(n * (n + 1) / 2, n * (n + 1) / 2, n + 1, n + 1) = blocks[n];
  }
  return out;
}

FockRotation fock_transform(const Eigen::Matrix2d& U, int cutoff) {
  if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
  FockRotation rot;
  rot.cutoff = cutoff;
  rot.blocks.resize(cutoff + 1);
  // Applies u1 a1^dag + u2 a2^dag to a level-m vector indexed by n2.
  auto create = [](const Eigen::VectorXd& v, double u1, double u2) {
    const Eigen::Index m = v.size() - 1;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m + 2);
    for (Eigen::Index q = 0; q <= m; ++q) {
      out[q] += u1 * std::sqrt(static_cast<double>(m - q + 1)) * v[q];
      out[q + 1] += u2 * std::sqrt(static_cast<double>(q + 1)) * v[q];
    }
    return out;
  };
  for (int n = 0; n <= cutoff; ++n) {
    Eigen::MatrixXd block(n + 1, n + 1);
    for (int n2 = 0; n2 <= n; ++n2) {
      Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
      for (int k = 1; k <= n - n2; ++k) v = create(v, U(0, 0), U(1, 0)) / std::sqrt(double(k));
      for (int k = 1; k <= n2; ++k) v = create(v, U(0, 1), U(1, 1)) / std::sqrt(double(k));
      block.col(n2) = v;
    }
    rot.blocks[n] = std::move(block);
  }
  return rot;
}

FockRotation mode_rotation_fock(double theta, int cutoff) {
  Eigen::Matrix2d u;
  u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return fock_transform(u, cutoff);
}

Eigen::MatrixXd FockState::dense() const {
  const int dim = two_mode_dim(cutoff);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n <= cutoff; ++n) {
    out.block(n * (n + 1) / 2, n * (n + 1) / 2, n + 1, n + 1) =
        vectors[n] * weights[n].asDiagonal() * vectors[n].transpose();
  }
  return out;
}

FockState fock_state_from_cov(const Eigen::MatrixXd& gamma, int cutoff, bool strict) {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  if (gamma.rows() == 1 && gamma.cols() == 1) g(0, 0) = gamma(0, 0);
  else if (gamma.rows() == 2 && gamma.cols() == 2) g = gamma;
  else throw DomainError("Fock oracle handles one or two modes only");
  if (!g.allFinite()) throw DomainError("covariance has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (g + g.transpose()));
  Eigen::Vector2d d = es.eigenvalues();
  const double top = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < 2; ++i) {
    if (d[i] < -1e-12 * top) throw DomainError("covariance is not positive semidefinite");
    if (d[i] <= 1e-15 * top) d[i] = 0.0;
  }
  const int need = required_cutoff(d[0], d[1], kTailEps);
  if (cutoff <= 0) cutoff = std::max(25, need);

  FockState st;
  st.cutoff = cutoff;
  const FockRotation rot = fock_transform(es.eigenvectors(), cutoff);
  st.vectors = rot.blocks;
  st.weights.resize(cutoff + 1);
  double z = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    Eigen::VectorXd w(n + 1);
    for (int n2 = 0; n2 <= n; ++n2) w[n2] = thermal_p(d[0], n - n2) * thermal_p(d[1], n2);
    z += w.sum();
    st.weights[n] = std::move(w);
  }
  st.truncation_defect = std::max(0.0, 1.0 - z);
  if (strict && st.truncation_defect >= kTailEps) {
    throw TruncationError("cutoff " + std::to_string(cutoff) + " drops weight " +
                              csv::format_double(st.truncation_defect) + "; need " +
                              std::to_string(need),
                          need);
  }
  for (auto& w : st.weights) w /= z;
  return st;
}

Eigen::Matrix2d fock_covariance(const Eigen::MatrixXd& rho, int cutoff) {
  if (rho.rows() != two_mode_dim(cutoff) || rho.cols() != rho.rows()) {
    throw DomainError("density matrix does not match the cutoff");
  }
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int n = 0; n <= cutoff; ++n) {
    for (int n2 = 0; n2 <= n; ++n2) {
      const int n1 = n - n2;
      const int k = two_mode_index(n1, n2);
      g(0, 0) += n1 * rho(k, k);
      g(1, 1) += n2 * rho(k, k);
      // a1^dag a2 |n1, n2> = sqrt((n1 + 1) n2) |n1 + 1, n2 - 1>
      if (n2 > 0) g(0, 1) += std::sqrt((n1 + 1.0) * n2) * rho(k, two_mode_index(n1 + 1, n2 - 1));
    }
  }
  g(1, 0) = g(0, 1);
  return g;
}

Eigen::Matrix2d fock_covariance(const FockState& rho) {
  return fock_covariance(rho.dense(), rho.cutoff);
}

FockQcb qcb_fock(const FockState& rho1, const FockState& rho2, int s_points) {
  if (rho1.cutoff != rho2.cutoff) throw DomainError("states live in different truncated spaces");
  PowerTrace tr;
  for (int n = 0; n <= rho1.cutoff; ++n) {
    tr.la.push_back(log_or_minus_inf(rho1.weights[n]));
    tr.lb.push_back(log_or_minus_inf(rho2.weights[n]));
    tr.w2.push_back((rho1.vectors[n].transpose() * rho2.vectors[n]).array().square().matrix());
  }
  return minimise_on_grid(tr, s_points);
}

FockQcb qcb_fock_dense(const Eigen::MatrixXd& rho1, const Eigen::MatrixXd& rho2, int s_points) {
  if (rho1.rows() != rho1.cols() || rho2.rows() != rho2.cols() || rho1.rows() != rho2.rows()) {
    throw DomainError("density matrices must be square and of equal size");
  }
  for (const auto* r : {&rho1, &rho2}) {
    if ((*r - r->transpose()).norm() > 1e-12 * std::max(1.0, r->norm())) {
      throw DomainError("density matrix is not Hermitian");
    }
    if (std::abs(r->trace() - 1.0) > 1e-10) throw DomainError("density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(rho1), e2(rho2);
  auto clamp = [](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] < 1e-14) v[i] = 0.0;
    }
    return v;
  };
  PowerTrace tr;
  tr.la.push_back(log_or_minus_inf(clamp(e1.eigenvalues())));
  tr.lb.push_back(log_or_minus_inf(clamp(e2.eigenvalues())));
  tr.w2.push_back((e1.eigenvectors().transpose() * e2.eigenvectors()).array().square().matrix());
  return minimise_on_grid(tr, s_points);
}

Eigen::Matrix2d OracleCase::gamma1() const { return Eigen::Vector2d(a1, b1).asDiagonal(); }

Eigen::Matrix2d OracleCase::gamma2() const {
  Eigen::Matrix2d u;
  u << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return u * Eigen::Vector2d(a2, b2).asDiagonal() * u.transpose();
}

std::vector<OracleCase> oracle_family() {
  const double angles[] = {0.0, 0.3, 0.7, std::numbers::pi / 4.0, std::numbers::pi / 2.0};
  const double means[4][4] = {
      {0.3, 0.1, 0.3, 0.1},
      {0.5, 0.2, 0.4, 0.05},
      {0.1, 0.0, 0.25, 0.15},
      {0.45, 0.35, 0.2, 0.5},
  };
  std::vector<OracleCase> out;
  int id = 0;
  for (const auto& m : means) {
    for (double a : angles) out.push_back({id++, m[0], m[1], m[2], m[3], a});
  }
  return out;
}

int auto_cutoff(const Eigen::Matrix2d& gamma) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (gamma + gamma.transpose()));
  const Eigen::Vector2d d = es.eigenvalues().cwiseMax(0.0);
  return std::max(25, required_cutoff(d[0], d[1], kTailEps));
}

int pair_cutoff(const OracleCase& c) {
  return std::max(auto_cutoff(c.gamma1()), auto_cutoff(c.gamma2()));
}

Golden compute_golden(const OracleCase& c, int cutoff, int s_points) {
  if (cutoff <= 0) cutoff = pair_cutoff(c);
  const auto r1 = fock_state_from_cov(c.gamma1(), cutoff);
  const auto r2 = fock_state_from_cov(c.gamma2(), cutoff);
  const auto q = qcb_fock(r1, r2, s_points);
  return {c, r1.cutoff, s_points, q.exponent, q.s_star};
}

std::string goldens_to_csv(const std::vector<Golden>& gs) {
  std::ostringstream ss;
  ss << "# fock oracle goldens v1\n";
  ss << "id,a1,b1,a2,b2,angle,cutoff,s_points,exponent,s_star\n";
  for (const auto& g : gs) {
    ss << g.pair.id;
    for (double v : {g.pair.a1, g.pair.b1, g.pair.a2, g.pair.b2, g.pair.angle}) {
      ss << ',' << csv::format_double(v);
    }
    ss << ',' << g.cutoff << ',' << g.s_points << ',' << csv::format_double(g.exponent) << ','
       << csv::format_double(g.s_star) << '\n';
  }
  return ss.str();
}

std::vector<Golden> goldens_from_csv(const std::string& text) {
  std::vector<Golden> out;
  bool header = false;
  const auto all = csv::lines(text);
  for (std::size_t n = 0; n < all.size(); ++n) {
    const int row = static_cast<int>(n) + 1;
    const auto line = csv::trim(all[n]);
    if (line.empty() || line[0] == '#') continue;
    const auto f = csv::split(line);
    if (!header) {
      if (f.size() != 10 || f[0] != "id") throw ParseError("unexpected golden header", row, 1);
      header = true;
      continue;
    }
    if (f.size() != 10) throw ParseError("expected 10 columns", row, 0);
    Golden g;
    g.pair.id = static_cast<int>(csv::parse_int(f[0], row, 1));
    g.pair.a1 = csv::parse_double(f[1], row, 2);
    g.pair.b1 = csv::parse_double(f[2], row, 3);
    g.pair.a2 = csv::parse_double(f[3], row, 4);
    g.pair.b2 = csv::parse_double(f[4], row, 5);
    g.pair.angle = csv::parse_double(f[5], row, 6);
    g.cutoff = static_cast<int>(csv::parse_int(f[6], row, 7));
    g.s_points = static_cast<int>(csv::parse_int(f[7], row, 8));
    g.exponent = csv::parse_double(f[8], row, 9);
    g.s_star = csv::parse_double(f[9], row, 10);
    out.push_back(g);
  }
  return out;
}

}  // namespace spadecb
