#include "spadecb/covariance.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"

namespace spadecb {

GaussianPsf::GaussianPsf(double s) : sigma(s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("PSF sigma must be positive");
}

double GaussianPsf::psi(double x) const {
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  return norm * std::exp(-x * x / (4.0 * sigma * sigma));
}

std::vector<HgIndex> hg_modes(int max_order) {
  std::vector<HgIndex> out;
  for (int n = 0; n <= max_order; ++n) {
    for (int s = n; s >= 0; --s) out.push_back({s, n - s});
  }
  return out;
}

bool BasisTag::compatible_with(const BasisTag& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case BasisKind::generic: return true;
    case BasisKind::position:
      return nx == o.nx && ny == o.ny && std::abs(dx - o.dx) <= 1e-12 * std::abs(dx) &&
             std::abs(dy - o.dy) <= 1e-12 * std::abs(dy);
    case BasisKind::hermite_gauss: return modes == o.modes;
  }
  return false;
}

std::string BasisTag::describe() const {
  std::ostringstream ss;
  switch (kind) {
    case BasisKind::generic: ss << "generic"; break;
    case BasisKind::position:
      ss << "position nx=" << nx << " ny=" << ny << " dx=" << csv::format_double(dx)
         << " dy=" << csv::format_double(dy);
      break;
    case BasisKind::hermite_gauss:
      ss << "hermite_gauss modes=";
      for (std::size_t k = 0; k < modes.size(); ++k) {
        if (k) ss << ';';
        ss << modes[k].s << ':' << modes[k].t;
      }
      break;
  }
  return ss.str();
}

BasisTag BasisTag::parse(const std::string& text) {
  std::istringstream ss(text);
  std::string kind;
  ss >> kind;
  BasisTag tag;
  if (kind == "generic") return tag;
  std::string field;
  if (kind == "position") {
    tag.kind = BasisKind::position;
    while (ss >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ParseError("malformed basis field '" + field + "'");
      const auto key = field.substr(0, eq);
      const auto val = field.substr(eq + 1);
      if (key == "nx") tag.nx = static_cast<int>(csv::parse_int(val, 0, 0));
      else if (key == "ny") tag.ny = static_cast<int>(csv::parse_int(val, 0, 0));
      else if (key == "dx") tag.dx = csv::parse_double(val, 0, 0);
      else if (key == "dy") tag.dy = csv::parse_double(val, 0, 0);
      else throw ParseError("unknown basis field '" + key + "'");
    }
    return tag;
  }
  if (kind == "hermite_gauss") {
    tag.kind = BasisKind::hermite_gauss;
    ss >> field;
    if (field.rfind("modes=", 0) != 0) throw ParseError("hermite_gauss basis needs modes=");
    for (const auto& m : csv::split(field.substr(6), ';')) {
      const auto parts = csv::split(m, ':');
      if (parts.size() != 2) throw ParseError("malformed mode '" + m + "'");
      tag.modes.push_back({static_cast<int>(csv::parse_int(parts[0], 0, 0)),
                           static_cast<int>(csv::parse_int(parts[1], 0, 0))});
    }
    return tag;
  }
  throw ParseError("unknown basis kind '" + kind + "'");
}

OutputGrid OutputGrid::around(const GaussianPsf& psf, int nx, int ny) {
  OutputGrid g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 10.0 * psf.sigma / nx;
  g.dy = 10.0 * psf.sigma / ny;
  return g;
}

CovMatrix position_covariance(const IntensityGrid& src, const GaussianPsf& psf,
                              const OutputGrid& out) {
  src.validate();
  if (out.nx <= 0 || out.ny <= 0 || !(out.dx > 0.0) || !(out.dy > 0.0)) {
    throw DomainError("position_covariance: empty output grid");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(out.nx) * out.ny;
  std::vector<double> xl(out.nx), ym(out.ny);
  for (int l = 0; l < out.nx; ++l) xl[l] = (l - 0.5 * (out.nx - 1)) * out.dx;
  for (int m = 0; m < out.ny; ++m) ym[m] = (m - 0.5 * (out.ny - 1)) * out.dy;

  std::vector<std::size_t> lit;
  for (std::size_t k = 0; k < src.values.size(); ++k) {
    if (src.values[k] > 0.0) lit.push_back(k);
  }
  Eigen::MatrixXd amp(dim, static_cast<Eigen::Index>(lit.size()));
  const double sx = std::sqrt(out.dx);
  const double sy = std::sqrt(out.dy);
  Eigen::VectorXd ax(out.nx), ay(out.ny);
  for (std::size_t c = 0; c < lit.size(); ++c) {
    const std::size_t i = lit[c] % src.nx();
    const std::size_t j = lit[c] / src.nx();
    for (int l = 0; l < out.nx; ++l) ax[l] = psf.psi(src.x_coords[i] - xl[l]) * sx;
    for (int m = 0; m < out.ny; ++m) ay[m] = psf.psi(src.y_coords[j] - ym[m]) * sy;
    const double w = std::sqrt(src.values[lit[c]]);
    for (int m = 0; m < out.ny; ++m) {
      amp.col(static_cast<Eigen::Index>(c)).segment(static_cast<Eigen::Index>(m) * out.nx, out.nx) =
          w * ay[m] * ax;
    }
  }
  CovMatrix cov;
  cov.entries = Eigen::MatrixXd::Zero(dim, dim);
  if (!lit.empty()) {
    cov.entries.selfadjointView<Eigen::Lower>().rankUpdate(amp);
    cov.entries = cov.entries.selfadjointView<Eigen::Lower>();
  }
  cov.basis.kind = BasisKind::position;
  cov.basis.nx = out.nx;
  cov.basis.ny = out.ny;
  cov.basis.dx = out.dx;
  cov.basis.dy = out.dy;
  cov.I0 = src.total_intensity();
  return cov;
}

CovMatrix hg_covariance_exact(const NormalizedImage& img, double sigma, int max_order) {
  if (max_order < 2) throw DomainError("hg_covariance_exact: max_order must be at least 2");
  if (!(sigma > 0.0)) throw DomainError("hg_covariance_exact: sigma must be positive");
  const auto modes = hg_modes(max_order);
  const auto dim = static_cast<Eigen::Index>(modes.size());
  const double chi = img.scale_theta / (2.0 * sigma);

  std::vector<double> inv_sqrt_fact(max_order + 1);
  for (int n = 0; n <= max_order; ++n) inv_sqrt_fact[n] = std::exp(-0.5 * std::lgamma(n + 1.0));

  // gamma = I0 * sum_k w_k f_k f_k^T with f_(s,t) = e^{-chi^2 r^2 / 2} u^s v^t / sqrt(s! t!).
  Eigen::MatrixXd amp(dim, static_cast<Eigen::Index>(img.size()));
  std::vector<double> pu(max_order + 1), pv(max_order + 1);
  for (std::size_t k = 0; k < img.size(); ++k) {
    const double u = chi * img.x[k];
    const double v = chi * img.y[k];
    const double env = std::exp(-0.5 * (u * u + v * v));
    pu[0] = pv[0] = 1.0;
    for (int n = 1; n <= max_order; ++n) {
      pu[n] = pu[n - 1] * u;
      pv[n] = pv[n - 1] * v;
    }
    const double w = std::sqrt(img.density[k] * img.total_intensity);
    for (Eigen::Index a = 0; a < dim; ++a) {
      const auto [s, t] = modes[a];
      amp(a, static_cast<Eigen::Index>(k)) =
          w * env * pu[s] * pv[t] * inv_sqrt_fact[s] * inv_sqrt_fact[t];
    }
  }
  CovMatrix cov;
  cov.entries = Eigen::MatrixXd::Zero(dim, dim);
  cov.entries.selfadjointView<Eigen::Lower>().rankUpdate(amp);
  cov.entries = cov.entries.selfadjointView<Eigen::Lower>();
  cov.basis.kind = BasisKind::hermite_gauss;
  cov.basis.modes = modes;
  cov.I0 = img.total_intensity;
  return cov;
}

CovMatrix hg_covariance_chi2(const SecondMoments& m, double I0, double chi) {
  if (!(chi > 0.0) || !std::isfinite(chi)) throw DomainError("hg_covariance_chi2: chi must be positive");
  if (chi > kChiRefuse) {
    throw DomainError("hg_covariance_chi2: chi = " + std::to_string(chi) +
                      " is outside the order-chi^2 expansion (limit " +
                      std::to_string(kChiRefuse) + ")");
  }
  if (!(I0 >= 0.0) || !std::isfinite(I0)) throw DomainError("hg_covariance_chi2: I0 must be nonnegative");
  const double c2 = chi * chi;
  const double r2 = std::numbers::sqrt2 / 2.0;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(6, 6);
  g(0, 0) = 1.0 - c2 * (m.m20 + m.m02);
  g(0, 1) = g(1, 0) = chi * m.m10;
  g(0, 2) = g(2, 0) = chi * m.m01;
  g(0, 3) = g(3, 0) = c2 * r2 * m.m20;
  g(0, 4) = g(4, 0) = c2 * m.m11;
  g(0, 5) = g(5, 0) = c2 * r2 * m.m02;
  g(1, 1) = c2 * m.m20;
  g(1, 2) = g(2, 1) = c2 * m.m11;
  g(2, 2) = c2 * m.m02;

  CovMatrix cov;
  cov.entries = I0 * g;
  cov.basis.kind = BasisKind::hermite_gauss;
  cov.basis.modes = hg_modes(2);
  cov.I0 = I0;
  // The alpha block carries an O(chi^4) negative eigenvalue, -I0 chi^4 |eta|^2 / alpha.
  cov.truncation_error = 2.0 * I0 * c2 * c2 *
                         (1.0 + m.m20 * m.m20 + m.m02 * m.m02 + 2.0 * m.m11 * m.m11);
  return cov;
}

SubdiffCov split_blocks(const CovMatrix& cov6, double chi) {
  if (cov6.dim() != 6) throw DomainError("split_blocks: expected a 6x6 covariance");
  if (cov6.basis.kind == BasisKind::hermite_gauss && !(cov6.basis.modes == hg_modes(2))) {
    throw DomainError("split_blocks: basis is not the (00,10,01,20,11,02) Hermite-Gauss set");
  }
  const double tol = 1e-10 * std::max(cov6.I0, 1e-300);
  const double c01 = cov6.entries(0, 1);
  const double c02 = cov6.entries(0, 2);
  if (std::abs(c01) > tol || std::abs(c02) > tol) {
    throw PreconditionError("split_blocks: source is not centred; gamma[00,10] = " +
                            csv::format_double(c01) + ", gamma[00,01] = " +
                            csv::format_double(c02));
  }
  SubdiffCov out;
  const int alpha[4] = {0, 3, 4, 5};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) out.gamma_alpha(a, b) = cov6.entries(alpha[a], alpha[b]);
  }
  out.gamma_beta = cov6.entries.block<2, 2>(1, 1);
  out.I0 = cov6.I0;
  out.chi = chi;
  return out;
}

CovMatrix alpha_block(const SubdiffCov& sub, double truncation_error) {
  CovMatrix c;
  c.entries = sub.gamma_alpha;
  c.basis.kind = BasisKind::hermite_gauss;
  c.basis.modes = {{0, 0}, {2, 0}, {1, 1}, {0, 2}};
  c.I0 = c.entries.trace();
  c.truncation_error = truncation_error;
  return c;
}

CovMatrix beta_block(const SubdiffCov& sub) {
  CovMatrix c;
  c.entries = sub.gamma_beta;
  c.basis.kind = BasisKind::hermite_gauss;
  c.basis.modes = {{1, 0}, {0, 1}};
  c.I0 = c.entries.trace();
  return c;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_valid_covariance(const CovMatrix& c) {
  if (c.entries.rows() != c.entries.cols()) return false;
  if (!c.entries.allFinite()) return false;
  const double norm = c.entries.norm();
  if ((c.entries - c.entries.transpose()).norm() > 1e-12 * std::max(norm, 1e-300)) return false;
  const double floor = -std::max(1e-10 * std::abs(c.entries.trace()), c.truncation_error);
  return min_eigenvalue(c.entries) >= floor;
}

// ---------------------------------------------------------------------------

std::string to_csv(const CovMatrix& c) {
  std::ostringstream ss;
  ss << "# spadecb-covariance v1\n";
  ss << "# basis: " << c.basis.describe() << "\n";
  ss << "# I0: " << csv::format_double(c.I0) << "\n";
  ss << "# truncation_error: " << csv::format_double(c.truncation_error) << "\n";
  for (Eigen::Index i = 0; i < c.dim(); ++i) {
    for (Eigen::Index j = 0; j < c.dim(); ++j) {
      if (j) ss << ',';
      ss << csv::format_double(c.entries(i, j));
    }
    ss << '\n';
  }
  return ss.str();
}

CovMatrix cov_from_csv(const std::string& text) {
  CovMatrix c;
  bool have_i0 = false;
  std::vector<std::vector<double>> rows;
  const auto all = csv::lines(text);
  for (std::size_t n = 0; n < all.size(); ++n) {
    const int row = static_cast<int>(n) + 1;
    const std::string line = csv::trim(all[n]);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = csv::trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = csv::trim(body.substr(0, colon));
      const std::string val = csv::trim(body.substr(colon + 1));
      if (key == "basis") {
        try {
          c.basis = BasisTag::parse(val);
        } catch (const ParseError& e) {
          throw ParseError(e.what(), row, 1);
        }
      } else if (key == "I0") {
        c.I0 = csv::parse_double(val, row, 1);
        have_i0 = true;
      } else if (key == "truncation_error") {
        c.truncation_error = csv::parse_double(val, row, 1);
      }
      continue;
    }
    const auto fields = csv::split(line);
    std::vector<double> r;
    r.reserve(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      r.push_back(csv::parse_double(fields[k], row, static_cast<int>(k) + 1));
    }
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw ParseError("row has " + std::to_string(r.size()) + " columns, expected " +
                           std::to_string(rows.front().size()),
                       row, static_cast<int>(std::min(r.size(), rows.front().size())) + 1);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("covariance CSV has no rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (static_cast<Eigen::Index>(rows.front().size()) != n) {
    throw ParseError("covariance CSV is not square (" + std::to_string(rows.size()) + " rows, " +
                     std::to_string(rows.front().size()) + " columns)");
  }
  c.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) c.entries(i, j) = rows[i][j];
  }
  if (!have_i0) c.I0 = c.entries.trace();
  if (c.basis.kind == BasisKind::hermite_gauss &&
      static_cast<Eigen::Index>(c.basis.modes.size()) != n) {
    throw ParseError("basis lists " + std::to_string(c.basis.modes.size()) +
                     " modes but the matrix is " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (c.basis.kind == BasisKind::position && static_cast<Eigen::Index>(c.basis.nx) * c.basis.ny != n) {
    throw ParseError("position basis size does not match the matrix dimension");
  }
  return c;
}

CovMatrix load_cov_csv(const std::string& path) { return cov_from_csv(csv::read_file(path)); }

void save_cov_csv(const CovMatrix& c, const std::string& path) { csv::write_file(path, to_csv(c)); }

}  // namespace spadecb
