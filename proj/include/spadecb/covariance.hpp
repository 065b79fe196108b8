#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spadecb/source.hpp"

namespace spadecb {

/// Separable Gaussian amplitude PSF psi(x) psi(y) with intensity variance
/// sigma^2, normalised so that the integral of psi^2 is one.
struct GaussianPsf {
  double sigma = 1.0;

  explicit GaussianPsf(double s);
  double psi(double x) const;
};

/// Hermite-Gauss mode index (s along x, t along y).
struct HgIndex {
  int s = 0;
  int t = 0;
  bool operator==(const HgIndex&) const = default;
};

/// Modes with s + t <= max_order in the canonical order
/// (00, 10, 01, 20, 11, 02, 30, 21, ...).
std::vector<HgIndex> hg_modes(int max_order);

enum class BasisKind { generic, position, hermite_gauss };

/// Which basis a covariance matrix lives in. Two matrices can only be compared
/// when their tags agree.
struct BasisTag {
  BasisKind kind = BasisKind::generic;
  int nx = 0;  // position
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  std::vector<HgIndex> modes;  // hermite_gauss

  bool compatible_with(const BasisTag& other) const;
  std::string describe() const;
  static BasisTag parse(const std::string& text);
};

/// Real symmetric covariance of a zero-mean thermal state, gamma_ij =
/// <a_i^dag a_j>, whose trace is the mean photon number per frame.
struct CovMatrix {
  Eigen::MatrixXd entries;
  BasisTag basis;
  double I0 = 0.0;
  /// Absolute accuracy of the entries. Nonzero for truncated expansions, where
  /// eigenvalues down to -truncation_error are admissible and read as zero.
  double truncation_error = 0.0;

  Eigen::Index dim() const { return entries.rows(); }
};

/// Output pixel lattice of the image plane; pixel centres at
/// (i - (n - 1) / 2) * pitch.
struct OutputGrid {
  int nx = 32;
  int ny = 32;
  double dx = 0.0;
  double dy = 0.0;

  /// Lattice covering +-5 sigma.
  static OutputGrid around(const GaussianPsf& psf, int nx, int ny);
};

/// Position-basis covariance of the diffracted field. Linear in the source.
CovMatrix position_covariance(const IntensityGrid& src, const GaussianPsf& psf,
                              const OutputGrid& out);

/// Hermite-Gauss covariance by direct pixel summation over the normalised
/// image, chi = scale_theta / (2 sigma). Exact for a Gaussian PSF.
CovMatrix hg_covariance_exact(const NormalizedImage& img, double sigma, int max_order);

/// Order-chi^2 expansion of the 6x6 Hermite-Gauss covariance in the
/// (00, 10, 01, 20, 11, 02) ordering. Refuses chi > kChiRefuse.
CovMatrix hg_covariance_chi2(const SecondMoments& mom, double I0, double chi);

inline constexpr double kChiWarn = 0.2;
inline constexpr double kChiRefuse = 0.5;

/// Block split of a centred 6x6 subdiffraction covariance: alpha holds modes
/// (00, 20, 11, 02), beta holds (10, 01).
struct SubdiffCov {
  Eigen::Matrix4d gamma_alpha;
  Eigen::Matrix2d gamma_beta;
  double I0 = 0.0;
  double chi = 0.0;
};

SubdiffCov split_blocks(const CovMatrix& cov6, double chi = 0.0);

CovMatrix alpha_block(const SubdiffCov& sub, double truncation_error);
CovMatrix beta_block(const SubdiffCov& sub);

/// Smallest eigenvalue (symmetric part).
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Symmetric within 1e-12 * norm and no eigenvalue below
/// -max(1e-10 * trace, truncation_error).
bool is_valid_covariance(const CovMatrix& c);

// CSV: '#' header lines carrying the basis tag, I0 and truncation error,
// followed by the matrix rows.
std::string to_csv(const CovMatrix& c);
CovMatrix cov_from_csv(const std::string& text);
CovMatrix load_cov_csv(const std::string& path);
void save_cov_csv(const CovMatrix& c, const std::string& path);

}  // namespace spadecb
