#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace spadecb {

/// Single-mode thermal populations n^k / (1+n)^{k+1}, k = 0..cutoff,
/// renormalised. Throws TruncationError (with the required cutoff) when
/// (n / (1+n))^{cutoff+1} >= 1e-12.
Eigen::VectorXd thermal_fock(double mean, int cutoff);

/// Smallest cutoff with (n / (1+n))^{cutoff+1} < eps.
int thermal_cutoff(double mean, double eps = 1e-12);

/// Two-mode space truncated at total photon number N <= cutoff. Basis state
/// |n1, n2> sits at N (N + 1) / 2 + n2 with N = n1 + n2.
int two_mode_dim(int cutoff);
int two_mode_index(int n1, int n2);

/// Smallest total-photon cutoff whose neglected two-mode thermal weight is below eps.
int required_cutoff(double mean1, double mean2, double eps = 1e-12);

/// Passive two-mode transformation restricted to the truncated space, stored
/// per photon-number block. Column n2 of block N is the image of |N - n2, n2>.
struct FockRotation {
  int cutoff = 0;
  std::vector<Eigen::MatrixXd> blocks;

  Eigen::MatrixXd dense() const;
};

/// Representation of the mode map a_k^dag -> sum_j U_jk a_j^dag for a real
/// orthogonal 2x2 U.
FockRotation fock_transform(const Eigen::Matrix2d& U, int cutoff);

/// U(theta) = [[cos, -sin], [sin, cos]]: a1^dag -> cos a1^dag + sin a2^dag.
FockRotation mode_rotation_fock(double theta, int cutoff);

/// Two-mode thermal state rho = R diag(p) R^T kept in factored form: per block
/// the eigenvalues (exact, renormalised over the truncated space) and the
/// eigenvectors (columns of the rotation block).
struct FockState {
  int cutoff = 0;
  std::vector<Eigen::VectorXd> weights;
  std::vector<Eigen::MatrixXd> vectors;
  double truncation_defect = 0.0;  // weight removed by the truncation

  Eigen::MatrixXd dense() const;
};

/// State with Glauber covariance gamma (1x1 or 2x2; a 1x1 input gets a vacuum
/// second mode). cutoff <= 0 selects max(25, required_cutoff). With strict set,
/// a defect of 1e-12 or more throws TruncationError.
FockState fock_state_from_cov(const Eigen::MatrixXd& gamma, int cutoff = 0, bool strict = true);

/// <a_i^dag a_j> of a two-mode state.
Eigen::Matrix2d fock_covariance(const FockState& rho);
Eigen::Matrix2d fock_covariance(const Eigen::MatrixXd& rho, int cutoff);

struct FockQcb {
  double exponent = 0.0;
  double s_star = 0.0;
};

/// -ln min over a uniform s grid on [0, 1] of tr(rho1^s rho2^{1-s}); powers
/// with 0^s = 0 (support projector at s = 0).
FockQcb qcb_fock(const FockState& rho1, const FockState& rho2, int s_points = 1001);

/// Same for dense density matrices through a full symmetric eigendecomposition.
/// Eigenvalues below 1e-14 count as zero. Throws DomainError for non-symmetric
/// input or trace off by more than 1e-10.
FockQcb qcb_fock_dense(const Eigen::MatrixXd& rho1, const Eigen::MatrixXd& rho2,
                       int s_points = 1001);

/// Preregistered two-mode oracle pairs: gamma1 = diag(a1, b1) and
/// gamma2 = U(angle) diag(a2, b2) U(angle)^T.
struct OracleCase {
  int id = 0;
  double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
  double angle = 0.0;

  Eigen::Matrix2d gamma1() const;
  Eigen::Matrix2d gamma2() const;
};

std::vector<OracleCase> oracle_family();

struct Golden {
  OracleCase pair;
  int cutoff = 0;
  int s_points = 0;
  double exponent = 0.0;
  double s_star = 0.0;
};

/// Automatic cutoff for one state: max(25, tail below 1e-12).
int auto_cutoff(const Eigen::Matrix2d& gamma);
/// Common cutoff for both states of a pair.
int pair_cutoff(const OracleCase& c);

Golden compute_golden(const OracleCase& c, int cutoff = 0, int s_points = 1001);

std::string goldens_to_csv(const std::vector<Golden>& g);
std::vector<Golden> goldens_from_csv(const std::string& text);

}  // namespace spadecb
