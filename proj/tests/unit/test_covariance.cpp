#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "spadecb/covariance.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/source.hpp"

using namespace spadecb;
using testutil::pi;

namespace {

IntensityGrid pixels(std::vector<double> xs, std::vector<double> ys, std::vector<double> vals) {
  IntensityGrid g;
  g.x_coords = std::move(xs);
  g.y_coords = std::move(ys);
  g.values = std::move(vals);
  if (g.x_coords.size() > 1) g.pixel_dx = g.x_coords[1] - g.x_coords[0];
  return g;
}

IntensityGrid blob(double sx, double sy, double angle, int n = 65, double ext = 1.0, double i0 = 1.0) {
  SourceSpec s;
  s.kind = SourceKind::gaussian_blob;
  s.sx = sx;
  s.sy = sy;
  s.angle = angle;
  GridSpec g;
  g.nx = g.ny = n;
  g.half_extent_x = g.half_extent_y = ext;
  g.total_intensity = i0;
  return make_source(s, g);
}

}  // namespace

TEST_CASE("hg_modes ordering") {
  const auto m = hg_modes(2);
  REQUIRE(m.size() == 6);
  const HgIndex want[6] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (int i = 0; i < 6; ++i) CHECK(m[i] == want[i]);
  CHECK(hg_modes(4).size() == 15);
}

TEST_CASE("PSF amplitude is normalised") {
  const GaussianPsf psf(0.7);
  double sum = 0.0;
  const double h = 1e-3;
  for (double x = -10; x <= 10; x += h) sum += psf.psi(x) * psf.psi(x) * h;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(GaussianPsf(0.0), DomainError);
}

TEST_CASE("position covariance of a single pixel is rank one") {
  const GaussianPsf psf(1.0);
  const auto out = OutputGrid::around(psf, 8, 8);
  const auto c = position_covariance(pixels({0.0}, {0.0}, {2.0}), psf, out);
  REQUIRE(c.dim() == 64);
  Eigen::VectorXd v(64);
  for (int m = 0; m < 8; ++m)
    for (int l = 0; l < 8; ++l) {
      const double x = (l - 3.5) * out.dx, y = (m - 3.5) * out.dy;
      v[m * 8 + l] = psf.psi(x) * psf.psi(y) * std::sqrt(out.dx * out.dy);
    }
  const Eigen::MatrixXd want = 2.0 * v * v.transpose();
  CHECK((c.entries - want).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(c.basis.kind == BasisKind::position);
}

TEST_CASE("position covariance of zero intensity is zero") {
  const GaussianPsf psf(1.0);
  const auto c = position_covariance(pixels({0.0}, {0.0}, {0.0}), psf, OutputGrid::around(psf, 6, 6));
  CHECK(c.entries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two pixels 4 sigma apart") {
  const GaussianPsf psf(1.0);
  const auto out = OutputGrid::around(psf, 32, 32);
  IntensityGrid g = pixels({-2.0, 2.0}, {0.0}, {0.5, 0.5});
  g.pixel_dx = 4.0;
  const auto c = position_covariance(g, psf, out);
  // overlap of the two sampled amplitude images
  double overlap = 0.0, norm = 0.0;
  for (int l = 0; l < 32; ++l) {
    const double x = (l - 15.5) * out.dx;
    overlap += psf.psi(x + 2.0) * psf.psi(x - 2.0) * out.dx;
    norm += psf.psi(x + 2.0) * psf.psi(x + 2.0) * out.dx;
  }
  double ynorm = 0.0;
  for (int m = 0; m < 32; ++m) {
    const double y = (m - 15.5) * out.dy;
    ynorm += psf.psi(y) * psf.psi(y) * out.dy;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.entries);
  const auto ev = es.eigenvalues();
  const Eigen::Index n = ev.size();
  CHECK(ev[n - 1] == doctest::Approx(0.5 * (norm + overlap) * ynorm).epsilon(1e-10));
  CHECK(ev[n - 2] == doctest::Approx(0.5 * (norm - overlap) * ynorm).epsilon(1e-10));
  CHECK(std::abs(ev[n - 3]) < 1e-12);
  CHECK(std::abs(overlap - std::exp(-2.0)) < 1e-3);
}

TEST_CASE("position covariance is PSD with trace near I0") {
  const auto g = blob(0.3, 0.15, 0.4, 33, 1.0, 1.7);
  const GaussianPsf psf(1.0);
  const auto c = position_covariance(g, psf, OutputGrid::around(psf, 12, 12));
  CHECK(is_valid_covariance(c));
  CHECK(c.entries.trace() < 1.7);
  CHECK(c.entries.trace() > 1.7 * (1 - 1e-5));
}

TEST_CASE("exact HG covariance of a point at the origin") {
  const auto img = normalize(pixels({0.0}, {0.0}, {1.5}), 1.0);
  const auto c = hg_covariance_exact(img, 1.0, 3);
  REQUIRE(c.dim() == 10);
  CHECK(c.entries(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(c.entries.cwiseAbs().sum() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(c.basis.kind == BasisKind::hermite_gauss);
}

TEST_CASE("exact HG covariance of a centred source has no 00-10 coherence") {
  const auto img = center(normalize(blob(0.2, 0.1, 0.7, 65, 1.0, 2.0), 1.0));
  const auto c = hg_covariance_exact(img, 0.5, 2);
  CHECK(std::abs(c.entries(0, 1)) < 1e-12 * 2.0);
  CHECK(std::abs(c.entries(0, 2)) < 1e-12 * 2.0);
  CHECK(is_valid_covariance(c));
}

TEST_CASE("exact HG covariance matches the chi^2 expansion") {
  const double sb = 0.1, chi = 0.05;
  const auto img = center(normalize(blob(sb, 0.6 * sb, 0.3, 129, 0.5, 1.3), sb));
  const auto exact = hg_covariance_exact(img, sb / (2 * chi), 2);
  const auto approx = hg_covariance_chi2(moments(img), 1.3, chi);
  CHECK((exact.entries - approx.entries).cwiseAbs().maxCoeff() <= 5 * std::pow(chi, 4) * 1.3);
}

TEST_CASE("chi^2 covariance") {
  SUBCASE("point source") {
    const auto c = hg_covariance_chi2(SecondMoments{}, 2.0, 0.1);
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(6, 6);
    want(0, 0) = 2.0;
    CHECK((c.entries - want).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("beta block from the displayed matrix") {
    const auto c = hg_covariance_chi2(SecondMoments{0, 0, 1.0, 0.5, 0.2}, 2.0, 0.1);
    CHECK(c.entries(1, 1) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(c.entries(1, 2) == doctest::Approx(0.004).epsilon(1e-14));
    CHECK(c.entries(2, 1) == doctest::Approx(0.004).epsilon(1e-14));
    CHECK(c.entries(2, 2) == doctest::Approx(0.01).epsilon(1e-14));
  }
  SUBCASE("trace equals I0 for centred moments") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 3);
    for (int k = 0; k < 50; ++k) {
      const auto m = testutil::scenario(u(rng), u(rng), 0, 0, u(rng), 0);
      const auto c = hg_covariance_chi2(scenario_moments(m.V1x, m.V1y, m.theta1), 0.7, 0.15);
      CHECK(std::abs(c.entries.trace() - 0.7) < 1e-15);
      CHECK(is_valid_covariance(c));
      CHECK(c.truncation_error > 0.0);
    }
  }
  SUBCASE("chi guard") {
    CHECK_NOTHROW(hg_covariance_chi2(SecondMoments{0, 0, 1, 1, 0}, 1.0, 0.5));
    CHECK_THROWS_AS(hg_covariance_chi2(SecondMoments{0, 0, 1, 1, 0}, 1.0, 0.51), DomainError);
  }
}

TEST_CASE("split_blocks") {
  SUBCASE("beta block is I0 chi^2 times the moment matrix") {
    const SecondMoments m{0, 0, 1.2, 0.4, -0.3};
    const auto s = split_blocks(hg_covariance_chi2(m, 1.5, 0.1), 0.1);
    Eigen::Matrix2d want;
    want << 1.2, -0.3, -0.3, 0.4;
    CHECK((s.gamma_beta - 1.5 * 0.01 * want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(s.gamma_alpha(0, 0) == doctest::Approx(1.5 * (1 - 0.01 * 1.6)));
    CHECK(s.chi == 0.1);
  }
  SUBCASE("point source") {
    const auto s = split_blocks(hg_covariance_chi2(SecondMoments{}, 1.0, 0.1));
    CHECK(s.gamma_beta.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("line along y") {
    SourceSpec ls;
    ls.kind = SourceKind::line;
    ls.length = 1.0;
    ls.angle = pi / 2;
    GridSpec g;
    g.nx = g.ny = 101;
    g.half_extent_x = g.half_extent_y = 0.6;
    const auto mom = moments(center(normalize(make_source(ls, g), 1.0)));
    const auto s = split_blocks(hg_covariance_chi2(mom, 2.0, 0.1));
    CHECK(s.gamma_beta(0, 0) == 0.0);
    CHECK(s.gamma_beta(0, 1) == 0.0);
    CHECK(s.gamma_beta(1, 1) == doctest::Approx(2.0 * 0.01 * mom.m02));
    CHECK(mom.m02 == doctest::Approx(1.0 / 12).epsilon(1e-3));
  }
  SUBCASE("uncentred source is refused with the offending entries") {
    auto c = hg_covariance_chi2(SecondMoments{0, 0, 1, 1, 0}, 1.0, 0.1);
    c.entries(0, 1) = c.entries(1, 0) = 1e-3;
    try {
      split_blocks(c);
      FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("gamma[00,10]") != std::string::npos);
    }
    CHECK_THROWS_AS(split_blocks(testutil::generic(Eigen::MatrixXd::Identity(3, 3))), DomainError);
  }
}

TEST_CASE("alpha and beta blocks as covariance matrices") {
  const auto c = hg_covariance_chi2(SecondMoments{0, 0, 1.0, 0.3, 0.1}, 1.0, 0.1);
  const auto s = split_blocks(c, 0.1);
  const auto a = alpha_block(s, c.truncation_error);
  const auto b = beta_block(s);
  CHECK(a.dim() == 4);
  CHECK(b.dim() == 2);
  CHECK(a.truncation_error == c.truncation_error);
  CHECK(a.entries.trace() + b.entries.trace() == doctest::Approx(c.entries.trace()));
}

TEST_CASE("validity checks") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.0, 0.0, -0.1;
  CHECK(min_eigenvalue(m) == doctest::Approx(-0.1));
  CHECK_FALSE(is_valid_covariance(testutil::generic(m)));
  auto c = testutil::generic(m);
  c.truncation_error = 0.2;
  CHECK(is_valid_covariance(c));
  m << 1.0, 0.5, 0.0, 1.0;
  CHECK_FALSE(is_valid_covariance(testutil::generic(m)));
}

TEST_CASE("basis tags") {
  BasisTag a, b;
  a.kind = b.kind = BasisKind::hermite_gauss;
  a.modes = hg_modes(2);
  b.modes = hg_modes(3);
  CHECK_FALSE(a.compatible_with(b));
  b.modes = hg_modes(2);
  CHECK(a.compatible_with(b));
  BasisTag p;
  p.kind = BasisKind::position;
  p.nx = 4;
  p.ny = 5;
  p.dx = 0.25;
  p.dy = 0.5;
  CHECK_FALSE(p.compatible_with(a));
  const auto back = BasisTag::parse(p.describe());
  CHECK(back.compatible_with(p));
  CHECK(BasisTag::parse(a.describe()).modes == a.modes);
}

TEST_CASE("covariance CSV round trip is lossless") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(5, 5);
  for (int i = 0; i < 25; ++i) a(i) = n01(rng);
  CovMatrix c = testutil::generic(a * a.transpose() / 3.0);
  c.truncation_error = 1.25e-7;
  const auto back = cov_from_csv(to_csv(c));
  CHECK(back.entries == c.entries);
  CHECK(back.I0 == c.I0);
  CHECK(back.truncation_error == c.truncation_error);
  CHECK(back.basis.kind == BasisKind::generic);

  const auto hg = hg_covariance_chi2(SecondMoments{0, 0, 1, 2, 0.3}, 1.0, 0.1);
  const auto hb = cov_from_csv(to_csv(hg));
  CHECK(hb.entries == hg.entries);
  CHECK(hb.basis.compatible_with(hg.basis));
}

TEST_CASE("covariance CSV errors carry row and column") {
  try {
    cov_from_csv("# spadecb-covariance v1\n1,0\n0,x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(cov_from_csv("1,0\n0\n"), ParseError);
  CHECK_THROWS_AS(cov_from_csv("1,0,0\n0,1,0\n"), ParseError);
  CHECK_THROWS_AS(load_cov_csv("/nonexistent/path.csv"), IoError);
}
