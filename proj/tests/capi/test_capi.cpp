#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "spadecb/spadecb.h"

namespace {

struct Cov {
  spcb_cov* p = nullptr;
  ~Cov() { spcb_cov_free(p); }
};

spcb_scenario scen(double v1x, double v1y, double v2x, double v2y, double t1, double t2) {
  return spcb_scenario{v1x, v1y, v2x, v2y, t1, t2, 1.0, 0.1};
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(spcb_version()) > 0);
  CHECK(std::string(spcb_status_name(SPCB_OK)) == "ok");
  CHECK(std::string(spcb_status_name(SPCB_ERR_BUFFER_TOO_SMALL)) == "buffer too small");
  CHECK(std::string(spcb_method_name(SPCB_METHOD_TRISPADE)).size() > 0);
}

TEST_CASE("null arguments are rejected") {
  spcb_result r;
  CHECK(spcb_qcb(nullptr, nullptr, SPCB_METHOD_GENERAL, &r) == SPCB_ERR_NULL_ARGUMENT);
  CHECK(std::strlen(spcb_last_error()) > 0);
  CHECK(spcb_subdiff_qcb(nullptr, &r) == SPCB_ERR_NULL_ARGUMENT);
  spcb_cov* c = nullptr;
  CHECK(spcb_cov_from_entries(nullptr, 2, &c) == SPCB_ERR_NULL_ARGUMENT);
  CHECK(c == nullptr);
  spcb_cov_free(nullptr);
  spcb_source_free(nullptr);
  spcb_string_free(nullptr);
}

TEST_CASE("covariance handles") {
  const double a[] = {0.0, 0.0, 0.0, 0.0};
  const double b[] = {1.0, 0.0, 0.0, 0.0};
  Cov ca, cb;
  REQUIRE(spcb_cov_from_entries(a, 2, &ca.p) == SPCB_OK);
  REQUIRE(spcb_cov_from_entries(b, 2, &cb.p) == SPCB_OK);
  size_t dim = 0;
  CHECK(spcb_cov_dim(ca.p, &dim) == SPCB_OK);
  CHECK(dim == 2);
  double buf[4];
  CHECK(spcb_cov_entries(cb.p, buf, 3) == SPCB_ERR_BUFFER_TOO_SMALL);
  CHECK(spcb_cov_entries(cb.p, buf, 4) == SPCB_OK);
  CHECK(buf[0] == 1.0);
  spcb_result r;
  REQUIRE(spcb_qcb(ca.p, cb.p, SPCB_METHOD_GENERAL, &r) == SPCB_OK);
  CHECK(r.exponent == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  REQUIRE(spcb_qcb(ca.p, cb.p, SPCB_METHOD_AUTO, &r) == SPCB_OK);
  CHECK(r.method == SPCB_METHOD_COMMUTING);
  int commutes = 0;
  CHECK(spcb_commute_check(ca.p, cb.p, 1e-8, &commutes) == SPCB_OK);
  CHECK(commutes == 1);
  double q = 0;
  CHECK(spcb_q_of_s(cb.p, cb.p, 0.5, &q) == SPCB_OK);
  CHECK(q == doctest::Approx(1.0).epsilon(1e-12));

  const double bad[] = {-1.0, 0.0, 0.0, 1.0};
  Cov cbad;
  REQUIRE(spcb_cov_from_entries(bad, 2, &cbad.p) == SPCB_OK);
  int valid = 1;
  CHECK(spcb_cov_is_valid(cbad.p, &valid) == SPCB_OK);
  CHECK(valid == 0);
  CHECK(spcb_qcb(cbad.p, cb.p, SPCB_METHOD_GENERAL, &r) == SPCB_ERR_DOMAIN);

  const double three[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Cov c3;
  REQUIRE(spcb_cov_from_entries(three, 3, &c3.p) == SPCB_OK);
  CHECK(spcb_qcb(c3.p, cb.p, SPCB_METHOD_GENERAL, &r) != SPCB_OK);
}

TEST_CASE("covariance CSV round trip") {
  spcb_moments m{0, 0, 1.2, 0.5, 0.3};
  Cov c;
  REQUIRE(spcb_cov_hg_chi2(&m, 2.0, 0.1, &c.p) == SPCB_OK);
  const auto path = (std::filesystem::temp_directory_path() / "spcb_capi_cov.csv").string();
  REQUIRE(spcb_cov_save_csv(c.p, path.c_str()) == SPCB_OK);
  Cov back;
  REQUIRE(spcb_cov_load_csv(path.c_str(), &back.p) == SPCB_OK);
  std::filesystem::remove(path);
  std::vector<double> x(36), y(36);
  spcb_cov_entries(c.p, x.data(), 36);
  spcb_cov_entries(back.p, y.data(), 36);
  CHECK(x == y);
  double i0 = 0;
  spcb_cov_i0(back.p, &i0);
  CHECK(i0 == 2.0);
  char* basis = nullptr;
  REQUIRE(spcb_cov_basis(back.p, &basis) == SPCB_OK);
  CHECK(std::string(basis).find("hermite_gauss") != std::string::npos);
  spcb_string_free(basis);
  Cov none;
  CHECK(spcb_cov_load_csv("/nonexistent/x.csv", &none.p) == SPCB_ERR_IO);
  CHECK(spcb_cov_parse_csv("1,2\n3,x\n", &none.p) == SPCB_ERR_PARSE);
  CHECK(none.p == nullptr);
}

TEST_CASE("sources") {
  spcb_source* s = nullptr;
  REQUIRE(spcb_source_from_config_text("kind = line\nlength = 1.0\nangle = 0.3\n", &s) == SPCB_OK);
  double i0 = 0;
  CHECK(spcb_source_total_intensity(s, &i0) == SPCB_OK);
  CHECK(i0 > 0);
  spcb_frame f;
  CHECK(spcb_source_frame(s, 1.0, &f) == SPCB_OK);
  CHECK(f.vx == doctest::Approx(1.0 / 12).epsilon(0.05));
  CHECK(std::abs(f.theta - 0.3) < 0.01);
  CHECK(f.vy < 1e-3 * f.vx);
  spcb_cov* c = nullptr;
  REQUIRE(spcb_source_hg_cov(s, 1.0, 2, &c) == SPCB_OK);
  size_t dim = 0;
  spcb_cov_dim(c, &dim);
  CHECK(dim == 6);
  spcb_cov_free(c);
  spcb_source_free(s);
  spcb_source* z = nullptr;
  CHECK(spcb_source_from_config_text("kind = nonsense\n", &z) != SPCB_OK);
  CHECK(spcb_source_load_pixels("/nonexistent.csv", &z) == SPCB_ERR_IO);
}

TEST_CASE("subdiffraction") {
  const auto p = scen(6, 12, 6, 12, 1.5707963267948966, 0.0);
  spcb_result r;
  REQUIRE(spcb_spade_exponent(&p, p.theta1, &r) == SPCB_OK);
  CHECK(r.exponent / 0.01 == doctest::Approx(18 - 12 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.has_theta0 == 1);
  double g = 1;
  REQUIRE(spcb_gap(&p, p.theta1, &g) == SPCB_OK);
  CHECK(std::abs(g) < 1e-12);
  const auto same = scen(1, 1, 1, 1, 0, 0);
  CHECK(spcb_gap(&same, 0.0, &g) == SPCB_ERR_DOMAIN);
  auto bad = p;
  bad.chi = 0.9;
  CHECK(spcb_subdiff_qcb(&bad, &r) == SPCB_ERR_DOMAIN);
  double ratio = 0;
  CHECK(spcb_oned_boundary_ratio(3 * 0.7853981633974483 / 2, &ratio) == SPCB_OK);
  CHECK(ratio == doctest::Approx(0.00109065).epsilon(1e-5));
  REQUIRE(spcb_spade_optimal(&p, &r) == SPCB_OK);
  CHECK(r.has_theta0 == 1);
}

namespace {

struct Collect {
  std::vector<std::string> lines;
  size_t stop_after = 0;
};

int collect(const spcb_sweep_row* row, void* user) {
  auto* c = static_cast<Collect*>(user);
  c->lines.push_back(std::string(row->curve) + ":" + std::to_string(row->theta0));
  return c->stop_after && c->lines.size() >= c->stop_after;
}

}  // namespace

TEST_CASE("sweeps through callbacks") {
  spcb_sweep_grid g;
  spcb_sweep_grid_default(&g);
  CHECK(g.points == 721);
  g.points = 5;
  Collect all;
  REQUIRE(spcb_sweep_preset("fig3", &g, collect, &all) == SPCB_OK);
  CHECK(all.lines.size() == 50);
  Collect some;
  some.stop_after = 7;
  CHECK(spcb_sweep_preset("fig2", &g, collect, &some) == SPCB_OK);
  CHECK(some.lines.size() == 7);
  CHECK(spcb_sweep_preset("nope", &g, collect, &all) == SPCB_ERR_DOMAIN);
  spcb_sweep_curve c{"mine", 1.0, 0.2, 0.5, 0.5, 0.3};
  Collect one;
  REQUIRE(spcb_sweep_custom(&c, 1, &g, collect, &one) == SPCB_OK);
  CHECK(one.lines.size() == 5);
  CHECK(one.lines[0].rfind("mine:", 0) == 0);
  g.points = 0;
  CHECK(spcb_sweep_custom(&c, 1, &g, collect, &one) == SPCB_ERR_DOMAIN);
  CHECK(std::string(spcb_sweep_csv_header()).rfind("curve,", 0) == 0);
}

TEST_CASE("simulation") {
  spcb_sim_config cfg;
  spcb_sim_config_default(&cfg);
  cfg.trials = 40;
  cfg.max_trials = 40;
  cfg.min_errors = 1;
  cfg.sampling = SPCB_SAMPLING_CLOSED_FORM;
  const auto p = scen(0, 0, 0.2, 0, 0, 0);
  const int n[] = {50, 200};
  spcb_sim_summary s1, s2;
  char* csv1 = nullptr;
  char* csv2 = nullptr;
  REQUIRE(spcb_simulate(&p, 0.0, &cfg, n, 2, &s1, &csv1) == SPCB_OK);
  REQUIRE(spcb_simulate(&p, 0.0, &cfg, n, 2, &s2, &csv2) == SPCB_OK);
  CHECK(std::string(csv1) == std::string(csv2));
  CHECK(s1.xi_theory == doctest::Approx(0.002).epsilon(1e-12));
  spcb_string_free(csv1);
  spcb_string_free(csv2);
  CHECK(spcb_simulate(&p, 0.0, &cfg, n, 0, &s1, nullptr) != SPCB_OK);
}

TEST_CASE("oracle") {
  size_t n = 0;
  REQUIRE(spcb_oracle_family_size(&n) == SPCB_OK);
  REQUIRE(n > 0);
  std::vector<spcb_oracle_row> rows(n);
  size_t got = 0;
  CHECK(spcb_oracle_check(0, 1, 201, 0.0, rows.data(), n - 1, &got) == SPCB_ERR_BUFFER_TOO_SMALL);
  CHECK(got == n);
  REQUIRE(spcb_oracle_check(0, 1, 201, 0.0, rows.data(), n, &got) == SPCB_OK);
  for (const auto& r : rows) {
    CHECK(r.cutoff >= 25);
    CHECK(r.deviation < 1e-3);
  }
  CHECK(spcb_oracle_check(3, 1, 201, 0.0, rows.data(), n, &got) == SPCB_ERR_TRUNCATION);
}
