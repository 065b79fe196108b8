#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spadecb/csv.hpp"
#include "spadecb/fock.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SPADECB_CLI + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

// '#' lines dropped; first remaining line is the header
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string body;

  double get(std::size_t row, const std::string& col) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == col) return std::stod(rows.at(row).at(j));
    FAIL("no column " << col);
    return NAN;
  }
};

Table table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    t.body += line + "\n";
    auto f = spadecb::csv::split(line);
    for (auto& x : f) x = spadecb::csv::trim(x);
    if (t.header.empty()) t.header = f;
    else t.rows.push_back(f);
  }
  return t;
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "spadecb_cli_test";
  fs::create_directories(d);
  return d / name;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

const std::string kScen = "--v1x 6 --v1y 12 --v2x 6 --v2y 12 --theta1 1.5707963267948966 --theta2 0";

}  // namespace

TEST_CASE("version and usage") {
  CHECK(run("--version").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("subdiff --v1x notanumber").code == 2);
}

TEST_CASE("qcb on identical covariance files") {
  const auto p = scratch("same.csv");
  write(p, "0.3,0.1\n0.1,0.2\n");
  const auto r = run("qcb --cov1 " + p.string() + " --cov2 " + p.string());
  REQUIRE(r.code == 0);
  const auto t = table(r.out);
  CHECK(std::abs(t.get(0, "exponent")) < 1e-12);
  CHECK(t.get(0, "dim") == 2);
}

TEST_CASE("exported golden pairs reproduce the goldens") {
  const auto dir = scratch("pairs");
  REQUIRE(run("oracle-check --export-dir " + dir.string() + " --s-points 101").code == 0);
  const auto goldens = spadecb::goldens_from_csv(
      spadecb::csv::read_file(std::string(SPADECB_TEST_DATA_DIR) + "/fock_goldens_v1.csv"));
  for (const auto& g : goldens) {
    CAPTURE(g.pair.id);
    const auto a = dir / ("pair" + std::to_string(g.pair.id) + "_1.csv");
    const auto b = dir / ("pair" + std::to_string(g.pair.id) + "_2.csv");
    const auto r = run("qcb --method general --cov1 " + a.string() + " --cov2 " + b.string());
    REQUIRE(r.code == 0);
    CHECK(std::abs(table(r.out).get(0, "exponent") - g.exponent) <= 1e-5);
  }
}

TEST_CASE("commuting pair through both methods") {
  const auto a = scratch("ca.csv"), b = scratch("cb.csv");
  write(a, "0.5,0,0\n0,0.2,0\n0,0,0\n");
  write(b, "0.1,0,0\n0,0.4,0\n0,0,0.3\n");
  const auto g = run("qcb --method general --cov1 " + a.string() + " --cov2 " + b.string());
  const auto c = run("qcb --method commuting --cov1 " + a.string() + " --cov2 " + b.string());
  REQUIRE(g.code == 0);
  REQUIRE(c.code == 0);
  CHECK(std::abs(table(g.out).get(0, "exponent") - table(c.out).get(0, "exponent")) < 1e-8);
}

TEST_CASE("qcb errors") {
  const auto a = scratch("d2.csv"), b = scratch("d3.csv"), bad = scratch("bad.csv");
  write(a, "1,0\n0,1\n");
  write(b, "1,0,0\n0,1,0\n0,0,1\n");
  write(bad, "1,0\n0,x\n");
  CHECK(run("qcb --cov1 " + a.string() + " --cov2 " + b.string()).code == 3);
  CHECK(run("qcb --cov1 " + a.string() + " --cov2 " + bad.string()).code == 3);
  CHECK(run("qcb --cov1 " + a.string()).code == 2);
}

TEST_CASE("qcb from source descriptions") {
  const auto a = scratch("s1.cfg"), b = scratch("s2.cfg");
  write(a, "kind = line\nlength = 0.4\nangle = 0.0\n");
  write(b, "kind = line\nlength = 0.4\nangle = 0.0\n");
  const auto r = run("qcb --source1 " + a.string() + " --source2 " + b.string());
  REQUIRE(r.code == 0);
  CHECK(std::abs(table(r.out).get(0, "exponent")) < 1e-10);
}

TEST_CASE("subdiff") {
  const auto r = run("subdiff " + kScen + " --theta0 1.5707963267948966");
  REQUIRE(r.code == 0);
  const auto t = table(r.out);
  CHECK(t.get(0, "xi_spade") / 0.01 == doctest::Approx(18 - 12 * std::sqrt(2.0)).epsilon(1e-10));
  CHECK(std::abs(t.get(0, "gap")) < 1e-10);
  CHECK(r.out.find("# param:") != std::string::npos);
  CHECK(run("subdiff --v1x -1").code == 2);
  CHECK(run("subdiff --chi 0.9 --v1x 1 --v2y 1").code != 0);
}

TEST_CASE("sweeps") {
  auto f2 = run("sweep --preset fig2 --points 3");
  REQUIRE(f2.code == 0);
  CHECK(table(f2.out).rows.size() == 21 * 3);
  auto f3 = run("sweep --preset fig3 --points 4");
  REQUIRE(f3.code == 0);
  CHECK(table(f3.out).rows.size() == 10 * 4);
  CHECK(run("sweep --preset fig2 --points 0").code == 2);
  // a single-point custom sweep equals subdiff at that angle
  const auto c = run("sweep --preset custom --v1x 1 --v1y 0.3 --v2x 0.5 --v2y 0.9 --dtheta 0.8 "
                     "--points 1 --theta0-min 0.25 --theta0-max 0.25");
  REQUIRE(c.code == 0);
  const auto s = run("subdiff --v1x 1 --v1y 0.3 --v2x 0.5 --v2y 0.9 --theta1 0.4 --theta2 -0.4 --theta0 0.25");
  REQUIRE(s.code == 0);
  const auto tc = table(c.out), ts = table(s.out);
  CHECK(tc.get(0, "xi_spade") == doctest::Approx(ts.get(0, "xi_spade")).epsilon(1e-12));
  CHECK(tc.get(0, "gap") == doctest::Approx(ts.get(0, "gap")).epsilon(1e-10));
}

TEST_CASE("simulate is reproducible") {
  const std::string args =
      "simulate --v1x 0 --v1y 0 --v2x 0.2 --v2y 0 --trials 30 --max-trials 30 --min-errors 1 "
      "--sampling closed --seed 4 --n 50,200";
  const auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(table(a.out).body == table(b.out).body);
  CHECK(a.out.find("# seed: 4") != std::string::npos);
  CHECK(table(a.out).rows.size() == 2);
}

TEST_CASE("oracle-check") {
  const auto ok = run("oracle-check --s-points 201");
  CHECK(ok.code == 0);
  const auto bad = run("oracle-check --s-points 201 --perturb 1e-3");
  CHECK(bad.code == 4);
  const auto sw = run("oracle-check --s-points 201 --cutoff-sweep 6,12");
  CHECK(sw.code != 2);
  CHECK(table(sw.out).rows.size() > 0);
}

TEST_CASE("config files and precedence") {
  const auto cfg = scratch("sub.cfg");
  write(cfg, "v1x = 1\nv2y = 1\nchi = 0.05\n");
  const auto a = run("subdiff --config " + cfg.string());
  REQUIRE(a.code == 0);
  CHECK(table(a.out).get(0, "chi") == 0.05);
  CHECK(table(a.out).get(0, "v2y") == 1.0);
  const auto b = run("subdiff --config " + cfg.string() + " --v2y 2");
  REQUIRE(b.code == 0);
  CHECK(table(b.out).get(0, "v2y") == 2.0);
  CHECK(table(b.out).get(0, "chi") == 0.05);
}

TEST_CASE("output directory") {
  const auto dir = scratch("outdir");
  fs::remove_all(dir);
  const auto r = run("subdiff --v1x 1 --v2y 1 --out res.csv", "SPADECB_OUTPUT_DIR=" + dir.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "res.csv"));
  const auto s = run("subdiff --v1x 1 --v2y 1", "SPADECB_OUTPUT_DIR=" + dir.string());
  REQUIRE(s.code == 0);
  CHECK(fs::exists(dir / "subdiff.csv"));
}
