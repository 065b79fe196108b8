#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spadecb/spadecb.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitAcceptance = 4;

struct CliFailure {
  int code;
  std::string message;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check(spcb_status st, int code = kExitDomain) {
  if (st == SPCB_OK) return;
  std::string msg = spcb_status_name(st);
  const std::string detail = spcb_last_error();
  if (!detail.empty()) msg += ": " + detail;
  throw CliFailure{code, msg};
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// every option of the subcommand, defaults included, one '#' line each
std::string manifest(const CLI::App& sub, const std::string& seed) {
  std::ostringstream ss;
  ss << "# command: " << sub.get_name() << "\n";
  std::istringstream params(sub.config_to_str(true, false));
  std::string line;
  while (std::getline(params, line)) {
    if (line.empty() || line[0] == '[') continue;
    ss << "# param: " << line << "\n";
  }
  ss << "# seed: " << seed << "\n";
  ss << "# version: " << spcb_version() << "\n";
  ss << "# timestamp: " << timestamp() << "\n";
  return ss.str();
}

// explicit --out wins; a relative path lands in SPADECB_OUTPUT_DIR when set.
// Without --out the text goes to stdout, plus <command>.csv in the output dir.
void emit(const std::string& out, const std::string& command, const std::string& text) {
  const char* env = std::getenv("SPADECB_OUTPUT_DIR");
  std::filesystem::path target;
  if (!out.empty()) {
    target = out;
    if (target.is_relative() && env && *env) target = std::filesystem::path(env) / target;
  } else {
    std::cout << text << std::flush;
    if (!(env && *env)) return;
    target = std::filesystem::path(env) / (command + ".csv");
  }
  std::error_code ec;
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path(), ec);
  std::ofstream f(target, std::ios::binary);
  if (!f) throw CliFailure{kExitDomain, "cannot write " + target.string()};
  f << text;
  if (!f) throw CliFailure{kExitDomain, "write failed for " + target.string()};
  if (!out.empty()) std::cerr << "wrote " << target.string() << "\n";
}

void warn_chi(double chi) {
  if (chi > 0.2) {
    std::cerr << "warning: chi = " << chi
              << " exceeds 0.2; the second-order expansion loses accuracy\n";
  }
}

struct ScenarioFlags {
  spcb_scenario p{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.1};

  void attach(CLI::App* app) {
    app->add_option("--v1x", p.v1x, "hypothesis 1 variance along its principal axis")->capture_default_str();
    app->add_option("--v1y", p.v1y, "hypothesis 1 variance across its principal axis")->capture_default_str();
    app->add_option("--v2x", p.v2x, "hypothesis 2 variance along its principal axis")->capture_default_str();
    app->add_option("--v2y", p.v2y, "hypothesis 2 variance across its principal axis")->capture_default_str();
    app->add_option("--theta1", p.theta1, "hypothesis 1 orientation (rad)")->capture_default_str();
    app->add_option("--theta2", p.theta2, "hypothesis 2 orientation (rad)")->capture_default_str();
    app->add_option("--i0", p.i0, "mean photons per frame")->capture_default_str();
    app->add_option("--chi", p.chi, "source extent over PSF width")->capture_default_str();
  }

  void validate() const {
    for (double v : {p.v1x, p.v1y, p.v2x, p.v2y})
      if (!(v >= 0.0) || !std::isfinite(v))
        throw CliFailure{kExitUsage, "variances must be finite and nonnegative"};
    if (!std::isfinite(p.theta1) || !std::isfinite(p.theta2))
      throw CliFailure{kExitUsage, "angles must be finite"};
    if (!(p.i0 > 0.0) || !std::isfinite(p.i0)) throw CliFailure{kExitUsage, "--i0 must be positive"};
    if (!(p.chi > 0.0) || p.chi > 0.5) throw CliFailure{kExitUsage, "--chi must lie in (0, 0.5]"};
    warn_chi(p.chi);
  }
};

struct Cov {
  spcb_cov* h = nullptr;
  Cov() = default;
  Cov(const Cov&) = delete;
  Cov& operator=(const Cov&) = delete;
  ~Cov() { spcb_cov_free(h); }
};

struct Source {
  spcb_source* h = nullptr;
  Source() = default;
  Source(const Source&) = delete;
  Source& operator=(const Source&) = delete;
  ~Source() { spcb_source_free(h); }
};

struct CString {
  char* s = nullptr;
  CString() = default;
  CString(const CString&) = delete;
  CString& operator=(const CString&) = delete;
  ~CString() { spcb_string_free(s); }
};

/* ---- qcb ---- */

struct QcbOpts {
  std::string cov1, cov2, source1, source2, basis = "hg", method = "auto", out;
  double sigma = 1.0;
  int max_order = 4;
  int pixels = 12;
};

void load_source(const std::string& path, Source& s) {
  const bool pixel_dump = std::filesystem::path(path).extension() == ".csv";
  check(pixel_dump ? spcb_source_load_pixels(path.c_str(), &s.h)
                   : spcb_source_load_config(path.c_str(), &s.h));
}

void build_cov(const QcbOpts& o, const std::string& src, Cov& c) {
  Source s;
  load_source(src, s);
  if (o.basis == "hg") check(spcb_source_hg_cov(s.h, o.sigma, o.max_order, &c.h));
  else check(spcb_source_position_cov(s.h, o.sigma, o.pixels, o.pixels, &c.h));
}

int run_qcb(const CLI::App& sub, const QcbOpts& o) {
  const bool have_cov = !o.cov1.empty() || !o.cov2.empty();
  const bool have_src = !o.source1.empty() || !o.source2.empty();
  if (have_cov == have_src)
    throw CliFailure{kExitUsage, "give either --cov1/--cov2 or --source1/--source2"};
  Cov a, b;
  if (have_cov) {
    if (o.cov1.empty() || o.cov2.empty()) throw CliFailure{kExitUsage, "both --cov1 and --cov2 are required"};
    check(spcb_cov_load_csv(o.cov1.c_str(), &a.h));
    check(spcb_cov_load_csv(o.cov2.c_str(), &b.h));
  } else {
    if (o.source1.empty() || o.source2.empty())
      throw CliFailure{kExitUsage, "both --source1 and --source2 are required"};
    if (!(o.sigma > 0.0)) throw CliFailure{kExitUsage, "--sigma must be positive"};
    build_cov(o, o.source1, a);
    build_cov(o, o.source2, b);
  }
  size_t d1 = 0, d2 = 0;
  check(spcb_cov_dim(a.h, &d1));
  check(spcb_cov_dim(b.h, &d2));
  if (d1 != d2)
    throw CliFailure{kExitDomain, "dimension mismatch: " + std::to_string(d1) + " vs " + std::to_string(d2)};

  int method = SPCB_METHOD_AUTO;
  if (o.method == "general") method = SPCB_METHOD_GENERAL;
  else if (o.method == "faint") method = SPCB_METHOD_FAINT;
  else if (o.method == "commuting") method = SPCB_METHOD_COMMUTING;
  spcb_result r{};
  check(spcb_qcb(a.h, b.h, method, &r));
  double i1 = 0.0, i2 = 0.0;
  check(spcb_cov_i0(a.h, &i1));
  check(spcb_cov_i0(b.h, &i2));

  std::ostringstream ss;
  ss << manifest(sub, "none");
  ss << "exponent,s_star,method,multimodal,dim,i0_1,i0_2\n";
  ss << fmt(r.exponent) << ',' << fmt(r.s_star) << ',' << spcb_method_name(r.method) << ','
     << r.multimodal << ',' << d1 << ',' << fmt(i1) << ',' << fmt(i2) << "\n";
  emit(o.out, "qcb", ss.str());
  return kExitOk;
}

/* ---- subdiff ---- */

struct SubdiffOpts {
  ScenarioFlags sc;
  double theta0 = std::nan("");
  std::string out;
};

int run_subdiff(const CLI::App& sub, SubdiffOpts& o) {
  o.sc.validate();
  spcb_result q{}, best{};
  check(spcb_subdiff_qcb(&o.sc.p, &q));
  check(spcb_spade_optimal(&o.sc.p, &best));
  double gap_opt = 0.0;
  check(spcb_gap(&o.sc.p, best.theta0_star, &gap_opt));
  const double theta0 = std::isnan(o.theta0) ? best.theta0_star : o.theta0;
  spcb_result at{};
  check(spcb_spade_exponent(&o.sc.p, theta0, &at));
  double gap_at = 0.0;
  check(spcb_gap(&o.sc.p, theta0, &gap_at));

  const auto& p = o.sc.p;
  std::ostringstream ss;
  ss << manifest(sub, "none");
  ss << "v1x,v1y,v2x,v2y,theta1,theta2,i0,chi,xi_q,s_star,theta0,xi_spade,gap,"
        "theta0_star,xi_spade_opt,gap_opt\n";
  for (double v : {p.v1x, p.v1y, p.v2x, p.v2y, p.theta1, p.theta2, p.i0, p.chi}) ss << fmt(v) << ',';
  ss << fmt(q.exponent) << ',' << fmt(q.s_star) << ',' << fmt(theta0) << ',' << fmt(at.exponent)
     << ',' << fmt(gap_at) << ',' << fmt(best.theta0_star) << ',' << fmt(best.exponent) << ','
     << fmt(gap_opt) << "\n";
  emit(o.out, "subdiff", ss.str());
  return kExitOk;
}

/* ---- sweep ---- */

struct SweepOpts {
  std::string preset = "fig2", out, name = "custom";
  spcb_sweep_grid grid{};
  double v1x = 1.0, v1y = 0.0, v2x = 0.5, v2y = 0.0;
  std::vector<double> dtheta{0.7853981633974483};
};

int collect_row(const spcb_sweep_row* r, void* user) {
  auto& ss = *static_cast<std::ostringstream*>(user);
  ss << '"' << r->curve << '"';
  for (double v : {r->dtheta, r->v1x, r->v1y, r->v2x, r->v2y, r->sweep_variable, r->xi_q,
                   r->xi_spade, r->gap, r->s_star, r->theta0})
    ss << ',' << fmt(v);
  ss << "\n";
  return 0;
}

int run_sweep(const CLI::App& sub, const SweepOpts& o) {
  if (o.grid.points < 1) throw CliFailure{kExitUsage, "empty grid: --points must be at least 1"};
  if (!(o.grid.theta0_max >= o.grid.theta0_min))
    throw CliFailure{kExitUsage, "--theta0-max must not be below --theta0-min"};
  if (o.grid.points == 1 && o.grid.theta0_max != o.grid.theta0_min)
    throw CliFailure{kExitUsage, "a one-point grid needs --theta0-min equal to --theta0-max"};
  if (!(o.grid.i0 > 0.0)) throw CliFailure{kExitUsage, "--i0 must be positive"};
  if (!(o.grid.chi > 0.0) || o.grid.chi > 0.5) throw CliFailure{kExitUsage, "--chi must lie in (0, 0.5]"};
  warn_chi(o.grid.chi);

  std::ostringstream ss;
  ss << manifest(sub, "none");
  ss << spcb_sweep_csv_header() << "\n";
  if (o.preset == "custom") {
    if (o.dtheta.empty()) throw CliFailure{kExitUsage, "custom sweep needs at least one --dtheta"};
    std::vector<std::string> names;
    for (size_t i = 0; i < o.dtheta.size(); ++i)
      names.push_back(o.dtheta.size() == 1 ? o.name : o.name + "_" + std::to_string(i));
    std::vector<spcb_sweep_curve> curves;
    for (size_t i = 0; i < o.dtheta.size(); ++i)
      curves.push_back({names[i].c_str(), o.v1x, o.v1y, o.v2x, o.v2y, o.dtheta[i]});
    check(spcb_sweep_custom(curves.data(), curves.size(), &o.grid, collect_row, &ss));
  } else {
    check(spcb_sweep_preset(o.preset.c_str(), &o.grid, collect_row, &ss));
  }
  emit(o.out, "sweep_" + o.preset, ss.str());
  return kExitOk;
}

/* ---- simulate ---- */

struct SimulateOpts {
  ScenarioFlags sc;
  double theta0 = std::nan("");
  int trials = 1000;
  std::uint64_t seed = 1;
  std::string sampling = "exact", out;
  int min_errors = 50;
  int max_trials = 1 << 20;
  std::vector<int> n_list{200, 400, 800, 1600};
};

int run_simulate(const CLI::App& sub, SimulateOpts& o) {
  o.sc.validate();
  if (o.trials < 1) throw CliFailure{kExitUsage, "--trials must be positive"};
  if (o.n_list.empty()) throw CliFailure{kExitUsage, "--n needs at least one frame count"};
  spcb_sim_config cfg{};
  spcb_sim_config_default(&cfg);
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.min_errors = o.min_errors;
  cfg.max_trials = o.max_trials;
  if (o.sampling == "exact" || o.sampling == "p_function") cfg.sampling = SPCB_SAMPLING_P_FUNCTION;
  else cfg.sampling = SPCB_SAMPLING_CLOSED_FORM;

  double theta0 = o.theta0;
  if (std::isnan(theta0)) {
    spcb_result best{};
    check(spcb_spade_optimal(&o.sc.p, &best));
    theta0 = best.theta0_star;
  }
  spcb_sim_summary sum{};
  CString csv;
  check(spcb_simulate(&o.sc.p, theta0, &cfg, o.n_list.data(), o.n_list.size(), &sum, &csv.s));
  emit(o.out, "simulate", manifest(sub, std::to_string(o.seed)) + csv.s);
  std::cerr << "slope " << fmt(sum.slope) << " +- " << fmt(sum.slope_stderr) << ", theory "
            << fmt(sum.xi_theory) << ", ratio " << fmt(sum.ratio) << "\n";
  return kExitOk;
}

/* ---- oracle-check ---- */

struct OracleOpts {
  int cutoff = 0;
  int s_points = 1001;
  double tolerance = 1e-5;
  double perturb = 0.0;
  std::vector<int> cutoff_sweep;
  std::string write_goldens, export_dir, out;
};

std::vector<spcb_oracle_row> oracle_rows(int cutoff, int strict, int s_points, double perturb) {
  size_t n = 0;
  check(spcb_oracle_family_size(&n));
  std::vector<spcb_oracle_row> rows(n);
  size_t got = 0;
  check(spcb_oracle_check(cutoff, strict, s_points, perturb, rows.data(), rows.size(), &got));
  return rows;
}

void export_pairs(const std::string& dir, const std::vector<spcb_oracle_row>& rows) {
  std::filesystem::create_directories(dir);
  for (const auto& r : rows) {
    const double c = std::cos(r.angle), s = std::sin(r.angle);
    // R diag(a, b) R^T
    const double g1[4] = {r.a1, 0.0, 0.0, r.b1};
    const double g2[4] = {c * c * r.a2 + s * s * r.b2, c * s * (r.a2 - r.b2),
                          c * s * (r.a2 - r.b2), s * s * r.a2 + c * c * r.b2};
    for (int k = 0; k < 2; ++k) {
      Cov m;
      check(spcb_cov_from_entries(k == 0 ? g1 : g2, 2, &m.h));
      const auto path = std::filesystem::path(dir) /
                        ("pair" + std::to_string(r.id) + "_" + std::to_string(k + 1) + ".csv");
      check(spcb_cov_save_csv(m.h, path.string().c_str()));
    }
  }
}

int run_oracle(const CLI::App& sub, const OracleOpts& o) {
  if (o.s_points < 3) throw CliFailure{kExitUsage, "--s-points must be at least 3"};
  if (!o.write_goldens.empty()) {
    CString csv;
    check(spcb_oracle_goldens_csv(o.cutoff, o.s_points, &csv.s));
    std::ofstream f(o.write_goldens, std::ios::binary);
    if (!(f << csv.s)) throw CliFailure{kExitDomain, "cannot write " + o.write_goldens};
    std::cerr << "wrote " << o.write_goldens << "\n";
    return kExitOk;
  }

  std::ostringstream ss;
  ss << manifest(sub, "none");
  int code = kExitOk;
  if (!o.cutoff_sweep.empty()) {
    ss << "cutoff,max_deviation\n";
    double prev = INFINITY;
    for (int k : o.cutoff_sweep) {
      double worst = 0.0;
      for (const auto& r : oracle_rows(k, 0, o.s_points, o.perturb)) worst = std::max(worst, r.deviation);
      ss << k << ',' << fmt(worst) << "\n";
      // converged values sit at the floor of the s-grid; only growth counts
      if (worst > prev && worst > o.tolerance) code = kExitAcceptance;
      prev = worst;
    }
    emit(o.out, "oracle_cutoff_sweep", ss.str());
    if (code != kExitOk) std::cerr << "FAIL: deviations do not shrink with the cutoff\n";
    return code;
  }

  const auto rows = oracle_rows(o.cutoff, 1, o.s_points, o.perturb);
  if (!o.export_dir.empty()) export_pairs(o.export_dir, rows);
  ss << "id,a1,b1,a2,b2,angle,cutoff,fock,gaussian,deviation,pass\n";
  double worst = 0.0;
  const spcb_oracle_row* bad = nullptr;
  for (const auto& r : rows) {
    const bool ok = r.deviation <= o.tolerance;
    ss << r.id;
    for (double v : {r.a1, r.b1, r.a2, r.b2, r.angle}) ss << ',' << fmt(v);
    ss << ',' << r.cutoff << ',' << fmt(r.fock) << ',' << fmt(r.gaussian) << ',' << fmt(r.deviation)
       << ',' << (ok ? 1 : 0) << "\n";
    if (r.deviation > worst) worst = r.deviation;
    if (!ok && !bad) bad = &r;
  }
  emit(o.out, "oracle_check", ss.str());
  std::cerr << "max deviation " << fmt(worst) << " over " << rows.size() << " pairs\n";
  if (bad) {
    std::cerr << "FAIL: pair " << bad->id << " (a1=" << bad->a1 << " b1=" << bad->b1
              << " a2=" << bad->a2 << " b2=" << bad->b2 << " angle=" << bad->angle
              << ") deviates by " << fmt(bad->deviation) << "\n";
    return kExitAcceptance;
  }
  return kExitOk;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Splices "--key value" pairs from the --config file in right after the
// subcommand name, skipping keys already given explicitly. Returns the
// arguments in CLI11's reversed order.
std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& commands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  size_t cmd = args.size();
  for (size_t i = 0; i < args.size(); ++i) {
    if (cmd == args.size() && std::find(commands.begin(), commands.end(), args[i]) != commands.end()) cmd = i;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path.empty() && cmd < args.size()) {
    std::ifstream f(path);
    if (!f) throw CliFailure{kExitUsage, "cannot read config file " + path};
    std::vector<std::string> extra;
    std::string line;
    int row = 0;
    while (std::getline(f, line)) {
      ++row;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#' || line[first] == ';' || line[first] == '[') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw CliFailure{kExitUsage, path + ":" + std::to_string(row) + ": expected key = value"};
      auto strip = [](std::string t) {
        const auto a = t.find_first_not_of(" \t\r\"");
        const auto b = t.find_last_not_of(" \t\r\"");
        return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
      };
      const std::string key = "--" + strip(line.substr(0, eq));
      if (key == "--config" || given(args, key)) continue;
      extra.push_back(key);
      extra.push_back(strip(line.substr(eq + 1)));
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(cmd) + 1, extra.begin(), extra.end());
  }
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chernoff exponents for discriminating incoherent sources", "spadecb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spcb_version()));
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware concurrency)");

  auto with_config = [](CLI::App* s) {
    s->add_option("--config", "key = value file supplying any flag of this command");
  };

  QcbOpts qo;
  auto* qcb = app.add_subcommand("qcb", "quantum Chernoff exponent of two covariance matrices or sources");
  with_config(qcb);
  qcb->add_option("--cov1", qo.cov1, "covariance CSV of hypothesis 1");
  qcb->add_option("--cov2", qo.cov2, "covariance CSV of hypothesis 2");
  qcb->add_option("--source1", qo.source1, "source config (or pixel .csv) of hypothesis 1");
  qcb->add_option("--source2", qo.source2, "source config (or pixel .csv) of hypothesis 2");
  qcb->add_option("--sigma", qo.sigma, "PSF width")->capture_default_str();
  qcb->add_option("--basis", qo.basis, "mode basis for sources")
      ->check(CLI::IsMember({"hg", "position"}))
      ->capture_default_str();
  qcb->add_option("--max-order", qo.max_order, "highest Hermite-Gauss order")
      ->check(CLI::Range(0, 20))
      ->capture_default_str();
  qcb->add_option("--pixels", qo.pixels, "position-basis lattice size per axis")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  qcb->add_option("--method", qo.method, "evaluation path")
      ->check(CLI::IsMember({"auto", "general", "faint", "commuting"}))
      ->capture_default_str();
  qcb->add_option("--out", qo.out, "output CSV");

  SubdiffOpts so;
  auto* subdiff = app.add_subcommand("subdiff", "subdiffraction exponents: quantum bound and best TRISPADE");
  with_config(subdiff);
  so.sc.attach(subdiff);
  subdiff->add_option("--theta0", so.theta0, "measurement angle to report (default: optimal)");
  subdiff->add_option("--out", so.out, "output CSV");

  SweepOpts wo;
  spcb_sweep_grid_default(&wo.grid);
  auto* sweep = app.add_subcommand("sweep", "normalised gap over the measurement angle");
  with_config(sweep);
  sweep->add_option("--preset", wo.preset, "curve set")
      ->check(CLI::IsMember({"fig2", "fig3", "custom"}))
      ->capture_default_str();
  sweep->add_option("--theta0-min", wo.grid.theta0_min)->capture_default_str();
  sweep->add_option("--theta0-max", wo.grid.theta0_max)->capture_default_str();
  sweep->add_option("--points", wo.grid.points, "grid points")->capture_default_str();
  sweep->add_option("--i0", wo.grid.i0)->capture_default_str();
  sweep->add_option("--chi", wo.grid.chi)->capture_default_str();
  sweep->add_option("--v1x", wo.v1x, "custom curve")->capture_default_str();
  sweep->add_option("--v1y", wo.v1y, "custom curve")->capture_default_str();
  sweep->add_option("--v2x", wo.v2x, "custom curve")->capture_default_str();
  sweep->add_option("--v2y", wo.v2y, "custom curve")->capture_default_str();
  sweep->add_option("--dtheta", wo.dtheta, "custom curve orientation differences")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--name", wo.name, "custom curve name")->capture_default_str();
  sweep->add_option("--out", wo.out, "output CSV");

  SimulateOpts mo;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error exponent of TRISPADE with a likelihood-ratio test");
  with_config(simulate);
  mo.sc.attach(simulate);
  simulate->add_option("--theta0", mo.theta0, "measurement angle (default: optimal)");
  simulate->add_option("--trials", mo.trials, "initial trials per hypothesis and N")->capture_default_str();
  simulate->add_option("--seed", mo.seed)->capture_default_str();
  simulate->add_option("--sampling", mo.sampling, "photon sampling path")
      ->check(CLI::IsMember({"exact", "p_function", "closed", "closed_form"}))
      ->capture_default_str();
  simulate->add_option("--min-errors", mo.min_errors, "errors required at the largest N")->capture_default_str();
  simulate->add_option("--max-trials", mo.max_trials)->capture_default_str();
  simulate->add_option("--n", mo.n_list, "frame counts")->delimiter(',')->capture_default_str();
  simulate->add_option("--out", mo.out, "output CSV");

  OracleOpts oo;
  auto* oracle = app.add_subcommand("oracle-check", "compare the Gaussian formula with truncated-Fock evaluation");
  with_config(oracle);
  oracle->add_option("--cutoff", oo.cutoff, "photon-number cutoff (0 = automatic)")->capture_default_str();
  oracle->add_option("--s-points", oo.s_points, "s grid of the Fock minimisation")->capture_default_str();
  oracle->add_option("--tolerance", oo.tolerance)->capture_default_str();
  oracle->add_option("--perturb", oo.perturb, "test mode: offset added to the Gaussian values")
      ->capture_default_str();
  oracle->add_option("--cutoff-sweep", oo.cutoff_sweep, "report max deviation at each cutoff")
      ->delimiter(',');
  oracle->add_option("--write-goldens", oo.write_goldens, "write the golden CSV and exit");
  oracle->add_option("--export-dir", oo.export_dir, "also write each pair as covariance CSVs");
  oracle->add_option("--out", oo.out, "output CSV");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv, {"qcb", "subdiff", "sweep", "simulate", "oracle-check"});
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  spcb_set_max_threads(threads);
  try {
    if (*qcb) return run_qcb(*qcb, qo);
    if (*subdiff) return run_subdiff(*subdiff, so);
    if (*sweep) return run_sweep(*sweep, wo);
    if (*simulate) return run_simulate(*simulate, mo);
    if (*oracle) return run_oracle(*oracle, oo);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
