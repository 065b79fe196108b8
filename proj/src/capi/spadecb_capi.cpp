#include "spadecb/spadecb.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "spadecb/chernoff.hpp"
#include "spadecb/covariance.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/fock.hpp"
#include "spadecb/optimize.hpp"
#include "spadecb/simulator.hpp"
#include "spadecb/source.hpp"
#include "spadecb/subdiff.hpp"
#include "spadecb/sweep.hpp"

struct spcb_cov {
  spadecb::CovMatrix m;
};

struct spcb_source {
  spadecb::IntensityGrid grid;
};

namespace {

thread_local std::string g_last_error;

spcb_status fail(spcb_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
spcb_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return SPCB_OK;
  } catch (const spadecb::DomainError& e) {
    return fail(SPCB_ERR_DOMAIN, e.what());
  } catch (const spadecb::InvalidSourceError& e) {
    return fail(SPCB_ERR_INVALID_SOURCE, e.what());
  } catch (const spadecb::ParseError& e) {
    return fail(SPCB_ERR_PARSE, e.what());
  } catch (const spadecb::TruncationError& e) {
    return fail(SPCB_ERR_TRUNCATION, e.what());
  } catch (const spadecb::OptimizerError& e) {
    return fail(SPCB_ERR_OPTIMIZER, e.what());
  } catch (const spadecb::IoError& e) {
    return fail(SPCB_ERR_IO, e.what());
  } catch (const spadecb::PreconditionError& e) {
    return fail(SPCB_ERR_PRECONDITION, e.what());
  } catch (const spadecb::Error& e) {
    return fail(SPCB_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPCB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPCB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPCB_ERR_INTERNAL, "unknown exception");
  }
}

#define SPCB_REQUIRE(p)                                                  \
  do {                                                                   \
    if (!(p)) return fail(SPCB_ERR_NULL_ARGUMENT, "null argument: " #p); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill(const spadecb::ChernoffResult& r, spcb_result* out) {
  out->exponent = r.exponent;
  out->s_star = r.s_star;
  out->has_theta0 = r.theta0_star.has_value() ? 1 : 0;
  out->theta0_star = r.theta0_star.value_or(0.0);
  out->method = static_cast<int>(r.method);
  out->multimodal = r.multimodal ? 1 : 0;
}

spadecb::ScenarioParams to_params(const spcb_scenario* p) {
  spadecb::ScenarioParams q;
  q.V1x = p->v1x;
  q.V1y = p->v1y;
  q.V2x = p->v2x;
  q.V2y = p->v2y;
  q.theta1 = p->theta1;
  q.theta2 = p->theta2;
  q.I0 = p->i0;
  q.chi = p->chi;
  return q;
}

spadecb::SweepGrid to_grid(const spcb_sweep_grid* g) {
  spadecb::SweepGrid out;
  if (g) {
    out.theta0_min = g->theta0_min;
    out.theta0_max = g->theta0_max;
    out.points = g->points;
    out.I0 = g->i0;
    out.chi = g->chi;
  }
  return out;
}

spcb_status run_sweep_c(const std::vector<spadecb::SweepCurve>& curves,
                        const spcb_sweep_grid* grid, spcb_sweep_callback cb, void* user) {
  // a nonzero callback return unwinds run_sweep through Stop
  struct Stop {};
  return guarded([&] {
    try {
      spadecb::run_sweep(curves, to_grid(grid), [&](const spadecb::SweepRow& r) {
        spcb_sweep_row row{r.curve.c_str(), r.dtheta, r.V1x, r.V1y, r.V2x, r.V2y,
                           r.sweep_variable, r.xi_q, r.xi_spade, r.gap, r.s_star, r.theta0};
        if (cb && cb(&row, user) != 0) throw Stop{};
      });
    } catch (const Stop&) {
    }
  });
}

}  // namespace

extern "C" {

const char* spcb_version(void) { return "1.0.0"; }

const char* spcb_last_error(void) { return g_last_error.c_str(); }

const char* spcb_status_name(spcb_status status) {
  switch (status) {
    case SPCB_OK: return "ok";
    case SPCB_ERR_DOMAIN: return "domain error";
    case SPCB_ERR_PRECONDITION: return "precondition violated";
    case SPCB_ERR_INVALID_SOURCE: return "invalid source";
    case SPCB_ERR_PARSE: return "parse error";
    case SPCB_ERR_TRUNCATION: return "truncation error";
    case SPCB_ERR_OPTIMIZER: return "optimizer error";
    case SPCB_ERR_IO: return "i/o error";
    case SPCB_ERR_NULL_ARGUMENT: return "null argument";
    case SPCB_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case SPCB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* spcb_method_name(int method) {
  switch (method) {
    case SPCB_METHOD_GENERAL: return "general";
    case SPCB_METHOD_FAINT: return "faint";
    case SPCB_METHOD_COMMUTING: return "commuting";
    case SPCB_METHOD_SUBDIFF_QCB: return "subdiff_qcb";
    case SPCB_METHOD_TRISPADE: return "trispade";
    case SPCB_METHOD_AUTO: return "auto";
    default: return "unknown";
  }
}

void spcb_set_max_threads(unsigned n) { spadecb::set_max_threads(n); }

void spcb_string_free(char* s) { std::free(s); }

/* covariance */

spcb_status spcb_cov_from_entries(const double* entries, size_t dim, spcb_cov** out) {
  SPCB_REQUIRE(entries);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    if (dim == 0) throw spadecb::PreconditionError("covariance dimension must be positive");
    auto c = new spcb_cov;
    const auto n = static_cast<Eigen::Index>(dim);
    c->m.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) c->m.entries(i, j) = entries[i * n + j];
    c->m.I0 = c->m.entries.trace();
    *out = c;
  });
}

spcb_status spcb_cov_load_csv(const char* path, spcb_cov** out) {
  SPCB_REQUIRE(path);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new spcb_cov{spadecb::load_cov_csv(path)}; });
}

spcb_status spcb_cov_parse_csv(const char* text, spcb_cov** out) {
  SPCB_REQUIRE(text);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new spcb_cov{spadecb::cov_from_csv(text)}; });
}

spcb_status spcb_cov_save_csv(const spcb_cov* cov, const char* path) {
  SPCB_REQUIRE(cov);
  SPCB_REQUIRE(path);
  return guarded([&] { spadecb::save_cov_csv(cov->m, path); });
}

spcb_status spcb_cov_dim(const spcb_cov* cov, size_t* dim) {
  SPCB_REQUIRE(cov);
  SPCB_REQUIRE(dim);
  *dim = static_cast<size_t>(cov->m.dim());
  g_last_error.clear();
  return SPCB_OK;
}

spcb_status spcb_cov_entries(const spcb_cov* cov, double* out, size_t capacity) {
  SPCB_REQUIRE(cov);
  SPCB_REQUIRE(out);
  const auto n = cov->m.dim();
  if (capacity < static_cast<size_t>(n * n))
    return fail(SPCB_ERR_BUFFER_TOO_SMALL, "need " + std::to_string(n * n) + " entries");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out[i * n + j] = cov->m.entries(i, j);
  g_last_error.clear();
  return SPCB_OK;
}

spcb_status spcb_cov_i0(const spcb_cov* cov, double* i0) {
  SPCB_REQUIRE(cov);
  SPCB_REQUIRE(i0);
  *i0 = cov->m.I0;
  g_last_error.clear();
  return SPCB_OK;
}

spcb_status spcb_cov_basis(const spcb_cov* cov, char** description) {
  SPCB_REQUIRE(cov);
  SPCB_REQUIRE(description);
  *description = nullptr;
  return guarded([&] { *description = dup_string(cov->m.basis.describe()); });
}

spcb_status spcb_cov_is_valid(const spcb_cov* cov, int* valid) {
  SPCB_REQUIRE(cov);
  SPCB_REQUIRE(valid);
  return guarded([&] { *valid = spadecb::is_valid_covariance(cov->m) ? 1 : 0; });
}

spcb_status spcb_cov_hg_chi2(const spcb_moments* mom, double i0, double chi, spcb_cov** out) {
  SPCB_REQUIRE(mom);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    spadecb::SecondMoments m{mom->m10, mom->m01, mom->m20, mom->m02, mom->m11};
    *out = new spcb_cov{spadecb::hg_covariance_chi2(m, i0, chi)};
  });
}

void spcb_cov_free(spcb_cov* cov) { delete cov; }

/* sources */

spcb_status spcb_source_from_config_text(const char* text, spcb_source** out) {
  SPCB_REQUIRE(text);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto cfg = spadecb::parse_source_config(text);
    *out = new spcb_source{spadecb::make_source(cfg.source, cfg.grid)};
  });
}

spcb_status spcb_source_load_config(const char* path, spcb_source** out) {
  SPCB_REQUIRE(path);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto cfg = spadecb::load_source_config(path);
    *out = new spcb_source{spadecb::make_source(cfg.source, cfg.grid)};
  });
}

spcb_status spcb_source_load_pixels(const char* path, spcb_source** out) {
  SPCB_REQUIRE(path);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto g = spadecb::load_pixel_csv(path);
    g.validate();
    *out = new spcb_source{std::move(g)};
  });
}

spcb_status spcb_source_total_intensity(const spcb_source* src, double* i0) {
  SPCB_REQUIRE(src);
  SPCB_REQUIRE(i0);
  return guarded([&] { *i0 = src->grid.total_intensity(); });
}

spcb_status spcb_source_moments(const spcb_source* src, double scale, int centre,
                                spcb_moments* out) {
  SPCB_REQUIRE(src);
  SPCB_REQUIRE(out);
  return guarded([&] {
    auto img = spadecb::normalize(src->grid, scale);
    if (centre) img = spadecb::center(img);
    const auto m = spadecb::moments(img);
    *out = spcb_moments{m.m10, m.m01, m.m20, m.m02, m.m11};
  });
}

spcb_status spcb_source_frame(const spcb_source* src, double scale, spcb_frame* out) {
  SPCB_REQUIRE(src);
  SPCB_REQUIRE(out);
  return guarded([&] {
    const auto img = spadecb::center(spadecb::normalize(src->grid, scale));
    const auto f = spadecb::principal_frame(spadecb::moments(img));
    *out = spcb_frame{f.Vx, f.Vy, f.theta};
  });
}

spcb_status spcb_source_hg_cov(const spcb_source* src, double sigma, int max_order,
                               spcb_cov** out) {
  SPCB_REQUIRE(src);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto img = spadecb::normalize(src->grid, 1.0);
    *out = new spcb_cov{spadecb::hg_covariance_exact(img, sigma, max_order)};
  });
}

spcb_status spcb_source_position_cov(const spcb_source* src, double sigma, int nx, int ny,
                                     spcb_cov** out) {
  SPCB_REQUIRE(src);
  SPCB_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const spadecb::GaussianPsf psf(sigma);
    const auto grid = spadecb::OutputGrid::around(psf, nx, ny);
    *out = new spcb_cov{spadecb::position_covariance(src->grid, psf, grid)};
  });
}

void spcb_source_free(spcb_source* src) { delete src; }

/* Chernoff */

spcb_status spcb_qcb(const spcb_cov* a, const spcb_cov* b, int method, spcb_result* out) {
  SPCB_REQUIRE(a);
  SPCB_REQUIRE(b);
  SPCB_REQUIRE(out);
  return guarded([&] {
    spadecb::ChernoffResult r;
    switch (method) {
      case SPCB_METHOD_GENERAL: r = spadecb::qcb_general(a->m, b->m); break;
      case SPCB_METHOD_FAINT: r = spadecb::qcb_faint(a->m, b->m); break;
      case SPCB_METHOD_COMMUTING: r = spadecb::qcb_commuting(a->m, b->m); break;
      case SPCB_METHOD_AUTO: r = spadecb::qcb_auto(a->m, b->m); break;
      default:
        throw spadecb::PreconditionError("method " + std::to_string(method) +
                                         " does not apply to covariance matrices");
    }
    fill(r, out);
  });
}

spcb_status spcb_q_of_s(const spcb_cov* a, const spcb_cov* b, double s, double* q) {
  SPCB_REQUIRE(a);
  SPCB_REQUIRE(b);
  SPCB_REQUIRE(q);
  return guarded([&] { *q = spadecb::q_of_s(a->m, b->m, s); });
}

spcb_status spcb_commute_check(const spcb_cov* a, const spcb_cov* b, double tol, int* commutes) {
  SPCB_REQUIRE(a);
  SPCB_REQUIRE(b);
  SPCB_REQUIRE(commutes);
  return guarded([&] { *commutes = spadecb::commute_check(a->m, b->m, tol) ? 1 : 0; });
}

/* subdiffraction */

spcb_status spcb_subdiff_qcb(const spcb_scenario* p, spcb_result* out) {
  SPCB_REQUIRE(p);
  SPCB_REQUIRE(out);
  return guarded([&] { fill(spadecb::qcb_subdiff(to_params(p)), out); });
}

spcb_status spcb_spade_exponent(const spcb_scenario* p, double theta0, spcb_result* out) {
  SPCB_REQUIRE(p);
  SPCB_REQUIRE(out);
  return guarded([&] { fill(spadecb::spade_exponent(to_params(p), theta0), out); });
}

spcb_status spcb_spade_optimal(const spcb_scenario* p, spcb_result* out) {
  SPCB_REQUIRE(p);
  SPCB_REQUIRE(out);
  return guarded([&] { fill(spadecb::spade_optimal(to_params(p)), out); });
}

spcb_status spcb_gap(const spcb_scenario* p, double theta0, double* gap) {
  SPCB_REQUIRE(p);
  SPCB_REQUIRE(gap);
  return guarded([&] { *gap = spadecb::gap(to_params(p), theta0); });
}

spcb_status spcb_oned_boundary_ratio(double dtheta, double* ratio) {
  SPCB_REQUIRE(ratio);
  return guarded([&] { *ratio = spadecb::oneD_boundary_ratio(dtheta); });
}

/* sweeps */

void spcb_sweep_grid_default(spcb_sweep_grid* grid) {
  if (!grid) return;
  const spadecb::SweepGrid g;
  *grid = spcb_sweep_grid{g.theta0_min, g.theta0_max, g.points, g.I0, g.chi};
}

const char* spcb_sweep_csv_header(void) {
  static const std::string h = spadecb::sweep_csv_header();
  return h.c_str();
}

spcb_status spcb_sweep_preset(const char* preset, const spcb_sweep_grid* grid,
                              spcb_sweep_callback cb, void* user) {
  SPCB_REQUIRE(preset);
  std::vector<spadecb::SweepCurve> curves;
  const auto st = guarded([&] { curves = spadecb::preset_curves(preset); });
  if (st != SPCB_OK) return st;
  return run_sweep_c(curves, grid, cb, user);
}

spcb_status spcb_sweep_custom(const spcb_sweep_curve* curves, size_t n_curves,
                              const spcb_sweep_grid* grid, spcb_sweep_callback cb, void* user) {
  SPCB_REQUIRE(curves || n_curves == 0);
  std::vector<spadecb::SweepCurve> cs;
  for (size_t i = 0; i < n_curves; ++i) {
    const auto& c = curves[i];
    cs.push_back({c.name ? c.name : "curve" + std::to_string(i), c.v1x, c.v1y, c.v2x, c.v2y,
                  c.dtheta});
  }
  return run_sweep_c(cs, grid, cb, user);
}

/* Monte Carlo */

void spcb_sim_config_default(spcb_sim_config* cfg) {
  if (!cfg) return;
  const spadecb::SimConfig d;
  cfg->trials = d.trials;
  cfg->seed = d.seed;
  cfg->sampling = d.sampling_mode == spadecb::SamplingMode::closed_form_probs
                      ? SPCB_SAMPLING_CLOSED_FORM
                      : SPCB_SAMPLING_P_FUNCTION;
  cfg->min_errors = d.min_errors;
  cfg->max_trials = d.max_trials;
}

spcb_status spcb_simulate(const spcb_scenario* p, double theta0, const spcb_sim_config* cfg,
                          const int* n_list, size_t n, spcb_sim_summary* out, char** csv) {
  SPCB_REQUIRE(p);
  SPCB_REQUIRE(n_list || n == 0);
  SPCB_REQUIRE(out);
  if (csv) *csv = nullptr;
  return guarded([&] {
    spadecb::SimConfig c;
    if (cfg) {
      c.trials = cfg->trials;
      c.seed = cfg->seed;
      switch (cfg->sampling) {
        case SPCB_SAMPLING_CLOSED_FORM:
          c.sampling_mode = spadecb::SamplingMode::closed_form_probs;
          break;
        case SPCB_SAMPLING_P_FUNCTION:
          c.sampling_mode = spadecb::SamplingMode::p_function_exact;
          break;
        default:
          throw spadecb::PreconditionError("unknown sampling mode " +
                                           std::to_string(cfg->sampling));
      }
      c.min_errors = cfg->min_errors;
      c.max_trials = cfg->max_trials;
    }
    const auto params = to_params(p);
    const std::vector<int> ns(n_list, n_list + n);
    const auto fit = spadecb::estimate_error_exponent(params, theta0, c, ns);
    *out = spcb_sim_summary{fit.slope,
                            fit.slope_stderr,
                            fit.ci_low,
                            fit.ci_high,
                            fit.slope_prefactor_corrected,
                            fit.xi_theory,
                            fit.xi_q,
                            fit.ratio,
                            static_cast<int>(fit.warnings.size())};
    if (csv) *csv = dup_string(spadecb::simulation_csv(fit, params, theta0, c));
  });
}

/* oracle */

spcb_status spcb_oracle_family_size(size_t* n) {
  SPCB_REQUIRE(n);
  return guarded([&] { *n = spadecb::oracle_family().size(); });
}

spcb_status spcb_oracle_check(int cutoff, int strict, int s_points, double perturbation,
                              spcb_oracle_row* rows, size_t capacity, size_t* n_rows) {
  SPCB_REQUIRE(rows || capacity == 0);
  SPCB_REQUIRE(n_rows);
  const size_t need = spadecb::oracle_family().size();
  *n_rows = need;
  if (capacity < need)
    return fail(SPCB_ERR_BUFFER_TOO_SMALL,
                "row buffer holds " + std::to_string(capacity) + ", need " + std::to_string(need));
  return guarded([&] {
    const auto family = spadecb::oracle_family();
    if (s_points <= 0) s_points = 1001;
    for (size_t i = 0; i < family.size(); ++i) {
      const auto& c = family[i];
      const int k = cutoff > 0 ? cutoff : spadecb::pair_cutoff(c);
      const auto r1 = spadecb::fock_state_from_cov(c.gamma1(), k, strict != 0);
      const auto r2 = spadecb::fock_state_from_cov(c.gamma2(), k, strict != 0);
      const double fock = spadecb::qcb_fock(r1, r2, s_points).exponent;
      spadecb::CovMatrix g1{c.gamma1(), {}, c.a1 + c.b1, 0.0};
      spadecb::CovMatrix g2{c.gamma2(), {}, c.a2 + c.b2, 0.0};
      const double gauss = spadecb::qcb_general(g1, g2).exponent + perturbation;
      rows[i] = spcb_oracle_row{c.id, c.a1, c.b1, c.a2, c.b2, c.angle, k,
                                fock, gauss, std::abs(fock - gauss)};
    }
  });
}

spcb_status spcb_oracle_goldens_csv(int cutoff, int s_points, char** csv) {
  SPCB_REQUIRE(csv);
  *csv = nullptr;
  return guarded([&] {
    std::vector<spadecb::Golden> gs;
    for (const auto& c : spadecb::oracle_family())
      gs.push_back(spadecb::compute_golden(c, cutoff, s_points > 0 ? s_points : 1001));
    *csv = dup_string(spadecb::goldens_to_csv(gs));
  });
}

}  // extern "C"
