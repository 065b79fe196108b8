#include "spadecb/sweep.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"
#include "spadecb/optimize.hpp"

namespace spadecb {

namespace {

constexpr double kPi = std::numbers::pi;

std::string angle_label(int num, int den) {
  if (num == 0) return "0";
  std::string s = (num == 1 ? std::string() : std::to_string(num)) + "pi";
  if (den != 1) s += "/" + std::to_string(den);
  return s;
}

}  // namespace

std::vector<SweepCurve> fig2_curves() {
  std::vector<SweepCurve> out;
  const int nums[] = {1, 2, 3};
  const double ratios[] = {1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01};
  for (int n : nums) {
    for (double r : ratios) {
      SweepCurve c;
      c.dtheta = n * kPi / 8.0;
      c.V1x = 1.0;
      c.V2x = r;
      c.name = "fig2 dtheta=" + angle_label(n, 8) + " ratio=" + csv::format_double(r);
      out.push_back(c);
    }
  }
  return out;
}

std::vector<SweepCurve> fig3_curves() {
  std::vector<SweepCurve> out;
  const std::pair<double, double> pairs[] = {{6.0, 12.0}, {2.0, 0.2}};
  const std::pair<int, int> angles[] = {{1, 16}, {1, 8}, {1, 4}, {3, 8}, {1, 2}};
  for (const auto& [vx, vy] : pairs) {
    for (const auto& [num, den] : angles) {
      SweepCurve c;
      c.dtheta = num * kPi / den;
      c.V1x = c.V2x = vx;
      c.V1y = c.V2y = vy;
      c.name = "fig3 V=(" + csv::format_double(vx) + ";" + csv::format_double(vy) +
               ") dtheta=" + angle_label(num, den);
      out.push_back(c);
    }
  }
  return out;
}

std::vector<SweepCurve> preset_curves(const std::string& name) {
  if (name == "fig2") return fig2_curves();
  if (name == "fig3") return fig3_curves();
  throw DomainError("unknown sweep preset '" + name + "' (expected fig2 or fig3)");
}

ScenarioParams curve_params(const SweepCurve& c, const SweepGrid& g) {
  ScenarioParams p;
  p.V1x = c.V1x;
  p.V1y = c.V1y;
  p.V2x = c.V2x;
  p.V2y = c.V2y;
  p.theta1 = 0.5 * c.dtheta;
  p.theta2 = -0.5 * c.dtheta;
  p.I0 = g.I0;
  p.chi = g.chi;
  return p;
}

std::vector<SweepRow> run_sweep(const std::vector<SweepCurve>& curves, const SweepGrid& grid,
                                const std::function<void(const SweepRow&)>& on_row) {
  if (curves.empty() || grid.points < 1) throw DomainError("empty sweep grid");
  if (!(grid.theta0_max >= grid.theta0_min)) throw DomainError("sweep range is empty");
  const std::size_t per = static_cast<std::size_t>(grid.points);
  std::vector<double> xi_q(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    xi_q[c] = qcb_subdiff(curve_params(curves[c], grid)).exponent;
  }
  std::vector<SweepRow> rows(curves.size() * per);
  parallel_for(rows.size(), [&](std::size_t idx) {
    const std::size_t c = idx / per;
    const std::size_t k = idx % per;
    const auto& cv = curves[c];
    const auto p = curve_params(cv, grid);
    const double t0 = per == 1 ? grid.theta0_min
                               : grid.theta0_min + (grid.theta0_max - grid.theta0_min) *
                                                       static_cast<double>(k) / (per - 1);
    const auto r = spade_exponent(p, t0);
    SweepRow row;
    row.curve = cv.name;
    row.dtheta = cv.dtheta;
    row.V1x = cv.V1x;
    row.V1y = cv.V1y;
    row.V2x = cv.V2x;
    row.V2y = cv.V2y;
    row.sweep_variable = p.theta1 + p.theta2 - 2.0 * t0;
    row.xi_q = xi_q[c];
    row.xi_spade = r.exponent;
    row.gap = xi_q[c] > 0.0 ? (xi_q[c] - r.exponent) / xi_q[c] : std::nan("");
    row.s_star = r.s_star;
    row.theta0 = t0;
    rows[idx] = row;
  });
  if (on_row) {
    for (const auto& r : rows) on_row(r);
  }
  return rows;
}

std::string sweep_csv_header() {
  return "curve,dtheta,v1x,v1y,v2x,v2y,sweep_variable,xi_q,xi_spade,gap,s_star,theta0";
}

std::string sweep_csv_row(const SweepRow& r) {
  std::ostringstream ss;
  ss << '"' << r.curve << '"';
  for (double v : {r.dtheta, r.V1x, r.V1y, r.V2x, r.V2y, r.sweep_variable, r.xi_q, r.xi_spade,
                   r.gap, r.s_star, r.theta0}) {
    ss << ',' << csv::format_double(v);
  }
  return ss.str();
}

}  // namespace spadecb
