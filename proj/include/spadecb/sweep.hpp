#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spadecb/subdiff.hpp"

namespace spadecb {

/// One gap curve: a fixed scenario swept over theta0. The two images sit at
/// theta1 = dtheta / 2 and theta2 = -dtheta / 2.
struct SweepCurve {
  std::string name;
  double V1x = 0.0, V1y = 0.0, V2x = 0.0, V2y = 0.0;
  double dtheta = 0.0;
};

struct SweepGrid {
  double theta0_min = -1.5707963267948966;
  double theta0_max = 1.5707963267948966;
  int points = 721;  // step pi / 720 on the default range
  double I0 = 1.0;
  double chi = 0.1;
};

struct SweepRow {
  std::string curve;
  double dtheta = 0.0;
  double V1x = 0.0, V1y = 0.0, V2x = 0.0, V2y = 0.0;
  double sweep_variable = 0.0;  // Delta1 + Delta2 = theta1 + theta2 - 2 theta0
  double xi_q = 0.0;
  double xi_spade = 0.0;
  double gap = 0.0;
  double s_star = 0.0;
  double theta0 = 0.0;
};

/// 1D sources (V, 0) and (rV, 0) for r in {1, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01}
/// at dtheta in {pi/8, pi/4, 3pi/8}.
std::vector<SweepCurve> fig2_curves();
/// Identical sources (6, 12) and (2, 0.2) rotated by dtheta in {pi/16, pi/8,
/// pi/4, 3pi/8, pi/2}.
std::vector<SweepCurve> fig3_curves();
std::vector<SweepCurve> preset_curves(const std::string& name);

ScenarioParams curve_params(const SweepCurve& c, const SweepGrid& g);

/// Rows in (curve, theta0) order regardless of worker count. on_row, when set,
/// receives rows in that order as well.
std::vector<SweepRow> run_sweep(const std::vector<SweepCurve>& curves, const SweepGrid& grid,
                                const std::function<void(const SweepRow&)>& on_row = {});

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& r);

}  // namespace spadecb
