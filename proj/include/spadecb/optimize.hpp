#pragma once

#include <cstddef>
#include <functional>

namespace spadecb {

struct ScalarMin {
  double x = 0.0;
  double f = 0.0;
  bool multimodal = false;  // coarse grid showed more than one local minimum
};

/// Deterministic bounded minimisation: 201-point grid on [lo, hi], then
/// golden-section refinement inside the bracket of the best grid point until
/// the bracket is narrower than tol. If the grid has several local minima the
/// refined best one is returned and `multimodal` is set. Throws
/// OptimizerError on a non-finite objective value.
ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-10, int grid_points = 201);

/// Golden-section search on [a, b] only.
ScalarMin golden_section(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-10);

/// Worker cap used by parallel_for. 0 means hardware concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(i) for i in [0, n) on up to max_threads() workers. Each index is
/// visited exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spadecb
