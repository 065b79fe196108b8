#include "spadecb/optimize.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "spadecb/csv.hpp"
#include "spadecb/errors.hpp"

namespace spadecb {

namespace {

double checked(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw OptimizerError("objective is not finite (" + csv::format_double(v) + ") at x = " +
                             csv::format_double(x),
                         x);
  }
  return v;
}

std::atomic<unsigned> g_max_threads{0};

}  // namespace

ScalarMin golden_section(const std::function<double(double)>& f, double a, double b,
                         double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = checked(f, c);
  double fd = checked(f, d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = checked(f, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = checked(f, d);
    }
  }
  ScalarMin r;
  r.x = fc <= fd ? c : d;
  r.f = std::min(fc, fd);
  return r;
}

ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double tol, int grid_points) {
  if (!(hi >= lo)) throw DomainError("minimize_scalar: empty interval");
  if (grid_points < 3) grid_points = 3;
  if (hi == lo) return {lo, checked(f, lo), false};
  const int n = grid_points;
  std::vector<double> xs(n), fs(n);
  for (int k = 0; k < n; ++k) {
    xs[k] = k == n - 1 ? hi : lo + (hi - lo) * k / (n - 1);
    fs[k] = checked(f, xs[k]);
  }
  // Local minima of the sampled curve (plateaus count once).
  std::vector<int> minima;
  for (int k = 0; k < n; ++k) {
    const bool left = k == 0 || fs[k] < fs[k - 1];
    const bool right = k == n - 1 || fs[k] <= fs[k + 1];
    if (left && right) minima.push_back(k);
  }
  if (minima.empty()) minima.push_back(0);

  ScalarMin best{xs[minima[0]], fs[minima[0]], false};
  bool first = true;
  for (int k : minima) {
    ScalarMin cand{xs[k], fs[k], false};
    const int a = std::max(k - 1, 0);
    const int b = std::min(k + 1, n - 1);
    const auto refined = golden_section(f, xs[a], xs[b], tol);
    if (refined.f < cand.f) cand = refined;
    if (first || cand.f < best.f || (cand.f == best.f && cand.x < best.x)) best = cand;
    first = false;
  }
  best.multimodal = minima.size() > 1;
  return best;
}

void set_max_threads(unsigned n) { g_max_threads = n; }

unsigned max_threads() {
  const unsigned cap = g_max_threads.load();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return cap == 0 ? hw : std::min(cap, hw * 4);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(max_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto run = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace spadecb
