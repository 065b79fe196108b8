#pragma once

#include <cmath>

namespace spadecb {

template <class F>
ConcaveMax maximize_concave(F&& f, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  ConcaveMax best{fc >= fd ? c : d, fc >= fd ? fc : fd};
  const double f0 = f(0.0);
  const double f1 = f(1.0);
  if (f0 >= best.value) best = {0.0, f0};
  if (f1 > best.value) best = {1.0, f1};
  return best;
}

}  // namespace spadecb
