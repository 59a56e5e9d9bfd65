#include "ebmix/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "ebmix/errors.hpp"

namespace ebmix {

Minimum golden_section(const std::function<double(double)>& f, double a, double b,
                       double tol, int max_iter) {
  if (!(a <= b)) throw ParameterError("golden_section: a must not exceed b");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
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
  Minimum best = fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
  for (double x : {a, b}) {
    const double fx = f(x);
    if (fx < best.f) best = {x, fx};
  }
  return best;
}

Minimum grid_then_golden(const std::function<double(double)>& f, double a, double b,
                         int n, double tol) {
  if (n < 2) throw ParameterError("grid_then_golden: need at least 2 grid points");
  if (a == b) return {a, f(a)};
  std::vector<double> xs(static_cast<std::size_t>(n)), fs(xs.size());
  for (int i = 0; i < n; ++i) {
    xs[i] = a + (b - a) * i / (n - 1);
    fs[i] = f(xs[i]);
  }
  const auto best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  const double lo = xs[std::max(best - 1, 0)];
  const double hi = xs[std::min(best + 1, n - 1)];
  Minimum m = golden_section(f, lo, hi, tol);
  if (fs[best] < m.f) m = {xs[best], fs[best]};
  return m;
}

}  // namespace ebmix
