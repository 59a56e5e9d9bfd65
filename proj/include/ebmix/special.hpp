#pragma once

#include <cmath>

namespace ebmix {

// Reentrant log-gamma. glibc's std::lgamma writes the global `signgam`,
// which races when chains run on several threads.
inline double log_gamma_fn(double x) {
#if defined(__GLIBC__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

}  // namespace ebmix
