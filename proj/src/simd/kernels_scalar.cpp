#include <cmath>

#include "ebmix/simd/kernels.hpp"

namespace ebmix::simd::scalar {

namespace {

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - center;
    s += d * d;
  }
  return s;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void nig_log_weights(const double* mu, const double* log_s2, const double* inv_s2,
                     std::size_t n, const NigTerms& t, double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    const double d = mu[j] - t.m;
    out[j] = t.log_const + t.log_s2_coeff * log_s2[j] -
             (t.beta + t.half_lambda * d * d) * inv_s2[j];
  }
}

void exp_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

double sure_sm_sum(const double* b, const double* dev2, const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += b[j] * b[j] * dev2[j] + (1.0 - 2.0 * b[j]) * v[j];
  return s;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{sum, sum_sq_dev, sum_sq_diff, nig_log_weights, exp_inplace,
                             sure_sm_sum};
  return t;
}

}  // namespace ebmix::simd::scalar
