// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "ebmix/simd/kernels.hpp"

namespace ebmix::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), c);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = x[i] - center;
    s += d * d;
  }
  return s;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void nig_log_weights(const double* mu, const double* log_s2, const double* inv_s2,
                     std::size_t n, const NigTerms& t, double* out) {
  const __m256d log_const = _mm256_set1_pd(t.log_const);
  const __m256d coeff = _mm256_set1_pd(t.log_s2_coeff);
  const __m256d m = _mm256_set1_pd(t.m);
  const __m256d half_lambda = _mm256_set1_pd(t.half_lambda);
  const __m256d beta = _mm256_set1_pd(t.beta);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(mu + j), m);
    const __m256d rate = _mm256_fmadd_pd(_mm256_mul_pd(half_lambda, d), d, beta);
    const __m256d base = _mm256_fmadd_pd(coeff, _mm256_loadu_pd(log_s2 + j), log_const);
    _mm256_storeu_pd(out + j, _mm256_fnmadd_pd(rate, _mm256_loadu_pd(inv_s2 + j), base));
  }
  for (; j < n; ++j) {
    const double d = mu[j] - t.m;
    out[j] = t.log_const + t.log_s2_coeff * log_s2[j] -
             (t.beta + t.half_lambda * d * d) * inv_s2[j];
  }
}

// exp(x) = 2^k exp(r), r = x - k ln2, |r| <= ln2 / 2; exp(r) by a degree-13
// Taylor polynomial (truncation error below 2e-16 relative). Lanes outside
// the normal-result range, or NaN, go through std::exp.
constexpr double kExpLo = -708.0;
constexpr double kExpHi = 709.0;

void exp_inplace(double* x, std::size_t n) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lo = _mm256_set1_pd(kExpLo);
  const __m256d hi = _mm256_set1_pd(kExpHi);
  static constexpr double kInvFact[14] = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d in_range =
        _mm256_and_pd(_mm256_cmp_pd(v, lo, _CMP_GE_OQ), _mm256_cmp_pd(v, hi, _CMP_LE_OQ));
    if (_mm256_movemask_pd(in_range) != 0xF) {
      for (std::size_t l = i; l < i + 4; ++l) x[l] = std::exp(x[l]);
      continue;
    }
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(v, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, v);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);
    __m256d p = _mm256_set1_pd(kInvFact[13]);
    for (int d = 12; d >= 0; --d) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[d]));
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    const __m256i k64 = _mm256_cvtepi32_epi64(k32);
    const __m256i bits =
        _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    _mm256_storeu_pd(x + i, _mm256_mul_pd(p, _mm256_castsi256_pd(bits)));
  }
  for (; i < n; ++i) x[i] = std::exp(x[i]);
}

double sure_sm_sum(const double* b, const double* dev2, const double* v, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d bj = _mm256_loadu_pd(b + j);
    const __m256d shrink_term = _mm256_mul_pd(_mm256_mul_pd(bj, bj), _mm256_loadu_pd(dev2 + j));
    const __m256d var_term = _mm256_mul_pd(_mm256_fnmadd_pd(two, bj, one), _mm256_loadu_pd(v + j));
    acc = _mm256_add_pd(acc, _mm256_add_pd(shrink_term, var_term));
  }
  double s = hsum(acc);
  for (; j < n; ++j) s += b[j] * b[j] * dev2[j] + (1.0 - 2.0 * b[j]) * v[j];
  return s;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{sum, sum_sq_dev, sum_sq_diff, nig_log_weights, exp_inplace,
                             sure_sm_sum};
  return t;
}

}  // namespace ebmix::simd::avx2
