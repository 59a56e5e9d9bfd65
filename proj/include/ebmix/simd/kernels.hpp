#pragma once

#include <span>
#include <string_view>

namespace ebmix::simd {

enum class Isa { scalar, avx2 };

// Per-component constants of log NIG(mu, s2 | m, lambda, alpha, beta),
// rearranged so the per-coordinate work is
//   log_const + log_s2_coeff * log(s2) - (beta + half_lambda * (mu - m)^2) / s2
struct NigTerms {
  double log_const;     // -log(2 pi)/2 + log(lambda)/2 + alpha log(beta) - lgamma(alpha)
  double log_s2_coeff;  // -(alpha + 3/2)
  double m;
  double half_lambda;
  double beta;
};

NigTerms make_nig_terms(double m, double lambda, double alpha, double beta);

struct KernelTable {
  double (*sum)(const double* x, std::size_t n);
  double (*sum_sq_dev)(const double* x, std::size_t n, double center);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  void (*nig_log_weights)(const double* mu, const double* log_s2, const double* inv_s2,
                          std::size_t n, const NigTerms& terms, double* out);
  void (*exp_inplace)(double* x, std::size_t n);
  double (*sure_sm_sum)(const double* b, const double* dev2, const double* v,
                        std::size_t n);
};

namespace scalar {
const KernelTable& table();
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
const KernelTable& table();
}
#endif

bool isa_available(Isa isa);
// Best available ISA, unless the EBMIX_ISA environment variable
// ("scalar" or "avx2") pins one.
Isa active_isa();
// Overrides the active ISA for the whole process; throws if unavailable.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);
const KernelTable& table_for(Isa isa);

// Dispatched entry points.
double sum(std::span<const double> x);
double sum_sq_dev(std::span<const double> x, double center);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
void nig_log_weights(std::span<const double> mu, std::span<const double> log_s2,
                     std::span<const double> inv_s2, const NigTerms& terms,
                     std::span<double> out);
void exp_inplace(std::span<double> x);
// Sum of b^2 dev2 + (1 - 2 b) v.
double sure_sm_sum(std::span<const double> b, std::span<const double> dev2,
                   std::span<const double> v);

}  // namespace ebmix::simd
