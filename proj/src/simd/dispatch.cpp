#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ebmix/errors.hpp"
#include "ebmix/simd/kernels.hpp"
#include "ebmix/special.hpp"

namespace ebmix::simd {

namespace {

Isa detect_best() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa initial_isa() {
  const Isa best = detect_best();
  if (const char* env = std::getenv("EBMIX_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return best;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> t{&table_for(initial_isa())};
  return t;
}

std::atomic<Isa>& active_tag() {
  static std::atomic<Isa> tag{initial_isa()};
  return tag;
}

const KernelTable& current() { return *active_table().load(std::memory_order_relaxed); }

}  // namespace

NigTerms make_nig_terms(double m, double lambda, double alpha, double beta) {
  return NigTerms{-0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * std::log(lambda) +
                      alpha * std::log(beta) - log_gamma_fn(alpha),
                  -(alpha + 1.5), m, 0.5 * lambda, beta};
}

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  return detect_best() == Isa::avx2;
}

Isa active_isa() { return active_tag().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_available(isa))
    throw ParameterError("requested SIMD ISA is not supported on this CPU");
  active_table().store(&table_for(isa), std::memory_order_relaxed);
  active_tag().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& table_for(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) return avx2::table();
#endif
  (void)isa;
  return scalar::table();
}

double sum(std::span<const double> x) { return current().sum(x.data(), x.size()); }

double sum_sq_dev(std::span<const double> x, double center) {
  return current().sum_sq_dev(x.data(), x.size(), center);
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return current().sum_sq_diff(a.data(), b.data(), a.size());
}

void nig_log_weights(std::span<const double> mu, std::span<const double> log_s2,
                     std::span<const double> inv_s2, const NigTerms& terms,
                     std::span<double> out) {
  current().nig_log_weights(mu.data(), log_s2.data(), inv_s2.data(), mu.size(), terms,
                            out.data());
}

void exp_inplace(std::span<double> x) { current().exp_inplace(x.data(), x.size()); }

double sure_sm_sum(std::span<const double> b, std::span<const double> dev2,
                   std::span<const double> v) {
  return current().sure_sm_sum(b.data(), dev2.data(), v.data(), b.size());
}

}  // namespace ebmix::simd
