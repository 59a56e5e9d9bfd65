#include "ebmix/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ebmix/errors.hpp"
#include "ebmix/special.hpp"

namespace ebmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Marsaglia & Tsang (2000) squeeze/rejection for shape >= 1, unit rate.
double gamma_shape_ge1(RngStream& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double log_gamma_shape_ge1(RngStream& rng, double shape) {
  return std::log(gamma_shape_ge1(rng, shape));
}

}  // namespace

void validate(const DistParams& params) {
  std::visit(
      overloaded{
          [](const Normal& p) {
            require(std::isfinite(p.mean), "Normal: mean must be finite");
            require(positive_finite(p.variance), "Normal: variance must be > 0");
          },
          [](const Gamma& p) {
            require(positive_finite(p.shape) && positive_finite(p.rate),
                    "Gamma: shape and rate must be > 0");
          },
          [](const InverseGamma& p) {
            require(positive_finite(p.shape) && positive_finite(p.rate),
                    "InverseGamma: shape and rate must be > 0");
          },
          [](const Beta& p) {
            require(positive_finite(p.a) && positive_finite(p.b),
                    "Beta: both parameters must be > 0");
          },
          [](const Dirichlet& p) {
            require(!p.weights.empty(), "Dirichlet: empty weight vector");
            for (double w : p.weights)
              require(positive_finite(w), "Dirichlet: weights must be finite and > 0");
          },
          [](const Categorical& p) {
            require(!p.probs.empty(), "Categorical: empty probability vector");
            double total = 0.0;
            for (double v : p.probs) {
              require(std::isfinite(v) && v >= 0.0,
                      "Categorical: probabilities must be finite and >= 0");
              total += v;
            }
            require(std::abs(total - 1.0) < 1e-9, "Categorical: probabilities must sum to 1");
          },
          [](const Hypergeometric& p) {
            require(p.population >= 0 && p.successes >= 0 && p.draws >= 0 &&
                        p.successes <= p.population && p.draws <= p.population,
                    "Hypergeometric: need 0 <= K <= N and 0 <= n <= N");
          },
          [](const NormalInverseGamma& p) {
            require(std::isfinite(p.m), "NIG: m must be finite");
            require(positive_finite(p.lambda) && positive_finite(p.alpha) &&
                        positive_finite(p.beta),
                    "NIG: lambda, alpha and beta must be > 0");
          },
      },
      params);
}

std::vector<double> sample(const DistParams& params, RngStream& rng) {
  validate(params);
  return std::visit(
      overloaded{
          [&](const Normal& p) -> std::vector<double> {
            return {draw_normal(rng, p.mean, p.variance)};
          },
          [&](const Gamma& p) -> std::vector<double> {
            return {draw_gamma(rng, p.shape, p.rate)};
          },
          [&](const InverseGamma& p) -> std::vector<double> {
            return {draw_inverse_gamma(rng, p.shape, p.rate)};
          },
          [&](const Beta& p) -> std::vector<double> { return {draw_beta(rng, p.a, p.b)}; },
          [&](const Dirichlet& p) {
            std::vector<double> out(p.weights.size());
            draw_dirichlet(rng, p.weights, out);
            return out;
          },
          [&](const Categorical& p) -> std::vector<double> {
            return {static_cast<double>(draw_categorical(rng, p.probs))};
          },
          [&](const Hypergeometric& p) -> std::vector<double> {
            return {static_cast<double>(
                draw_hypergeometric(rng, p.population, p.successes, p.draws))};
          },
          [&](const NormalInverseGamma& p) -> std::vector<double> {
            const double s2 = draw_inverse_gamma(rng, p.alpha, p.beta);
            return {draw_normal(rng, p.m, s2 / p.lambda), s2};
          },
      },
      params);
}

double log_density(const DistParams& params, std::span<const double> x) {
  validate(params);
  return std::visit(
      overloaded{
          [&](const Normal& p) { return log_normal_pdf(x[0], p.mean, p.variance); },
          [&](const Gamma& p) { return log_gamma_pdf(x[0], p.shape, p.rate); },
          [&](const InverseGamma& p) {
            return log_inverse_gamma_pdf(x[0], p.shape, p.rate);
          },
          [&](const Beta& p) { return log_beta_pdf(x[0], p.a, p.b); },
          [&](const Dirichlet& p) {
            if (x.size() != p.weights.size()) return kNegInf;
            double total = 0.0;
            for (double v : x) {
              if (!(v > 0.0 && v < 1.0)) return kNegInf;
              total += v;
            }
            if (std::abs(total - 1.0) > 1e-9) return kNegInf;
            double alpha0 = 0.0, lp = 0.0;
            for (std::size_t r = 0; r < x.size(); ++r) {
              alpha0 += p.weights[r];
              lp += (p.weights[r] - 1.0) * std::log(x[r]) - log_gamma_fn(p.weights[r]);
            }
            return lp + log_gamma_fn(alpha0);
          },
          [&](const Categorical& p) {
            const double v = x[0];
            if (v < 0.0 || v != std::floor(v) || v >= static_cast<double>(p.probs.size()))
              return kNegInf;
            return std::log(p.probs[static_cast<std::size_t>(v)]);
          },
          [&](const Hypergeometric& p) {
            const double v = x[0];
            if (v != std::floor(v)) return kNegInf;
            return log_hypergeometric_pmf(static_cast<std::int64_t>(v), p.population,
                                          p.successes, p.draws);
          },
          [&](const NormalInverseGamma& p) {
            return log_nig_pdf(x[0], x[1], p.m, p.lambda, p.alpha, p.beta);
          },
      },
      params);
}

std::vector<double> stick_breaking_weights(double gamma, int k, RngStream& rng) {
  require(positive_finite(gamma), "stick_breaking_weights: gamma must be > 0");
  require(k >= 1, "stick_breaking_weights: k must be >= 1");
  std::vector<double> pi(static_cast<std::size_t>(k));
  double remaining = 1.0;
  double assigned = 0.0;
  for (int r = 0; r + 1 < k; ++r) {
    const double s = draw_beta(rng, 1.0, gamma);
    pi[r] = s * remaining;
    remaining *= 1.0 - s;
    assigned += pi[r];
  }
  pi[k - 1] = std::max(0.0, 1.0 - assigned);
  return pi;
}

double draw_normal(RngStream& rng, double mean, double variance) {
  return mean + std::sqrt(variance) * rng.normal();
}

double draw_gamma(RngStream& rng, double shape, double rate) {
  if (shape >= 1.0) return gamma_shape_ge1(rng, shape) / rate;
  // Boost: G(a) = G(a + 1) U^(1/a).
  const double g = gamma_shape_ge1(rng, shape + 1.0);
  return g * std::pow(rng.uniform_open(), 1.0 / shape) / rate;
}

double draw_log_gamma(RngStream& rng, double shape) {
  if (shape >= 1.0) return log_gamma_shape_ge1(rng, shape);
  return log_gamma_shape_ge1(rng, shape + 1.0) + std::log(rng.uniform_open()) / shape;
}

double draw_inverse_gamma(RngStream& rng, double shape, double rate) {
  return 1.0 / draw_gamma(rng, shape, rate);
}

double draw_beta(RngStream& rng, double a, double b) {
  const double la = draw_log_gamma(rng, a);
  const double lb = draw_log_gamma(rng, b);
  // x = Ga / (Ga + Gb) evaluated without overflow or underflow to 0/0.
  return 1.0 / (1.0 + std::exp(lb - la));
}

void draw_dirichlet(RngStream& rng, std::span<const double> weights,
                    std::span<double> out) {
  double top = kNegInf;
  for (std::size_t r = 0; r < weights.size(); ++r) {
    out[r] = draw_log_gamma(rng, weights[r]);
    top = std::max(top, out[r]);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
}

std::size_t draw_categorical(RngStream& rng, std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0.0) || !std::isfinite(total))
    throw ParameterError("draw_categorical: weights must have a positive finite sum");
  double u = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t r = 0; r < probs.size(); ++r) {
    if (probs[r] <= 0.0) continue;
    last_positive = r;
    u -= probs[r];
    if (u < 0.0) return r;
  }
  return last_positive;
}

std::int64_t draw_hypergeometric(RngStream& rng, std::int64_t population,
                                 std::int64_t successes, std::int64_t draws) {
  const std::int64_t lo = std::max<std::int64_t>(0, draws + successes - population);
  const std::int64_t hi = std::min(draws, successes);
  if (lo == hi) return lo;
  const std::int64_t failures = population - successes;
  std::int64_t mode = (draws + 1) * (successes + 1) / (population + 2);
  mode = std::clamp(mode, lo, hi);

  // Chop-down search outward from the mode (Kemp).
  const double p_mode =
      std::exp(log_hypergeometric_pmf(mode, population, successes, draws));
  double u = rng.uniform() - p_mode;
  if (u <= 0.0) return mode;
  std::int64_t down = mode, up = mode;
  double p_down = p_mode, p_up = p_mode;
  while (down > lo || up < hi) {
    if (down > lo) {
      const double x = static_cast<double>(down);
      p_down *= x * (failures - draws + x) /
                ((successes - x + 1.0) * (draws - x + 1.0));
      --down;
      u -= p_down;
      if (u <= 0.0) return down;
    }
    if (up < hi) {
      const double x = static_cast<double>(up);
      p_up *= (successes - x) * (draws - x) / ((x + 1.0) * (failures - draws + x + 1.0));
      ++up;
      u -= p_up;
      if (u <= 0.0) return up;
    }
  }
  return mode;
}

double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance)) - 0.5 * d * d / variance;
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  return shape * std::log(rate) - log_gamma_fn(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double log_inverse_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  return shape * std::log(rate) - log_gamma_fn(shape) - (shape + 1.0) * std::log(x) -
         rate / x;
}

double log_beta_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (log_gamma_fn(a) + log_gamma_fn(b) - log_gamma_fn(a + b));
}

double log_nig_pdf(double mu, double sigma2, double m, double lambda, double alpha,
                   double beta) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2) || !std::isfinite(mu)) return kNegInf;
  return log_normal_pdf(mu, m, sigma2 / lambda) +
         log_inverse_gamma_pdf(sigma2, alpha, beta);
}

double log_hypergeometric_pmf(std::int64_t x, std::int64_t population,
                              std::int64_t successes, std::int64_t draws) {
  const std::int64_t lo = std::max<std::int64_t>(0, draws + successes - population);
  const std::int64_t hi = std::min(draws, successes);
  if (x < lo || x > hi) return kNegInf;
  auto log_choose = [](double n, double k) {
    return log_gamma_fn(n + 1.0) - log_gamma_fn(k + 1.0) - log_gamma_fn(n - k + 1.0);
  };
  const double N = static_cast<double>(population);
  const double K = static_cast<double>(successes);
  const double n = static_cast<double>(draws);
  const double v = static_cast<double>(x);
  return log_choose(K, v) + log_choose(N - K, n - v) - log_choose(N, n);
}

}  // namespace ebmix
