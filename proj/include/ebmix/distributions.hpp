#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ebmix/rng.hpp"

namespace ebmix {

// Parameterizations follow the rate convention throughout:
//   Gamma(x | a, b)        = b^a / Gamma(a) x^(a-1) exp(-b x)
//   InverseGamma(x | a, b) = b^a / Gamma(a) x^(-a-1) exp(-b / x)
//   NIG(mu, s2 | m, lambda, alpha, beta) = N(mu | m, s2 / lambda) IG(s2 | alpha, beta)

struct Normal {
  double mean;
  double variance;
};
struct Gamma {
  double shape;
  double rate;
};
struct InverseGamma {
  double shape;
  double rate;
};
struct Beta {
  double a;
  double b;
};
struct Dirichlet {
  std::vector<double> weights;
};
struct Categorical {
  std::vector<double> probs;
};
struct Hypergeometric {
  std::int64_t population;
  std::int64_t successes;
  std::int64_t draws;
};
struct NormalInverseGamma {
  double m;
  double lambda;
  double alpha;
  double beta;
};

using DistParams = std::variant<Normal, Gamma, InverseGamma, Beta, Dirichlet,
                                Categorical, Hypergeometric, NormalInverseGamma>;

// Throws ParameterError when the parameters violate their domain.
void validate(const DistParams& params);

/// Draws one variate. Scalars come back as a length-1 vector, a NIG draw as
/// (mu, sigma2), a Dirichlet draw as the full simplex vector, and
/// Categorical/Hypergeometric draws as the index/count stored in a double.
std::vector<double> sample(const DistParams& params, RngStream& rng);

/// Log density (or log pmf) at x, laid out like the output of `sample`.
/// Points outside the support give -infinity.
double log_density(const DistParams& params, std::span<const double> x);

/// Truncated stick-breaking weights: s_r ~ Beta(1, gamma) for r < k and the
/// last weight absorbs the remainder.
std::vector<double> stick_breaking_weights(double gamma, int k, RngStream& rng);

// Unchecked fast paths used inside the sampler.
double draw_normal(RngStream& rng, double mean, double variance);
double draw_gamma(RngStream& rng, double shape, double rate);
// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
double draw_log_gamma(RngStream& rng, double shape);
double draw_inverse_gamma(RngStream& rng, double shape, double rate);
double draw_beta(RngStream& rng, double a, double b);
void draw_dirichlet(RngStream& rng, std::span<const double> weights,
                    std::span<double> out);
// `probs` need not be normalized; all entries must be finite and >= 0.
std::size_t draw_categorical(RngStream& rng, std::span<const double> probs);
std::int64_t draw_hypergeometric(RngStream& rng, std::int64_t population,
                                 std::int64_t successes, std::int64_t draws);

double log_normal_pdf(double x, double mean, double variance);
double log_gamma_pdf(double x, double shape, double rate);
double log_inverse_gamma_pdf(double x, double shape, double rate);
double log_beta_pdf(double x, double a, double b);
double log_nig_pdf(double mu, double sigma2, double m, double lambda, double alpha,
                   double beta);
double log_hypergeometric_pmf(std::int64_t x, std::int64_t population,
                              std::int64_t successes, std::int64_t draws);

}  // namespace ebmix
