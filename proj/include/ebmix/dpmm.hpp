#pragma once

// Truncated Dirichlet-process mixture of normal-inverse-gamma priors on the
// per-coordinate (mu_j, sigma_j^2) pairs, fitted by blocked Gibbs sampling
// with Metropolis-Hastings updates for the inverse-gamma shape and rate.
//
// One sweep, in order:
//   mu_j      ~ N((n xbar_j + lambda m) / (n + lambda), sigma_j^2 / (n + lambda))
//   sigma_j^2 ~ IG((n + 1)/2 + alpha, ss_j/2 + n (xbar_j - mu_j)^2 / 2
//                                     + lambda (mu_j - m)^2 / 2 + beta)
//   z_j       ~ Categorical(pi_r NIG(mu_j, sigma_j^2 | theta_r))
//   m_r       ~ N((m0/zeta2 + lambda_r sum mu_j/sigma_j^2) / prec,  1 / prec),
//               prec = 1/zeta2 + lambda_r sum 1/sigma_j^2
//   lambda_r  ~ G(c_r/2 + a_lambda, sum (mu_j - m_r)^2 / (2 sigma_j^2) + b_lambda)
//   alpha_r, beta_r: log-scale random-walk MH against
//               G(. | a, b) prior x prod_{j in cluster r} IG(sigma_j^2 | alpha_r, beta_r)
//   pi        ~ Dir(c_1 + gamma/k, ..., c_k + gamma/k)
// where (m, lambda, alpha, beta) are the parameters of component z_j and
// sums over j run over the members of cluster r. Empty clusters fall back to
// the base-measure priors. In known-variance mode sigma_j^2 is held fixed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebmix/data.hpp"
#include "ebmix/errors.hpp"
#include "ebmix/rng.hpp"

namespace ebmix::dpmm {

struct Hyperparams {
  double m0 = 0.0;
  double zeta2 = 1.0;
  double a_lambda = 1.0;
  double b_lambda = 2.0;
  double a_alpha = 1.0;
  double b_alpha = 1.0;
  double a_beta = 1.0;
  double b_beta = 1.0;  // rate of the beta_r prior on the standardized scale
  double gamma = 0.1;
  int k = 10;

  void validate() const;
};

struct HyperOverrides {
  std::optional<double> m0, zeta2, a_lambda, b_lambda, a_alpha, b_alpha, a_beta, b_beta,
      gamma;
  std::optional<int> k;
};

// Sample moments of the precisions 1/sigma_j^2 (variance with divisor q - 1).
struct PrecisionMoments {
  double mean = 0.0;
  double variance = 0.0;
};
PrecisionMoments precision_moments(std::span<const double> variances);

/// Default prior on the standardized scale: m0 = grand mean, zeta2 = variance
/// of the column means, lambda ~ G(1, 2) so that P(lambda < 1) is high,
/// gamma = 0.1, k = 10. Unknown-variance mode uses unit shape/rate priors for
/// alpha and beta; known-variance mode matches them to the precision moments
/// (b_alpha = var / mean^2, b_beta = var / mean).
Hyperparams elicit_hyperparams(const Summaries& standardized, VarianceMode mode,
                               const HyperOverrides& overrides = {},
                               std::optional<PrecisionMoments> precisions = std::nullopt);

// Standardizes `data` and elicits from the standardized summaries.
Hyperparams elicit_for(const DataMatrix& data, const HyperOverrides& overrides = {});

struct ComponentParams {
  double m = 0.0;
  double lambda = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

/// Sufficient statistics of each column as seen by the sampler.
struct ChainData {
  std::size_t n = 0;
  std::vector<double> xbar;
  std::vector<double> ss;            // sum_i (X_ij - xbar_j)^2
  std::vector<double> known_sigma2;  // empty in unknown-variance mode

  static ChainData from(const DataMatrix& data);
  std::size_t q() const { return xbar.size(); }
  bool known() const { return !known_sigma2.empty(); }
};

struct MixtureState {
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<int> z;  // 0-based component labels
  std::vector<ComponentParams> components;
  std::vector<double> pi;

  int k() const { return static_cast<int>(components.size()); }
};

// Per-component MH step sizes and acceptance counters.
struct MhTuning {
  std::vector<double> log_step_alpha, log_step_beta;
  std::vector<std::uint64_t> accepted_alpha, accepted_beta, attempted;

  MhTuning() = default;
  MhTuning(int k, double step_alpha, double step_beta);
  void reset_counts();
};

struct Workspace {
  std::vector<double> log_s2, inv_s2, weights;
  std::uint64_t underflow_fallbacks = 0;
};

struct ClusterStats {
  std::vector<double> count, sum_inv_s2, sum_mu_inv_s2, sum_log_s2;
};
ClusterStats cluster_stats(const MixtureState& state);

struct NormalParams {
  double mean;
  double variance;
};
struct ShapeRate {
  double shape;
  double rate;
};

// Full conditionals.
NormalParams mu_conditional(const MixtureState& state, const ChainData& data,
                            std::size_t j);
ShapeRate sigma2_conditional(const MixtureState& state, const ChainData& data,
                             std::size_t j);
std::vector<double> z_probabilities(const MixtureState& state, std::size_t j);
NormalParams m_conditional(const MixtureState& state, const Hyperparams& hyper, int r);
ShapeRate lambda_conditional(const MixtureState& state, const Hyperparams& hyper, int r);
std::vector<double> pi_conditional_weights(const MixtureState& state,
                                           const Hyperparams& hyper);

// Unnormalized log targets of the MH updates, on the natural scale.
double log_target_alpha(double alpha, double beta, double count, double sum_log_s2,
                        double sum_inv_s2, const Hyperparams& hyper);
double log_target_beta(double beta, double alpha, double count, double sum_inv_s2,
                       const Hyperparams& hyper);

/// log min(1, acceptance ratio) of a log-scale random-walk move from
/// `current` to `proposal` (includes the proposal/current Jacobian).
template <class LogTarget>
double mh_log_acceptance(double current, double proposal, LogTarget&& log_target) {
  const double ratio =
      log_target(proposal) + std::log(proposal) - log_target(current) - std::log(current);
  return ratio < 0.0 ? ratio : 0.0;
}

struct MhOutcome {
  double value;
  bool accepted;
};

/// One log-scale Gaussian random-walk MH update of a positive parameter.
template <class LogTarget>
MhOutcome mh_log_scale_step(double current, LogTarget&& log_target, double step,
                            RngStream& rng) {
  const double current_lt = log_target(current);
  if (!std::isfinite(current_lt))
    throw ChainHealthError("non-finite log target at the current MH point");
  const double proposal = current * std::exp(step * rng.normal());
  const double proposal_lt = log_target(proposal);
  const double log_ratio =
      proposal_lt + std::log(proposal) - current_lt - std::log(current);
  if (std::isfinite(proposal_lt) && std::log(rng.uniform_open()) < log_ratio)
    return {proposal, true};
  return {current, false};
}

// Gibbs steps; each updates `state` in place.
void step_mu(MixtureState& state, const ChainData& data, RngStream& rng);
void step_sigma2(MixtureState& state, const ChainData& data, RngStream& rng);
void step_z(MixtureState& state, RngStream& rng, Workspace& ws);
void step_m(MixtureState& state, const Hyperparams& hyper, RngStream& rng);
void step_lambda(MixtureState& state, const Hyperparams& hyper, RngStream& rng);
void step_alpha_beta(MixtureState& state, const Hyperparams& hyper, RngStream& rng,
                     MhTuning& tuning);
void step_pi(MixtureState& state, const Hyperparams& hyper, RngStream& rng);

/// Runs one full sweep. When `adapt_iteration` is set, MH step sizes are
/// nudged by Robbins-Monro towards 0.35 acceptance.
void gibbs_sweep(MixtureState& state, const ChainData& data, const Hyperparams& hyper,
                 RngStream& rng, MhTuning& tuning, Workspace& ws,
                 std::optional<int> adapt_iteration = std::nullopt);

/// k-means on (xbar_j, S_j^2) (known variances: (x_j, sigma_j^2)) seeds the
/// labels and m_r; lambda, alpha, beta start at 1 and pi at 1/k.
MixtureState init_state(const ChainData& data, const Hyperparams& hyper, RngStream& rng,
                        std::vector<std::string>* warnings = nullptr);

struct DensityGridSpec {
  // Unset bounds default to [min - sd, max + sd] of the fitted estimates
  // (sigma2 lower bound kept positive).
  std::optional<double> mu_lo, mu_hi, sigma2_lo, sigma2_hi;
  int mu_points = 100;
  int sigma2_points = 100;
};

struct DensityGrid {
  std::vector<double> mu;
  std::vector<double> sigma2;
  // values[s * mu.size() + i] = density at (mu[i], sigma2[s]), original scale.
  std::vector<double> values;
};

struct SamplerConfig {
  int n_iter = 5000;
  int n_burnin = 2000;
  double mh_step_alpha = 0.5;
  double mh_step_beta = 0.5;
  bool adapt_mh = true;
  std::optional<DensityGridSpec> density;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;

  void validate() const;
};

struct PosteriorSummary {
  std::vector<double> mu_hat;
  std::vector<double> sigma2_hat;
  std::vector<double> pi_sorted_mean;  // descending
  std::optional<DensityGrid> density;
  std::vector<double> acceptance_alpha;  // post burn-in, per component
  std::vector<double> acceptance_beta;
  std::int64_t n_kept = 0;
  std::uint64_t underflow_fallbacks = 0;
  Hyperparams hyper;
  std::vector<std::string> warnings;
};

/// Runs the chain on standardized data (hyper is on the standardized scale),
/// averages post-burn-in draws and maps them back to the original scale.
/// Known-variance inputs get their variances echoed back verbatim.
/// `observer`, when set, sees the (standardized) state after every sweep.
using Observer = std::function<void(int iteration, const MixtureState& state)>;
PosteriorSummary fit(const DataMatrix& data, const Hyperparams& hyper,
                     const SamplerConfig& config, const Observer& observer = {});

// elicit_for + fit.
PosteriorSummary fit_default(const DataMatrix& data, const SamplerConfig& config,
                             const HyperOverrides& overrides = {});

// Mixture density on the standardized scale at one point.
double mixture_density(std::span<const ComponentParams> components,
                       std::span<const double> pi, double mu, double sigma2);

/// Pools chains by weighting each summary with its n_kept.
PosteriorSummary merge(std::span<const PosteriorSummary> chains);

}  // namespace ebmix::dpmm
