#pragma once

// Classical shrinkage estimators of a mean vector from column means xbar_j
// with (known or estimated) variances v_j = sigma_j^2 / n of those means.
// Every parametric estimator below has the form
//   mu_hat_j = (1 - b_j) xbar_j + b_j m.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ebmix::baselines {

std::vector<double> estimate_naive(std::span<const double> xbar);
std::vector<double> estimate_grand_mean(std::span<const double> xbar);

/// (1 - v (q - 2) / ||xbar||^2) xbar with a common variance v; the
/// multiplier is clamped at 0 when positive_part is set. A zero vector is
/// returned unchanged.
std::vector<double> estimate_js(std::span<const double> xbar, double v, bool positive_part);

/// Common multiplier 1 - (q - 2) / sum_j xbar_j^2 / v_j applied to all
/// coordinates (JS after rescaling each coordinate to unit variance).
std::vector<double> estimate_hetero_js(std::span<const double> xbar,
                                       std::span<const double> v, bool positive_part);

/// Positive-part heteroscedastic JS shrinking towards the precision-weighted
/// mean with q - 3 degrees of freedom.
std::vector<double> estimate_js_xkb(std::span<const double> xbar, std::span<const double> v);

enum class EbFit { mle, mom };

struct ShrinkageFit {
  std::vector<double> mu_hat;
  std::vector<double> b;
  double m = 0.0;
  double lambda = 0.0;  // prior variance; +inf means no shrinkage
  double objective = 0.0;
};

/// Normal-normal empirical Bayes: xbar_j ~ N(m, lambda + v_j) marginally.
/// MLE profiles m out and maximizes over lambda >= 0; MOM takes m = mean(xbar)
/// and lambda = max(0, var(xbar) - mean(v)).
ShrinkageFit estimate_normal_normal_eb(std::span<const double> xbar,
                                       std::span<const double> v, EbFit fit);

/// SURE of a shrinkage rule, averaged over coordinates:
///   q^{-1} sum_j [ v_j + b_j^2 (xbar_j - m)^2 - 2 b_j v_j ].
double sure_objective(std::span<const double> xbar, std::span<const double> v,
                      std::span<const double> b, double m);

/// Minimizes SURE over b_j = v_j / (lambda + v_j) and m (closed form given
/// lambda). When `fixed_m` is set m is held there instead.
ShrinkageFit estimate_sure_m(std::span<const double> xbar, std::span<const double> v,
                             std::optional<double> fixed_m = std::nullopt);

/// Best b for fixed m under 0 <= b_j <= 1, b non-decreasing in v_j (ties
/// share one value). Returned in the original coordinate order.
std::vector<double> sure_sm_b_given_m(std::span<const double> xbar,
                                      std::span<const double> v, double m);

/// Semiparametric SURE: minimizes over m as well (grid over the data range,
/// golden-section refinement, alternating closed-form m updates).
ShrinkageFit estimate_sure_sm(std::span<const double> xbar, std::span<const double> v);

/// Equal-count bins by v_j; within each bin, positive-part shrinkage towards
/// the bin mean. bins = 0 selects round(q^{1/3}).
std::vector<double> estimate_group_linear(std::span<const double> xbar,
                                          std::span<const double> v, int bins = 0);

/// Minimizes the true squared error over the SURE.M family; a benchmark
/// lower bound, not an estimator.
ShrinkageFit estimate_oracle(std::span<const double> xbar, std::span<const double> v,
                             std::span<const double> mu_true);

struct EstimatorInput {
  std::span<const double> xbar;
  std::span<const double> v;
  std::span<const double> mu_true;  // only read by the oracle
};

using MeanEstimator = std::function<std::vector<double>(const EstimatorInput&)>;

/// Registry keyed by report labels: "Naive", "GrandMean", "JS", "JS+", "HeteroJS",
/// "JS.XKB", "EBMLE.XKB", "EBMOM.XKB", "SURE.M.XKB", "SURE.SM.XKB", "GL.WMBZ",
/// "Oracle.XKB". "JS"/"JS+" use the average v as the common variance.
const std::vector<std::string>& registry_names();
std::optional<MeanEstimator> lookup(const std::string& name);
bool needs_truth(const std::string& name);

}  // namespace ebmix::baselines
