#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ebmix/data.hpp"
#include "ebmix/dpmm.hpp"
#include "ebmix/rng.hpp"

namespace ebmix::sim {

// Examples 1-8: one observation per coordinate with known variance.
// Examples 9-14: n = 4 replications, variances unknown.
struct ExampleSpec {
  int id;
  VarianceMode mode;
  std::size_t n;
  bool uniform_errors;  // U(-sqrt 3, sqrt 3) instead of N(0, 1)
  std::string description;
};

ExampleSpec example_spec(int id);

/// One (mu, sigma^2) draw from the example's joint law.
std::pair<double, double> draw_pair(int id, RngStream& rng);

struct Generated {
  DataMatrix data;
  std::vector<double> mu;
  std::vector<double> sigma2;
};

Generated generate(int id, std::size_t q, RngStream& rng);

struct Estimate {
  std::vector<double> mu_hat;
  std::vector<double> sigma2_hat;
  std::vector<double> pi_sorted;  // DPMM only
};

/// Runs one named estimator on `data`. Baselines see v_j = sigma_j^2 / n
/// (known) or S_j^2 / n (unknown) and report S_j^2 as their variance
/// estimate; DPMM fits use `sampler` as given (seed and stream included).
/// `mu_true` is only read by the oracle.
Estimate apply_estimator(const std::string& name, const DataMatrix& data,
                         std::span<const double> mu_true, const dpmm::SamplerConfig& sampler,
                         const dpmm::HyperOverrides& overrides = {});

// FNV-1a of an estimator name, used to key its chain stream.
std::uint64_t name_key(const std::string& name);

// Estimator labels accepted by run_study: the baseline registry plus
// "NIG-DPMM" and the single-component "NIG-DPMM-1".
bool is_dpmm(const std::string& name);
std::vector<std::string> all_estimator_names();
// Throws ParameterError listing the registry on an unknown name.
void check_estimator_names(const std::vector<std::string>& names);

struct StudyConfig {
  int example = 1;
  std::vector<std::size_t> q_values{20, 100, 500};
  std::vector<std::string> estimators;
  int n_reps = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
  dpmm::SamplerConfig sampler;  // seed/stream are replaced per replication
  dpmm::HyperOverrides overrides;
};

// Outcome of one estimator on one replication.
struct RepRecord {
  double loss_mu = 0.0;      // q^{-1} sum (mu_hat - mu)^2
  double loss_sigma2 = 0.0;  // q^{-1} sum (sigma2_hat - sigma2)^2
  bool ok = false;
  std::string error;
  std::vector<double> pi_sorted;  // DPMM only
};

struct RiskRow {
  std::string estimator;
  std::size_t q;
  int n_ok;
  int n_failed;
  double mse_mu, se_mu;
  double mse_sigma2, se_sigma2;
};

struct RiskReport {
  int example;
  VarianceMode mode;
  std::size_t n;
  std::vector<std::size_t> q_values;
  std::vector<std::string> estimators;
  int n_reps;
  std::uint64_t seed;
  // records[e][qi][rep]
  std::vector<std::vector<std::vector<RepRecord>>> records;

  std::vector<RiskRow> rows() const;
  const RiskRow row(const std::string& estimator, std::size_t q) const;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Replication r at dimension q draws its data from stream
/// (seed, id(example, q, r)); a DPMM fit also keys its chain by the estimator
/// name. Results do not depend on `jobs`.
RiskReport run_study(const StudyConfig& config, const Progress& progress = {});

struct GammaSensitivity {
  std::vector<double> gammas;
  std::vector<RiskReport> reports;  // one per gamma, NIG-DPMM only
};

GammaSensitivity gamma_sensitivity(StudyConfig base, const std::vector<double>& gammas,
                                   const Progress& progress = {});

// Report writers.
void write_report_csv(std::ostream& out, const RiskReport& report);
nlohmann::ordered_json report_to_json(const RiskReport& report);
/// MSE-vs-q line chart, one polyline per estimator. `sigma2` selects the
/// variance-estimation metric.
void write_report_svg(std::ostream& out, const RiskReport& report, bool sigma2 = false);
/// Rows (gamma, q, rep, rank, pi) of the sorted-pi averages per replication.
void write_gamma_boxplot_csv(std::ostream& out, const GammaSensitivity& g);
nlohmann::ordered_json gamma_to_json(const GammaSensitivity& g);

}  // namespace ebmix::sim
