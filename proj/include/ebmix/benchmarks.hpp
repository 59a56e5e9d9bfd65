#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ebmix/data.hpp"
#include "ebmix/dpmm.hpp"

namespace ebmix::bench {

// ---- baseball ----

struct BaseballRecord {
  std::string player_id;
  std::int64_t h1 = 0, n1 = 0, h2 = 0, n2 = 0;
  bool pitcher = false;
};

/// Columns (player_id, H1, N1, H2, N2, is_pitcher); header optional.
/// Malformed rows raise DataError naming the line.
std::vector<BaseballRecord> read_baseball_csv(std::istream& in);
std::vector<BaseballRecord> read_baseball_csv_file(const std::string& path);

enum class Subset { all, pitchers, non_pitchers };
Subset parse_subset(const std::string& s);
std::string subset_name(Subset s);

// arcsin sqrt((h + 1/4) / (n + 1/2))
double arcsine_transform(std::int64_t hits, std::int64_t at_bats);

struct BaseballDataset {
  std::vector<std::string> ids;
  std::vector<double> x1;  // first-half transformed averages
  std::vector<double> v1;  // 1 / (4 N1)
  // Validation players (N2 >= 11), as positions into x1.
  std::vector<std::size_t> validation;
  std::vector<double> x2;
  std::vector<std::int64_t> n2;

  DataMatrix estimation_data() const;
};

/// Keeps players with N1 >= 11 (and the requested subset); validation
/// additionally needs N2 >= 11. Throws DataError if either set is empty.
BaseballDataset baseball_transform(const std::vector<BaseballRecord>& records,
                                   Subset subset = Subset::all);

/// [sum (X2 - mu_hat)^2 - sum 1/(4 N2)] / [sum (X2 - X1)^2 - sum 1/(4 N2)]
/// over the validation players.
double tse(std::span<const double> mu_hat, const BaseballDataset& d);

/// TSE per estimator (Oracle.XKB is not applicable and rejected).
std::map<std::string, double> baseball_tse(const BaseballDataset& d,
                                           const std::vector<std::string>& estimators,
                                           const dpmm::SamplerConfig& sampler,
                                           const dpmm::HyperOverrides& overrides = {});

/// Redraws H1 ~ HG(N1 + N2, H1 + H2, N1), H2 = total - H1 for every player.
std::vector<BaseballRecord> permute_hits(const std::vector<BaseballRecord>& records,
                                         RngStream& rng);

struct PermutationResult {
  std::map<std::string, double> mean_tse;
  std::map<std::string, double> se_tse;
  int n_perm = 0;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

PermutationResult baseball_permutations(const std::vector<BaseballRecord>& records,
                                        Subset subset, int n_perm,
                                        const std::vector<std::string>& estimators,
                                        const dpmm::SamplerConfig& sampler,
                                        const dpmm::HyperOverrides& overrides,
                                        std::uint64_t seed, int jobs,
                                        const Progress& progress = {});

// ---- prostate ----

// genes x subjects, row-major.
struct ProstateMatrix {
  std::size_t genes = 0;
  std::size_t subjects = 0;
  std::vector<double> values;
  std::vector<std::string> labels;

  double at(std::size_t g, std::size_t s) const { return values[g * subjects + s]; }
};

/// Reads a genes x subjects CSV with a header row of subject labels. A
/// leading non-numeric column (gene names) is dropped. Control columns are
/// those labelled "control"/"normal" (case-insensitive, prefix match); if no
/// label matches, the first `n_controls` columns are used.
ProstateMatrix read_prostate_csv(std::istream& in, std::size_t n_controls = 50);
ProstateMatrix read_prostate_csv_file(const std::string& path, std::size_t n_controls = 50);

struct ProstateTruth {
  std::vector<double> mu;      // row means over all subjects
  std::vector<double> sigma2;  // divisor = number of subjects
};
ProstateTruth prostate_truth(const ProstateMatrix& m);

struct ProstateRow {
  std::string estimator;
  double loss_mu, se_mu, loss_sigma2, se_sigma2;
  int n_ok, n_failed;
};

struct ProstateConfig {
  std::size_t n_rows = 500;
  std::size_t n_cols = 3;
  int n_reps = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
};

std::vector<ProstateRow> prostate_study(const ProstateMatrix& m, const ProstateConfig& cfg,
                                        const std::vector<std::string>& estimators,
                                        const dpmm::SamplerConfig& sampler,
                                        const dpmm::HyperOverrides& overrides = {},
                                        const Progress& progress = {});

}  // namespace ebmix::bench
