#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ebmix {

enum class VarianceMode { unknown, known };

/// n x q observation matrix, column-major: column j holds the n replications
/// of coordinate j. In known-variance mode each column also carries its
/// (per-observation) variance sigma_j^2.
class DataMatrix {
 public:
  DataMatrix(std::size_t n, std::size_t q, std::vector<double> column_major,
             std::optional<std::vector<double>> known_variances = std::nullopt);

  // rows[i][j] = X_ij.
  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);
  // Single observation per coordinate with known variances.
  static DataMatrix with_known_variances(std::vector<double> values,
                                         std::vector<double> variances);

  std::size_t n() const { return n_; }
  std::size_t q() const { return q_; }
  VarianceMode mode() const {
    return known_.has_value() ? VarianceMode::known : VarianceMode::unknown;
  }
  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * n_, n_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[j * n_ + i]; }
  std::span<const double> values() const { return values_; }
  std::span<const double> known_variances() const {
    return known_ ? std::span<const double>(*known_) : std::span<const double>();
  }

 private:
  std::size_t n_;
  std::size_t q_;
  std::vector<double> values_;
  std::optional<std::vector<double>> known_;
};

struct Summaries {
  std::vector<double> col_means;
  // Divisor n - 1; absent when n = 1.
  std::optional<std::vector<double>> col_vars;
  double grand_mean = 0.0;
  // Divisor nq - 1.
  double grand_var = 0.0;
  // Variance of the column means, divisor q - 1.
  double between_var = 0.0;
};

Summaries summarize(const DataMatrix& data);

// X' = (X - center) / scale, sigma2' = sigma2 / scale^2.
struct ScaleTransform {
  double center = 0.0;
  double scale = 1.0;
};

struct Standardized {
  DataMatrix data;
  ScaleTransform transform;
};

/// Centers by the grand mean and scales by the grand standard deviation.
/// Throws DataError when the grand variance is zero.
Standardized standardize(const DataMatrix& data);

// Inverse of `standardize` applied to the observations themselves.
DataMatrix restore(const DataMatrix& standardized, const ScaleTransform& transform);

struct MeanVarianceEstimates {
  std::vector<double> mu;
  std::vector<double> sigma2;
};

MeanVarianceEstimates back_transform(std::span<const double> mu,
                                     std::span<const double> sigma2,
                                     const ScaleTransform& transform);

// CSV ingestion. Header row optional, detected by a non-numeric field.
// Matrix form: one row per replication i, one column per coordinate j.
DataMatrix read_matrix_csv(std::istream& in);
DataMatrix read_matrix_csv_file(const std::string& path);
// Known-variance form: rows of (value, variance), one row per coordinate.
DataMatrix read_known_variance_csv(std::istream& in);
DataMatrix read_known_variance_csv_file(const std::string& path);

// Splits a CSV line on commas and trims surrounding whitespace and quotes.
std::vector<std::string> split_csv_line(const std::string& line);
// Strict numeric parse; nullopt if `field` is not a finite number.
std::optional<double> parse_double(const std::string& field);

}  // namespace ebmix
