#include "ebmix/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "ebmix/errors.hpp"
#include "ebmix/simd/kernels.hpp"

namespace ebmix {

DataMatrix::DataMatrix(std::size_t n, std::size_t q, std::vector<double> column_major,
                       std::optional<std::vector<double>> known_variances)
    : n_(n), q_(q), values_(std::move(column_major)), known_(std::move(known_variances)) {
  if (n_ < 1) throw DataError("data matrix needs at least one replication per coordinate");
  if (q_ < 2) throw DataError("data matrix needs at least two coordinates");
  if (values_.size() != n_ * q_) throw DataError("data matrix size does not match n x q");
  for (double v : values_)
    if (!std::isfinite(v)) throw DataError("data matrix contains a non-finite value");
  if (known_) {
    if (known_->size() != q_) throw DataError("known variances must have length q");
    for (double v : *known_)
      if (!(std::isfinite(v) && v > 0.0))
        throw DataError("known variances must be finite and positive");
  } else if (n_ < 2) {
    throw DataError("unknown-variance data needs n >= 2 replications per coordinate");
  }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("no data rows");
  const std::size_t n = rows.size();
  const std::size_t q = rows.front().size();
  std::vector<double> values(n * q);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != q) throw DataError("ragged data rows");
    for (std::size_t j = 0; j < q; ++j) values[j * n + i] = rows[i][j];
  }
  return DataMatrix(n, q, std::move(values));
}

DataMatrix DataMatrix::with_known_variances(std::vector<double> values,
                                            std::vector<double> variances) {
  const std::size_t q = values.size();
  return DataMatrix(1, q, std::move(values), std::move(variances));
}

Summaries summarize(const DataMatrix& data) {
  const std::size_t n = data.n();
  const std::size_t q = data.q();
  Summaries s;
  s.col_means.resize(q);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < q; ++j) s.col_means[j] = simd::sum(data.column(j)) * inv_n;
  if (n >= 2) {
    s.col_vars.emplace(q);
    for (std::size_t j = 0; j < q; ++j)
      (*s.col_vars)[j] =
          simd::sum_sq_dev(data.column(j), s.col_means[j]) / static_cast<double>(n - 1);
  }
  const double nq = static_cast<double>(n * q);
  s.grand_mean = simd::sum(data.values()) / nq;
  s.grand_var = simd::sum_sq_dev(data.values(), s.grand_mean) / (nq - 1.0);
  s.between_var =
      simd::sum_sq_dev(s.col_means, s.grand_mean) / static_cast<double>(q - 1);
  return s;
}

Standardized standardize(const DataMatrix& data) {
  const Summaries s = summarize(data);
  const double scale = std::sqrt(s.grand_var);
  if (!(scale > 0.0)) throw DataError("cannot standardize: grand variance is zero");
  std::vector<double> values(data.values().begin(), data.values().end());
  for (double& v : values) v = (v - s.grand_mean) / scale;
  std::optional<std::vector<double>> known;
  if (data.mode() == VarianceMode::known) {
    known.emplace(data.known_variances().begin(), data.known_variances().end());
    const double scale2 = scale * scale;
    for (double& v : *known) v /= scale2;
  }
  return {DataMatrix(data.n(), data.q(), std::move(values), std::move(known)),
          ScaleTransform{s.grand_mean, scale}};
}

DataMatrix restore(const DataMatrix& standardized, const ScaleTransform& t) {
  std::vector<double> values(standardized.values().begin(), standardized.values().end());
  for (double& v : values) v = t.scale * v + t.center;
  std::optional<std::vector<double>> known;
  if (standardized.mode() == VarianceMode::known) {
    known.emplace(standardized.known_variances().begin(),
                  standardized.known_variances().end());
    for (double& v : *known) v *= t.scale * t.scale;
  }
  return DataMatrix(standardized.n(), standardized.q(), std::move(values), std::move(known));
}

MeanVarianceEstimates back_transform(std::span<const double> mu,
                                     std::span<const double> sigma2,
                                     const ScaleTransform& t) {
  MeanVarianceEstimates out;
  out.mu.reserve(mu.size());
  out.sigma2.reserve(sigma2.size());
  for (double m : mu) out.mu.push_back(t.scale * m + t.center);
  for (double v : sigma2) out.sigma2.push_back(t.scale * t.scale * v);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r\"");
    const auto last = field.find_last_not_of(" \t\r\"");
    fields.push_back(first == std::string::npos ? std::string()
                                                : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<double> parse_double(const std::string& field) {
  if (field.empty()) return std::nullopt;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Parses numeric CSV rows, skipping an optional header.
std::vector<std::vector<double>> read_numeric_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw DataError("line " + std::to_string(line_no) + ": non-numeric field");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " fields, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no numeric rows in CSV input");
  return rows;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace

DataMatrix read_matrix_csv(std::istream& in) {
  return DataMatrix::from_rows(read_numeric_rows(in));
}

DataMatrix read_matrix_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_matrix_csv(in);
}

DataMatrix read_known_variance_csv(std::istream& in) {
  const auto rows = read_numeric_rows(in);
  if (rows.front().size() != 2)
    throw DataError("known-variance CSV needs exactly two columns (value, variance)");
  std::vector<double> values, variances;
  for (const auto& r : rows) {
    values.push_back(r[0]);
    variances.push_back(r[1]);
  }
  return DataMatrix::with_known_variances(std::move(values), std::move(variances));
}

DataMatrix read_known_variance_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_known_variance_csv(in);
}

}  // namespace ebmix
