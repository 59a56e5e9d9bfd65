#include "ebmix/benchmarks.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <thread>

#include "ebmix/distributions.hpp"
#include "ebmix/errors.hpp"
#include "ebmix/simlab.hpp"

namespace ebmix::bench {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<std::int64_t> parse_count(const std::string& f) {
  const auto v = parse_double(f);
  if (!v || *v < 0.0 || std::floor(*v) != *v) return std::nullopt;
  return static_cast<std::int64_t>(*v);
}

std::optional<bool> parse_flag(const std::string& f) {
  const std::string s = lower(f);
  if (s == "1" || s == "true" || s == "yes" || s == "t" || s == "y") return true;
  if (s == "0" || s == "false" || s == "no" || s == "f" || s == "n") return false;
  return std::nullopt;
}

// Parallel for over [0, total) with a shared progress callback.
void parallel_for(std::size_t total, int jobs, const std::function<void(std::size_t)>& body,
                  const Progress& progress) {
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(mu);
        progress(d, total);
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::vector<BaseballRecord> read_baseball_csv(std::istream& in) {
  std::vector<BaseballRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (f.size() != 6) {
      if (first) throw DataError(where + "expected 6 columns (player_id,H1,N1,H2,N2,is_pitcher)");
      throw DataError(where + "expected 6 fields, got " + std::to_string(f.size()));
    }
    const auto h1 = parse_count(f[1]), n1 = parse_count(f[2]), h2 = parse_count(f[3]),
               n2 = parse_count(f[4]);
    const auto p = parse_flag(f[5]);
    if (!h1 || !n1 || !h2 || !n2 || !p) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw DataError(where + "hits/at-bats must be non-negative integers and is_pitcher 0/1");
    }
    first = false;
    if (*h1 > *n1 || *h2 > *n2) throw DataError(where + "hits exceed at-bats");
    out.push_back({f[0], *h1, *n1, *h2, *n2, *p});
  }
  if (out.empty()) throw DataError("no baseball records");
  return out;
}

std::vector<BaseballRecord> read_baseball_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_baseball_csv(in);
}

Subset parse_subset(const std::string& s) {
  const std::string l = lower(s);
  if (l == "all") return Subset::all;
  if (l == "pitchers") return Subset::pitchers;
  if (l == "non-pitchers" || l == "nonpitchers" || l == "non_pitchers")
    return Subset::non_pitchers;
  throw ParameterError("subset must be all, pitchers or non-pitchers");
}

std::string subset_name(Subset s) {
  switch (s) {
    case Subset::pitchers: return "pitchers";
    case Subset::non_pitchers: return "non-pitchers";
    default: return "all";
  }
}

double arcsine_transform(std::int64_t hits, std::int64_t at_bats) {
  return std::asin(std::sqrt((static_cast<double>(hits) + 0.25) /
                             (static_cast<double>(at_bats) + 0.5)));
}

DataMatrix BaseballDataset::estimation_data() const {
  return DataMatrix::with_known_variances(x1, v1);
}

BaseballDataset baseball_transform(const std::vector<BaseballRecord>& records, Subset subset) {
  BaseballDataset d;
  for (const auto& r : records) {
    if (subset == Subset::pitchers && !r.pitcher) continue;
    if (subset == Subset::non_pitchers && r.pitcher) continue;
    if (r.n1 < 11) continue;
    const std::size_t pos = d.x1.size();
    d.ids.push_back(r.player_id);
    d.x1.push_back(arcsine_transform(r.h1, r.n1));
    d.v1.push_back(1.0 / (4.0 * static_cast<double>(r.n1)));
    if (r.n2 >= 11) {
      d.validation.push_back(pos);
      d.x2.push_back(arcsine_transform(r.h2, r.n2));
      d.n2.push_back(r.n2);
    }
  }
  if (d.x1.size() < 2) throw DataError("fewer than two players with at least 11 first-half at-bats");
  if (d.validation.empty()) throw DataError("no validation players with at least 11 second-half at-bats");
  return d;
}

double tse(std::span<const double> mu_hat, const BaseballDataset& d) {
  if (mu_hat.size() != d.x1.size()) throw ParameterError("estimate length mismatch");
  double num = 0.0, den = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < d.validation.size(); ++i) {
    const std::size_t j = d.validation[i];
    num += (d.x2[i] - mu_hat[j]) * (d.x2[i] - mu_hat[j]);
    den += (d.x2[i] - d.x1[j]) * (d.x2[i] - d.x1[j]);
    noise += 1.0 / (4.0 * static_cast<double>(d.n2[i]));
  }
  if (den - noise == 0.0) throw DataError("TSE denominator is zero");
  return (num - noise) / (den - noise);
}

std::map<std::string, double> baseball_tse(const BaseballDataset& d,
                                           const std::vector<std::string>& estimators,
                                           const dpmm::SamplerConfig& sampler,
                                           const dpmm::HyperOverrides& overrides) {
  sim::check_estimator_names(estimators);
  const DataMatrix data = d.estimation_data();
  std::map<std::string, double> out;
  for (const auto& name : estimators) {
    if (name == "Oracle.XKB") throw ParameterError("Oracle.XKB needs the true means");
    dpmm::SamplerConfig sc = sampler;
    sc.stream = derive_stream_id(sampler.stream, sim::name_key(name));
    const auto est = sim::apply_estimator(name, data, {}, sc, overrides);
    out[name] = tse(est.mu_hat, d);
  }
  return out;
}

std::vector<BaseballRecord> permute_hits(const std::vector<BaseballRecord>& records,
                                         RngStream& rng) {
  std::vector<BaseballRecord> out = records;
  for (auto& r : out) {
    const std::int64_t hits = r.h1 + r.h2;
    r.h1 = draw_hypergeometric(rng, r.n1 + r.n2, hits, r.n1);
    r.h2 = hits - r.h1;
  }
  return out;
}

PermutationResult baseball_permutations(const std::vector<BaseballRecord>& records,
                                        Subset subset, int n_perm,
                                        const std::vector<std::string>& estimators,
                                        const dpmm::SamplerConfig& sampler,
                                        const dpmm::HyperOverrides& overrides,
                                        std::uint64_t seed, int jobs,
                                        const Progress& progress) {
  if (n_perm < 1) throw ParameterError("need at least one permutation");
  sim::check_estimator_names(estimators);
  const auto np = static_cast<std::size_t>(n_perm);
  std::vector<std::map<std::string, double>> per(np);
  parallel_for(
      np, jobs,
      [&](std::size_t p) {
        RngStream rng(seed, derive_stream_id(0xBA5EBA11ULL, p));
        const auto permuted = permute_hits(records, rng);
        const BaseballDataset d = baseball_transform(permuted, subset);
        dpmm::SamplerConfig sc = sampler;
        sc.seed = seed;
        sc.stream = derive_stream_id(0xBA5EBA11ULL, p, 1);
        per[p] = baseball_tse(d, estimators, sc, overrides);
      },
      progress);
  PermutationResult res;
  res.n_perm = n_perm;
  for (const auto& name : estimators) {
    std::vector<double> v;
    for (const auto& m : per) v.push_back(m.at(name));
    res.mean_tse[name] = mean_of(v);
    res.se_tse[name] = se_of(v);
  }
  return res;
}

ProstateMatrix read_prostate_csv(std::istream& in, std::size_t n_controls) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  bool drop_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = split_csv_line(line);
    if (header.empty() && rows.empty()) {
      header = f;
      continue;
    }
    if (rows.empty()) drop_first = !parse_double(f.front()).has_value();
    if (drop_first) f.erase(f.begin());
    std::vector<double> row;
    for (const auto& x : f) {
      const auto v = parse_double(x);
      if (!v) throw DataError("line " + std::to_string(line_no) + ": non-numeric expression value");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " values, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no expression rows");
  const std::size_t width = rows.front().size();
  // Header may or may not have a label over the gene-name column.
  if (header.size() == width + 1) header.erase(header.begin());
  if (header.size() != width) header.assign(width, "");

  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string l = lower(header[c]);
    if (l.rfind("control", 0) == 0 || l.rfind("normal", 0) == 0) cols.push_back(c);
  }
  if (cols.empty()) {
    if (width < n_controls)
      throw DataError("expected at least " + std::to_string(n_controls) + " subject columns");
    cols.resize(n_controls);
    std::iota(cols.begin(), cols.end(), 0);
  }
  if (cols.size() < 2) throw DataError("need at least two control columns");
  ProstateMatrix m;
  m.genes = rows.size();
  m.subjects = cols.size();
  m.values.reserve(m.genes * m.subjects);
  for (const auto& r : rows)
    for (std::size_t c : cols) m.values.push_back(r[c]);
  for (std::size_t c : cols) m.labels.push_back(header[c]);
  return m;
}

ProstateMatrix read_prostate_csv_file(const std::string& path, std::size_t n_controls) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open " + path +
                    "; the prostate data (50 controls x 6033 genes) can be downloaded from "
                    "https://statweb.stanford.edu/~ckirby/brad/LSI/datasets-and-programs/data/");
  return read_prostate_csv(in, n_controls);
}

ProstateTruth prostate_truth(const ProstateMatrix& m) {
  ProstateTruth t;
  t.mu.resize(m.genes);
  t.sigma2.resize(m.genes);
  const double n = static_cast<double>(m.subjects);
  for (std::size_t g = 0; g < m.genes; ++g) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.subjects; ++c) s += m.at(g, c);
    t.mu[g] = s / n;
    double ss = 0.0;
    for (std::size_t c = 0; c < m.subjects; ++c) ss += (m.at(g, c) - t.mu[g]) * (m.at(g, c) - t.mu[g]);
    t.sigma2[g] = ss / n;
  }
  return t;
}

namespace {

// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  return idx;
}

}  // namespace

std::vector<ProstateRow> prostate_study(const ProstateMatrix& m, const ProstateConfig& cfg,
                                        const std::vector<std::string>& estimators,
                                        const dpmm::SamplerConfig& sampler,
                                        const dpmm::HyperOverrides& overrides,
                                        const Progress& progress) {
  sim::check_estimator_names(estimators);
  if (cfg.n_cols < 2 || cfg.n_cols > m.subjects)
    throw ParameterError("prostate: need 2 <= columns <= number of subjects");
  if (cfg.n_rows < 2 || cfg.n_rows > m.genes)
    throw ParameterError("prostate: need 2 <= rows <= number of genes");
  if (cfg.n_reps < 1) throw ParameterError("prostate: need at least one replication");
  const ProstateTruth truth = prostate_truth(m);
  const std::size_t ne = estimators.size();
  const auto nr = static_cast<std::size_t>(cfg.n_reps);
  std::vector<std::vector<double>> lmu(ne, std::vector<double>(nr, NAN)),
      ls2(ne, std::vector<double>(nr, NAN));

  parallel_for(
      nr, cfg.jobs,
      [&](std::size_t r) {
        RngStream rng(cfg.seed, derive_stream_id(0x9057A7EULL, r));
        const auto rows = sample_without_replacement(m.genes, cfg.n_rows, rng);
        const auto cols = sample_without_replacement(m.subjects, cfg.n_cols, rng);
        std::vector<double> values(cfg.n_rows * cfg.n_cols);
        std::vector<double> mu(cfg.n_rows), s2(cfg.n_rows);
        for (std::size_t j = 0; j < cfg.n_rows; ++j) {
          for (std::size_t i = 0; i < cfg.n_cols; ++i)
            values[j * cfg.n_cols + i] = m.at(rows[j], cols[i]);
          mu[j] = truth.mu[rows[j]];
          s2[j] = truth.sigma2[rows[j]];
        }
        const DataMatrix data(cfg.n_cols, cfg.n_rows, std::move(values));
        for (std::size_t e = 0; e < ne; ++e) {
          try {
            dpmm::SamplerConfig sc = sampler;
            sc.seed = cfg.seed;
            sc.stream = derive_stream_id(0x9057A7EULL, r, sim::name_key(estimators[e]));
            const auto est = sim::apply_estimator(estimators[e], data, mu, sc, overrides);
            double a = 0.0, b = 0.0;
            for (std::size_t j = 0; j < cfg.n_rows; ++j) {
              a += (est.mu_hat[j] - mu[j]) * (est.mu_hat[j] - mu[j]);
              b += (est.sigma2_hat[j] - s2[j]) * (est.sigma2_hat[j] - s2[j]);
            }
            lmu[e][r] = a / static_cast<double>(cfg.n_rows);
            ls2[e][r] = b / static_cast<double>(cfg.n_rows);
          } catch (const std::exception&) {
            // left as NaN and counted as a failure
          }
        }
      },
      progress);

  std::vector<ProstateRow> out;
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> a, b;
    for (std::size_t r = 0; r < nr; ++r)
      if (std::isfinite(lmu[e][r]) && std::isfinite(ls2[e][r])) {
        a.push_back(lmu[e][r]);
        b.push_back(ls2[e][r]);
      }
    ProstateRow row{estimators[e], NAN, NAN, NAN, NAN, static_cast<int>(a.size()),
                    static_cast<int>(nr - a.size())};
    if (!a.empty()) {
      row.loss_mu = mean_of(a);
      row.se_mu = se_of(a);
      row.loss_sigma2 = mean_of(b);
      row.se_sigma2 = se_of(b);
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace ebmix::bench
