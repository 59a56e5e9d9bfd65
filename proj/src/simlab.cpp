#include "ebmix/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "ebmix/baselines.hpp"
#include "ebmix/distributions.hpp"
#include "ebmix/errors.hpp"

namespace ebmix::sim {

namespace {

double normal(RngStream& rng, double mean, double variance) {
  return draw_normal(rng, mean, variance);
}

std::pair<double, double> draw_nig(RngStream& rng, double m, double lambda, double alpha,
                                   double beta) {
  const double s2 = draw_inverse_gamma(rng, alpha, beta);
  return {normal(rng, m, s2 / lambda), s2};
}

}  // namespace

std::uint64_t name_key(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExampleSpec example_spec(int id) {
  static const char* desc[] = {
      "",
      "mu ~ N(0,1), sigma2 ~ U(0.1,1) independent",
      "mu ~ U(0,1), sigma2 ~ U(0.1,1) independent",
      "sigma2 ~ U(0.1,1), mu = sigma2",
      "1/sigma2 ~ chi2_10, mu = sigma2",
      "sigma2 in {0.1,0.5}; mu|0.1 ~ N(2,0.1), mu|0.5 ~ N(0,0.5)",
      "as 3 with uniform errors",
      "sigma2 ~ U(0.1,1), mu ~ 0.5 N(0,0.1) + 0.5 N(3,0.1)",
      "0.6 NIG(2,2,5,2) + 0.4 NIG(10,4,3,3)",
      "mu ~ N(0,3), sigma2 ~ IG(5,2)",
      "mu ~ N(0,3), sigma2 ~ G(9,3)",
      "0.95 NIG(2,2,5,2) + 0.05 NIG(10,4,3,3)",
      "mu ~ 0.5 U(1,2) + 0.5 U(4,5), sigma2/n ~ U(0.1,1)",
      "mu ~ N(3,1), sigma2|mu ~ U(max(mu-1,0.1), max(mu+1,1))",
      "mu ~ N(3,1), sigma2|mu ~ max(N(|mu|/3, (|mu|/3+1)^2), 0.1)",
  };
  if (id < 1 || id > 14) throw ParameterError("example id must be in 1..14");
  if (id <= 8) return {id, VarianceMode::known, 1, id == 6, desc[id]};
  return {id, VarianceMode::unknown, 4, false, desc[id]};
}

std::pair<double, double> draw_pair(int id, RngStream& rng) {
  switch (id) {
    case 1: {
      const double mu = normal(rng, 0.0, 1.0);
      return {mu, 0.1 + 0.9 * rng.uniform()};
    }
    case 2: {
      const double mu = rng.uniform();
      return {mu, 0.1 + 0.9 * rng.uniform()};
    }
    case 3:
    case 6: {
      const double s2 = 0.1 + 0.9 * rng.uniform();
      return {s2, s2};
    }
    case 4: {
      // chi^2_10 = Gamma(shape 5, rate 1/2)
      const double s2 = 1.0 / draw_gamma(rng, 5.0, 0.5);
      return {s2, s2};
    }
    case 5: {
      if (rng.uniform() < 0.5) return {normal(rng, 2.0, 0.1), 0.1};
      return {normal(rng, 0.0, 0.5), 0.5};
    }
    case 7: {
      const double s2 = 0.1 + 0.9 * rng.uniform();
      const double mu = rng.uniform() < 0.5 ? normal(rng, 0.0, 0.1) : normal(rng, 3.0, 0.1);
      return {mu, s2};
    }
    case 8:
    case 11: {
      const double w = id == 8 ? 0.6 : 0.95;
      if (rng.uniform() < w) return draw_nig(rng, 2.0, 2.0, 5.0, 2.0);
      return draw_nig(rng, 10.0, 4.0, 3.0, 3.0);
    }
    case 9: {
      const double mu = normal(rng, 0.0, 3.0);
      return {mu, draw_inverse_gamma(rng, 5.0, 2.0)};
    }
    case 10: {
      const double mu = normal(rng, 0.0, 3.0);
      return {mu, draw_gamma(rng, 9.0, 3.0)};
    }
    case 12: {
      const double mu = rng.uniform() < 0.5 ? 1.0 + rng.uniform() : 4.0 + rng.uniform();
      return {mu, 4.0 * (0.1 + 0.9 * rng.uniform())};
    }
    case 13: {
      const double mu = normal(rng, 3.0, 1.0);
      const double lo = std::max(mu - 1.0, 0.1);
      const double hi = std::max(mu + 1.0, 1.0);
      return {mu, lo + (hi - lo) * rng.uniform()};
    }
    case 14: {
      const double mu = normal(rng, 3.0, 1.0);
      const double sd = std::abs(mu) / 3.0 + 1.0;
      return {mu, std::max(normal(rng, std::abs(mu) / 3.0, sd * sd), 0.1)};
    }
    default:
      throw ParameterError("example id must be in 1..14");
  }
}

Generated generate(int id, std::size_t q, RngStream& rng) {
  const ExampleSpec spec = example_spec(id);
  if (q < 2) throw ParameterError("q must be at least 2");
  std::vector<double> mu(q), s2(q), values(q * spec.n);
  const double root3 = std::sqrt(3.0);
  for (std::size_t j = 0; j < q; ++j) {
    std::tie(mu[j], s2[j]) = draw_pair(id, rng);
    const double sd = std::sqrt(s2[j]);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const double eps =
          spec.uniform_errors ? root3 * (2.0 * rng.uniform() - 1.0) : rng.normal();
      values[j * spec.n + i] = mu[j] + sd * eps;
    }
  }
  if (spec.mode == VarianceMode::known)
    return {DataMatrix(1, q, std::move(values), s2), std::move(mu), std::move(s2)};
  return {DataMatrix(spec.n, q, std::move(values)), std::move(mu), std::move(s2)};
}

bool is_dpmm(const std::string& name) { return name == "NIG-DPMM" || name == "NIG-DPMM-1"; }

std::vector<std::string> all_estimator_names() {
  std::vector<std::string> out = baselines::registry_names();
  out.push_back("NIG-DPMM");
  out.push_back("NIG-DPMM-1");
  return out;
}

void check_estimator_names(const std::vector<std::string>& names) {
  if (names.empty()) throw ParameterError("no estimators requested");
  const auto all = all_estimator_names();
  for (const auto& n : names) {
    if (std::find(all.begin(), all.end(), n) != all.end()) continue;
    std::string list;
    for (const auto& a : all) list += (list.empty() ? "" : ", ") + a;
    throw ParameterError("unknown estimator '" + n + "'; available: " + list);
  }
}

namespace {

double mean_sq_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s / static_cast<double>(a.size());
}

}  // namespace

Estimate apply_estimator(const std::string& name, const DataMatrix& data,
                         std::span<const double> mu_true, const dpmm::SamplerConfig& sampler,
                         const dpmm::HyperOverrides& overrides) {
  Estimate out;
  if (is_dpmm(name)) {
    dpmm::HyperOverrides ov = overrides;
    if (name == "NIG-DPMM-1") ov.k = 1;
    auto fit = dpmm::fit_default(data, sampler, ov);
    out.mu_hat = std::move(fit.mu_hat);
    out.sigma2_hat = std::move(fit.sigma2_hat);
    out.pi_sorted = std::move(fit.pi_sorted_mean);
    return out;
  }
  const auto est = baselines::lookup(name);
  if (!est) throw ParameterError("unknown estimator '" + name + "'");
  const std::size_t q = data.q();
  const Summaries s = summarize(data);
  std::vector<double> v(q);
  if (data.mode() == VarianceMode::known) {
    for (std::size_t j = 0; j < q; ++j) v[j] = data.known_variances()[j] / data.n();
    out.sigma2_hat.assign(data.known_variances().begin(), data.known_variances().end());
  } else {
    for (std::size_t j = 0; j < q; ++j) v[j] = (*s.col_vars)[j] / data.n();
    out.sigma2_hat = *s.col_vars;
  }
  out.mu_hat = (*est)({s.col_means, v, mu_true});
  return out;
}


RiskReport run_study(const StudyConfig& cfg, const Progress& progress) {
  check_estimator_names(cfg.estimators);
  if (cfg.n_reps < 1) throw ParameterError("n_reps must be positive");
  if (cfg.q_values.empty()) throw ParameterError("no q values");
  const ExampleSpec spec = example_spec(cfg.example);
  RiskReport rep;
  rep.example = cfg.example;
  rep.mode = spec.mode;
  rep.n = spec.n;
  rep.q_values = cfg.q_values;
  rep.estimators = cfg.estimators;
  rep.n_reps = cfg.n_reps;
  rep.seed = cfg.seed;
  const std::size_t ne = cfg.estimators.size(), nq = cfg.q_values.size();
  const auto nr = static_cast<std::size_t>(cfg.n_reps);
  rep.records.assign(ne, std::vector<std::vector<RepRecord>>(nq, std::vector<RepRecord>(nr)));

  const std::size_t total = nq * nr;
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      const std::size_t qi = task / nr, r = task % nr;
      const std::size_t q = cfg.q_values[qi];
      RngStream data_rng(cfg.seed, derive_stream_id(static_cast<std::uint64_t>(cfg.example), q, r));
      const Generated g = generate(cfg.example, q, data_rng);
      for (std::size_t e = 0; e < ne; ++e) {
        const std::string& name = cfg.estimators[e];
        RepRecord rec;
        try {
          dpmm::SamplerConfig sc = cfg.sampler;
          sc.seed = cfg.seed;
          sc.stream = derive_stream_id(static_cast<std::uint64_t>(cfg.example), q, r,
                                       name_key(name));
          Estimate est = apply_estimator(name, g.data, g.mu, sc, cfg.overrides);
          rec.loss_mu = mean_sq_diff(est.mu_hat, g.mu);
          rec.loss_sigma2 = mean_sq_diff(est.sigma2_hat, g.sigma2);
          rec.pi_sorted = std::move(est.pi_sorted);
          rec.ok = std::isfinite(rec.loss_mu) && std::isfinite(rec.loss_sigma2);
          if (!rec.ok) rec.error = "non-finite loss";
        } catch (const std::exception& ex) {
          rec.ok = false;
          rec.error = ex.what();
        }
        rep.records[e][qi][r] = std::move(rec);
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rep;
}

std::vector<RiskRow> RiskReport::rows() const {
  std::vector<RiskRow> out;
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::size_t qi = 0; qi < q_values.size(); ++qi) {
      RiskRow row{estimators[e], q_values[qi], 0, 0, 0.0, 0.0, 0.0, 0.0};
      double s1 = 0.0, s2 = 0.0, t1 = 0.0, t2 = 0.0;
      for (const RepRecord& rec : records[e][qi]) {
        if (!rec.ok) {
          ++row.n_failed;
          continue;
        }
        ++row.n_ok;
        s1 += rec.loss_mu;
        s2 += rec.loss_mu * rec.loss_mu;
        t1 += rec.loss_sigma2;
        t2 += rec.loss_sigma2 * rec.loss_sigma2;
      }
      const double k = row.n_ok;
      if (k > 0) {
        row.mse_mu = s1 / k;
        row.mse_sigma2 = t1 / k;
      } else {
        row.mse_mu = row.mse_sigma2 = std::nan("");
      }
      if (k > 1) {
        row.se_mu = std::sqrt(std::max(0.0, (s2 - k * row.mse_mu * row.mse_mu) / (k - 1)) / k);
        row.se_sigma2 =
            std::sqrt(std::max(0.0, (t2 - k * row.mse_sigma2 * row.mse_sigma2) / (k - 1)) / k);
      }
      out.push_back(row);
    }
  }
  return out;
}

const RiskRow RiskReport::row(const std::string& estimator, std::size_t q) const {
  for (const RiskRow& r : rows())
    if (r.estimator == estimator && r.q == q) return r;
  throw ParameterError("no report row for " + estimator + " at q=" + std::to_string(q));
}

GammaSensitivity gamma_sensitivity(StudyConfig base, const std::vector<double>& gammas,
                                   const Progress& progress) {
  GammaSensitivity out;
  out.gammas = gammas;
  base.estimators = {"NIG-DPMM"};
  for (double g : gammas) {
    base.overrides.gamma = g;
    out.reports.push_back(run_study(base, progress));
  }
  return out;
}

}  // namespace ebmix::sim
