#include "ebmix/dpmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ebmix/distributions.hpp"
#include "ebmix/kmeans.hpp"
#include "ebmix/simd/kernels.hpp"
#include "ebmix/special.hpp"

namespace ebmix::dpmm {

namespace {

constexpr double kTargetAcceptance = 0.35;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

double sigma2_of(const ChainData& data, const MixtureState& state, std::size_t j) {
  return data.known() ? data.known_sigma2[j] : state.sigma2[j];
}

}  // namespace

void Hyperparams::validate() const {
  if (!std::isfinite(m0)) throw ParameterError("m0 must be finite");
  if (!positive(zeta2)) throw ParameterError("zeta2 must be positive");
  if (!positive(a_lambda) || !positive(b_lambda))
    throw ParameterError("lambda prior shape and rate must be positive");
  if (!positive(a_alpha) || !positive(b_alpha))
    throw ParameterError("alpha prior shape and rate must be positive");
  if (!positive(a_beta) || !positive(b_beta))
    throw ParameterError("beta prior shape and rate must be positive");
  if (!positive(gamma)) throw ParameterError("gamma must be positive");
  if (k < 1) throw ParameterError("truncation level k must be at least 1");
}

void SamplerConfig::validate() const {
  if (n_iter < 1) throw ParameterError("n_iter must be positive");
  if (n_burnin < 0 || n_burnin >= n_iter)
    throw ParameterError("burn-in must be non-negative and below n_iter");
  if (!positive(mh_step_alpha) || !positive(mh_step_beta))
    throw ParameterError("MH step sizes must be positive");
  if (density) {
    if (density->mu_points < 2 || density->sigma2_points < 2)
      throw ParameterError("density grid needs at least 2 points per axis");
    if (density->sigma2_lo && !(*density->sigma2_lo > 0.0))
      throw ParameterError("density grid sigma2 range must be positive");
  }
}

PrecisionMoments precision_moments(std::span<const double> variances) {
  const std::size_t q = variances.size();
  if (q < 2) throw ElicitationError("precision moments need at least two variances");
  std::vector<double> p(q);
  for (std::size_t j = 0; j < q; ++j) p[j] = 1.0 / variances[j];
  PrecisionMoments out;
  out.mean = simd::sum(p) / static_cast<double>(q);
  out.variance = simd::sum_sq_dev(p, out.mean) / static_cast<double>(q - 1);
  return out;
}

Hyperparams elicit_hyperparams(const Summaries& s, VarianceMode mode,
                               const HyperOverrides& o,
                               std::optional<PrecisionMoments> precisions) {
  Hyperparams h;
  if (!(s.grand_var > 0.0) || !std::isfinite(s.grand_var))
    throw ElicitationError("grand variance must be positive");
  // Standardized data has grand mean 0 up to rounding; snap the residue.
  h.m0 = std::abs(s.grand_mean) < 1e-10 ? 0.0 : s.grand_mean;
  h.zeta2 = s.between_var / s.grand_var;
  if (mode == VarianceMode::known) {
    if (!precisions) throw ElicitationError("known-variance mode needs precision moments");
    const double mean = precisions->mean;
    const double var = precisions->variance;
    if (!positive(mean)) throw ElicitationError("mean precision must be positive");
    // Equal variances carry no spread information; keep unit rates.
    if (var > 0.0) {
      h.b_alpha = var / (mean * mean);
      h.b_beta = var / mean;
    }
  }
  if (o.m0) h.m0 = *o.m0;
  if (o.zeta2) h.zeta2 = *o.zeta2;
  if (o.a_lambda) h.a_lambda = *o.a_lambda;
  if (o.b_lambda) h.b_lambda = *o.b_lambda;
  if (o.a_alpha) h.a_alpha = *o.a_alpha;
  if (o.b_alpha) h.b_alpha = *o.b_alpha;
  if (o.a_beta) h.a_beta = *o.a_beta;
  if (o.b_beta) h.b_beta = *o.b_beta;
  if (o.gamma) h.gamma = *o.gamma;
  if (o.k) h.k = *o.k;
  if (!positive(h.zeta2))
    throw ElicitationError("column means have zero spread; zeta2 cannot be elicited");
  h.validate();
  return h;
}

Hyperparams elicit_for(const DataMatrix& data, const HyperOverrides& overrides) {
  const Standardized st = standardize(data);
  const Summaries s = summarize(st.data);
  std::optional<PrecisionMoments> pm;
  if (st.data.mode() == VarianceMode::known)
    pm = precision_moments(st.data.known_variances());
  return elicit_hyperparams(s, st.data.mode(), overrides, pm);
}

ChainData ChainData::from(const DataMatrix& data) {
  ChainData c;
  const std::size_t q = data.q();
  c.n = data.n();
  c.xbar.resize(q);
  c.ss.resize(q);
  const double inv_n = 1.0 / static_cast<double>(c.n);
  for (std::size_t j = 0; j < q; ++j) {
    c.xbar[j] = simd::sum(data.column(j)) * inv_n;
    c.ss[j] = simd::sum_sq_dev(data.column(j), c.xbar[j]);
  }
  if (data.mode() == VarianceMode::known) {
    c.n = 1;
    c.known_sigma2.assign(data.known_variances().begin(), data.known_variances().end());
    // Known-variance data may still carry n > 1 replications; the sampler
    // treats the column mean as the single observation.
    if (data.n() > 1) {
      for (auto& v : c.known_sigma2) v /= static_cast<double>(data.n());
      std::fill(c.ss.begin(), c.ss.end(), 0.0);
    }
  }
  return c;
}

MhTuning::MhTuning(int k, double step_alpha, double step_beta)
    : log_step_alpha(static_cast<std::size_t>(k), step_alpha),
      log_step_beta(static_cast<std::size_t>(k), step_beta),
      accepted_alpha(static_cast<std::size_t>(k), 0),
      accepted_beta(static_cast<std::size_t>(k), 0),
      attempted(static_cast<std::size_t>(k), 0) {}

void MhTuning::reset_counts() {
  std::fill(accepted_alpha.begin(), accepted_alpha.end(), 0);
  std::fill(accepted_beta.begin(), accepted_beta.end(), 0);
  std::fill(attempted.begin(), attempted.end(), 0);
}

ClusterStats cluster_stats(const MixtureState& state) {
  const auto k = static_cast<std::size_t>(state.k());
  ClusterStats cs;
  cs.count.assign(k, 0.0);
  cs.sum_inv_s2.assign(k, 0.0);
  cs.sum_mu_inv_s2.assign(k, 0.0);
  cs.sum_log_s2.assign(k, 0.0);
  for (std::size_t j = 0; j < state.z.size(); ++j) {
    const auto r = static_cast<std::size_t>(state.z[j]);
    const double inv = 1.0 / state.sigma2[j];
    cs.count[r] += 1.0;
    cs.sum_inv_s2[r] += inv;
    cs.sum_mu_inv_s2[r] += state.mu[j] * inv;
    cs.sum_log_s2[r] += std::log(state.sigma2[j]);
  }
  return cs;
}

NormalParams mu_conditional(const MixtureState& state, const ChainData& data,
                            std::size_t j) {
  const ComponentParams& c = state.components[static_cast<std::size_t>(state.z[j])];
  const double n = static_cast<double>(data.n);
  const double denom = n + c.lambda;
  return {(n * data.xbar[j] + c.m * c.lambda) / denom, sigma2_of(data, state, j) / denom};
}

ShapeRate sigma2_conditional(const MixtureState& state, const ChainData& data,
                             std::size_t j) {
  const ComponentParams& c = state.components[static_cast<std::size_t>(state.z[j])];
  const double n = static_cast<double>(data.n);
  const double dx = data.xbar[j] - state.mu[j];
  const double dm = state.mu[j] - c.m;
  // sum_i (X_ij - mu_j)^2 = ss_j + n (xbar_j - mu_j)^2
  const double rate = 0.5 * (data.ss[j] + n * dx * dx) + 0.5 * c.lambda * dm * dm + c.beta;
  return {0.5 * (n + 1.0) + c.alpha, rate};
}

std::vector<double> z_probabilities(const MixtureState& state, std::size_t j) {
  const auto k = static_cast<std::size_t>(state.k());
  std::vector<double> w(k);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < k; ++r) {
    const ComponentParams& c = state.components[r];
    w[r] = std::log(state.pi[r]) +
           log_nig_pdf(state.mu[j], state.sigma2[j], c.m, c.lambda, c.alpha, c.beta);
    top = std::max(top, w[r]);
  }
  if (!std::isfinite(top)) return std::vector<double>(k, 1.0 / static_cast<double>(k));
  double total = 0.0;
  for (double& v : w) total += (v = std::exp(v - top));
  for (double& v : w) v /= total;
  return w;
}

NormalParams m_conditional(const MixtureState& state, const Hyperparams& hyper, int r) {
  double sum_inv = 0.0, sum_mu_inv = 0.0;
  for (std::size_t j = 0; j < state.z.size(); ++j) {
    if (state.z[j] != r) continue;
    const double inv = 1.0 / state.sigma2[j];
    sum_inv += inv;
    sum_mu_inv += state.mu[j] * inv;
  }
  const double lambda = state.components[static_cast<std::size_t>(r)].lambda;
  const double prec = 1.0 / hyper.zeta2 + lambda * sum_inv;
  return {(hyper.m0 / hyper.zeta2 + lambda * sum_mu_inv) / prec, 1.0 / prec};
}

ShapeRate lambda_conditional(const MixtureState& state, const Hyperparams& hyper, int r) {
  const double m = state.components[static_cast<std::size_t>(r)].m;
  double count = 0.0, quad = 0.0;
  for (std::size_t j = 0; j < state.z.size(); ++j) {
    if (state.z[j] != r) continue;
    const double d = state.mu[j] - m;
    count += 1.0;
    quad += d * d / state.sigma2[j];
  }
  return {0.5 * count + hyper.a_lambda, 0.5 * quad + hyper.b_lambda};
}

std::vector<double> pi_conditional_weights(const MixtureState& state,
                                           const Hyperparams& hyper) {
  const auto k = static_cast<std::size_t>(state.k());
  std::vector<double> w(k, hyper.gamma / static_cast<double>(k));
  for (int z : state.z) w[static_cast<std::size_t>(z)] += 1.0;
  return w;
}

double log_target_alpha(double alpha, double beta, double count, double sum_log_s2,
                        double /*sum_inv_s2*/, const Hyperparams& hyper) {
  if (!(alpha > 0.0)) return -std::numeric_limits<double>::infinity();
  // Gamma(a_alpha, b_alpha) prior times prod IG(s2_j | alpha, beta), alpha terms only.
  return (hyper.a_alpha - 1.0) * std::log(alpha) - hyper.b_alpha * alpha +
         count * (alpha * std::log(beta) - log_gamma_fn(alpha)) - alpha * sum_log_s2;
}

double log_target_beta(double beta, double alpha, double count, double sum_inv_s2,
                       const Hyperparams& hyper) {
  if (!(beta > 0.0)) return -std::numeric_limits<double>::infinity();
  return (hyper.a_beta - 1.0) * std::log(beta) - hyper.b_beta * beta +
         count * alpha * std::log(beta) - beta * sum_inv_s2;
}

void step_mu(MixtureState& state, const ChainData& data, RngStream& rng) {
  for (std::size_t j = 0; j < data.q(); ++j) {
    const NormalParams p = mu_conditional(state, data, j);
    state.mu[j] = p.mean + std::sqrt(p.variance) * rng.normal();
  }
}

void step_sigma2(MixtureState& state, const ChainData& data, RngStream& rng) {
  if (data.known()) return;
  for (std::size_t j = 0; j < data.q(); ++j) {
    const ShapeRate p = sigma2_conditional(state, data, j);
    state.sigma2[j] = draw_inverse_gamma(rng, p.shape, p.rate);
  }
}

void step_z(MixtureState& state, RngStream& rng, Workspace& ws) {
  const std::size_t q = state.mu.size();
  const auto k = static_cast<std::size_t>(state.k());
  ws.log_s2.resize(q);
  ws.inv_s2.resize(q);
  ws.weights.resize(k * q);
  for (std::size_t j = 0; j < q; ++j) {
    ws.log_s2[j] = std::log(state.sigma2[j]);
    ws.inv_s2[j] = 1.0 / state.sigma2[j];
  }
  // weights[r * q + j] = log pi_r + log NIG(mu_j, s2_j | theta_r)
  for (std::size_t r = 0; r < k; ++r) {
    const ComponentParams& c = state.components[r];
    std::span<double> row(ws.weights.data() + r * q, q);
    simd::nig_log_weights(state.mu, ws.log_s2, ws.inv_s2,
                          simd::make_nig_terms(c.m, c.lambda, c.alpha, c.beta), row);
    const double lp = std::log(state.pi[r]);
    for (double& v : row) v += lp;
  }
  std::vector<double> top(q, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t j = 0; j < q; ++j) top[j] = std::max(top[j], ws.weights[r * q + j]);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t j = 0; j < q; ++j) {
      double& v = ws.weights[r * q + j];
      v = std::isfinite(top[j]) ? v - top[j] : 0.0;
    }
  simd::exp_inplace(ws.weights);
  for (std::size_t j = 0; j < q; ++j) {
    if (!std::isfinite(top[j])) {
      ++ws.underflow_fallbacks;
      state.z[j] = static_cast<int>(rng.below(k));
      continue;
    }
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r) total += ws.weights[r * q + j];
    double u = rng.uniform() * total;
    std::size_t pick = k - 1;
    for (std::size_t r = 0; r < k; ++r) {
      const double w = ws.weights[r * q + j];
      if (u < w) {
        pick = r;
        break;
      }
      u -= w;
    }
    // Rounding can leave u past the last positive weight.
    while (ws.weights[pick * q + j] == 0.0 && pick > 0) --pick;
    state.z[j] = static_cast<int>(pick);
  }
}

void step_m(MixtureState& state, const Hyperparams& hyper, RngStream& rng) {
  const ClusterStats cs = cluster_stats(state);
  for (std::size_t r = 0; r < state.components.size(); ++r) {
    ComponentParams& c = state.components[r];
    const double prec = 1.0 / hyper.zeta2 + c.lambda * cs.sum_inv_s2[r];
    const double mean = (hyper.m0 / hyper.zeta2 + c.lambda * cs.sum_mu_inv_s2[r]) / prec;
    c.m = mean + std::sqrt(1.0 / prec) * rng.normal();
  }
}

void step_lambda(MixtureState& state, const Hyperparams& hyper, RngStream& rng) {
  const auto k = state.components.size();
  std::vector<double> count(k, 0.0), quad(k, 0.0);
  for (std::size_t j = 0; j < state.z.size(); ++j) {
    const auto r = static_cast<std::size_t>(state.z[j]);
    const double d = state.mu[j] - state.components[r].m;
    count[r] += 1.0;
    quad[r] += d * d / state.sigma2[j];
  }
  for (std::size_t r = 0; r < k; ++r)
    state.components[r].lambda =
        draw_gamma(rng, 0.5 * count[r] + hyper.a_lambda, 0.5 * quad[r] + hyper.b_lambda);
}

void step_alpha_beta(MixtureState& state, const Hyperparams& hyper, RngStream& rng,
                     MhTuning& tuning) {
  const ClusterStats cs = cluster_stats(state);
  for (std::size_t r = 0; r < state.components.size(); ++r) {
    ComponentParams& c = state.components[r];
    const double cnt = cs.count[r];
    const auto a = mh_log_scale_step(
        c.alpha,
        [&](double x) {
          return log_target_alpha(x, c.beta, cnt, cs.sum_log_s2[r], cs.sum_inv_s2[r], hyper);
        },
        tuning.log_step_alpha[r], rng);
    c.alpha = a.value;
    const auto b = mh_log_scale_step(
        c.beta,
        [&](double x) { return log_target_beta(x, c.alpha, cnt, cs.sum_inv_s2[r], hyper); },
        tuning.log_step_beta[r], rng);
    c.beta = b.value;
    tuning.accepted_alpha[r] += a.accepted;
    tuning.accepted_beta[r] += b.accepted;
    tuning.attempted[r] += 1;
  }
}

void step_pi(MixtureState& state, const Hyperparams& hyper, RngStream& rng) {
  const std::vector<double> w = pi_conditional_weights(state, hyper);
  draw_dirichlet(rng, w, state.pi);
}

void gibbs_sweep(MixtureState& state, const ChainData& data, const Hyperparams& hyper,
                 RngStream& rng, MhTuning& tuning, Workspace& ws,
                 std::optional<int> adapt_iteration) {
  step_mu(state, data, rng);
  step_sigma2(state, data, rng);
  step_z(state, rng, ws);
  step_m(state, hyper, rng);
  step_lambda(state, hyper, rng);
  const std::vector<std::uint64_t> before_a = tuning.accepted_alpha;
  const std::vector<std::uint64_t> before_b = tuning.accepted_beta;
  step_alpha_beta(state, hyper, rng, tuning);
  if (adapt_iteration) {
    const double eta = std::pow(static_cast<double>(*adapt_iteration) + 1.0, -0.6);
    auto nudge = [&](double& step, bool accepted) {
      step *= std::exp(eta * ((accepted ? 1.0 : 0.0) - kTargetAcceptance));
      step = std::clamp(step, 1e-3, 20.0);
    };
    for (std::size_t r = 0; r < state.components.size(); ++r) {
      nudge(tuning.log_step_alpha[r], tuning.accepted_alpha[r] != before_a[r]);
      nudge(tuning.log_step_beta[r], tuning.accepted_beta[r] != before_b[r]);
    }
  }
  step_pi(state, hyper, rng);
}

MixtureState init_state(const ChainData& data, const Hyperparams& hyper, RngStream& rng,
                        std::vector<std::string>* warnings) {
  const std::size_t q = data.q();
  int k = hyper.k;
  if (static_cast<std::size_t>(k) > q) {
    if (warnings)
      warnings->push_back("truncation level k=" + std::to_string(k) +
                          " exceeds q; using k=" + std::to_string(q));
    k = static_cast<int>(q);
  }
  MixtureState st;
  st.mu = data.xbar;
  st.sigma2.resize(q);
  if (data.known()) {
    st.sigma2 = data.known_sigma2;
  } else {
    const double denom = static_cast<double>(data.n - 1);
    double pos_sum = 0.0, pos_n = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      st.sigma2[j] = data.ss[j] / denom;
      if (st.sigma2[j] > 0.0) {
        pos_sum += st.sigma2[j];
        pos_n += 1.0;
      }
    }
    // Constant columns give S^2 = 0, which is outside the support.
    const double floor = pos_n > 0.0 ? 1e-6 * pos_sum / pos_n : 1e-6;
    for (double& v : st.sigma2) v = std::max(v, floor);
  }
  std::vector<Point2> pts(q);
  for (std::size_t j = 0; j < q; ++j)
    pts[j] = {data.xbar[j], data.known() ? data.known_sigma2[j] : data.ss[j] / (data.n - 1.0)};
  const KMeansResult km = kmeans(pts, k, rng);
  if (km.quantile_fallback && warnings)
    warnings->push_back("k-means found fewer distinct points than k; used quantile split");
  st.z = km.assignment;
  st.components.resize(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) st.components[r].m = km.centers[r][0];
  st.pi.assign(static_cast<std::size_t>(k), 1.0 / k);
  return st;
}

double mixture_density(std::span<const ComponentParams> components,
                       std::span<const double> pi, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < components.size(); ++r) {
    const ComponentParams& c = components[r];
    total += pi[r] * std::exp(log_nig_pdf(mu, sigma2, c.m, c.lambda, c.alpha, c.beta));
  }
  return total;
}

namespace {

struct GridTrace {
  std::vector<ComponentParams> components;  // n_kept x k
  std::vector<double> pi;
};

std::pair<double, double> default_range(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  if (!(sd > 0.0)) sd = 0.1 * std::max(std::abs(mean), 1.0);
  return {*lo - sd, *hi + sd};
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

DensityGrid evaluate_grid(const DensityGridSpec& spec, const GridTrace& trace, int k,
                          std::int64_t n_kept, const ScaleTransform& t,
                          std::span<const double> mu_hat, std::span<const double> s2_hat) {
  const auto mu_range = default_range(mu_hat);
  const auto s2_range = default_range(s2_hat);
  const double min_s2 = *std::min_element(s2_hat.begin(), s2_hat.end());
  DensityGrid g;
  const double mlo = spec.mu_lo.value_or(mu_range.first);
  const double mhi = spec.mu_hi.value_or(mu_range.second);
  // sigma2 must stay positive; fall back to half the smallest estimate.
  const double slo = spec.sigma2_lo.value_or(std::max(s2_range.first, 0.5 * min_s2));
  const double shi = spec.sigma2_hi.value_or(s2_range.second);
  g.mu = linspace(mlo, mhi, spec.mu_points);
  g.sigma2 = linspace(slo, shi, spec.sigma2_points);

  const std::size_t nm = g.mu.size(), ns = g.sigma2.size(), cells = nm * ns;
  std::vector<double> mu_std(cells), log_s2(cells), inv_s2(cells);
  const double s2scale = t.scale * t.scale;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = 0; i < nm; ++i) {
      const std::size_t c = s * nm + i;
      mu_std[c] = (g.mu[i] - t.center) / t.scale;
      const double v = g.sigma2[s] / s2scale;
      log_s2[c] = std::log(v);
      inv_s2[c] = 1.0 / v;
    }
  }
  g.values.assign(cells, 0.0);
  std::vector<double> buf(cells);
  for (std::int64_t it = 0; it < n_kept; ++it) {
    for (int r = 0; r < k; ++r) {
      const std::size_t idx = static_cast<std::size_t>(it) * k + r;
      const double p = trace.pi[idx];
      if (!(p > 0.0)) continue;
      const ComponentParams& c = trace.components[idx];
      simd::nig_log_weights(mu_std, log_s2, inv_s2,
                            simd::make_nig_terms(c.m, c.lambda, c.alpha, c.beta), buf);
      const double lp = std::log(p);
      for (double& v : buf) v += lp;
      simd::exp_inplace(buf);
      for (std::size_t c2 = 0; c2 < cells; ++c2) g.values[c2] += buf[c2];
    }
  }
  // Average over draws and map the density to the original scale.
  const double norm = 1.0 / (static_cast<double>(n_kept) * t.scale * s2scale);
  for (double& v : g.values) v *= norm;
  return g;
}

}  // namespace

PosteriorSummary fit(const DataMatrix& data, const Hyperparams& hyper_in,
                     const SamplerConfig& config, const Observer& observer) {
  config.validate();
  hyper_in.validate();
  const Standardized st = standardize(data);
  const ChainData cd = ChainData::from(st.data);
  PosteriorSummary out;
  out.hyper = hyper_in;
  RngStream rng(config.seed, config.stream);
  MixtureState state = init_state(cd, hyper_in, rng, &out.warnings);
  const int k = state.k();
  out.hyper.k = k;
  const Hyperparams& hyper = out.hyper;

  MhTuning tuning(k, config.mh_step_alpha, config.mh_step_beta);
  Workspace ws;
  const std::size_t q = cd.q();
  std::vector<double> mu_sum(q, 0.0), s2_sum(q, 0.0), pi_sum(static_cast<std::size_t>(k), 0.0);
  std::vector<double> sorted(static_cast<std::size_t>(k));
  GridTrace trace;
  std::int64_t kept = 0;

  for (int it = 0; it < config.n_iter; ++it) {
    if (it == config.n_burnin) tuning.reset_counts();
    const bool burning = it < config.n_burnin;
    gibbs_sweep(state, cd, hyper, rng, tuning, ws,
                burning && config.adapt_mh ? std::optional<int>(it) : std::nullopt);
    if (observer) observer(it, state);
    if (burning) continue;
    ++kept;
    for (std::size_t j = 0; j < q; ++j) {
      mu_sum[j] += state.mu[j];
      s2_sum[j] += state.sigma2[j];
    }
    sorted = state.pi;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (int r = 0; r < k; ++r) pi_sum[r] += sorted[r];
    if (config.density) {
      trace.components.insert(trace.components.end(), state.components.begin(),
                              state.components.end());
      trace.pi.insert(trace.pi.end(), state.pi.begin(), state.pi.end());
    }
  }

  const double inv = 1.0 / static_cast<double>(kept);
  for (auto& v : mu_sum) v *= inv;
  for (auto& v : s2_sum) v *= inv;
  const MeanVarianceEstimates est = back_transform(mu_sum, s2_sum, st.transform);
  out.mu_hat = est.mu;
  if (data.mode() == VarianceMode::known)
    out.sigma2_hat.assign(data.known_variances().begin(), data.known_variances().end());
  else
    out.sigma2_hat = est.sigma2;
  out.pi_sorted_mean.resize(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) out.pi_sorted_mean[r] = pi_sum[r] * inv;
  out.n_kept = kept;
  out.underflow_fallbacks = ws.underflow_fallbacks;
  out.acceptance_alpha.resize(static_cast<std::size_t>(k));
  out.acceptance_beta.resize(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    const double att = static_cast<double>(tuning.attempted[r]);
    out.acceptance_alpha[r] = tuning.accepted_alpha[r] / att;
    out.acceptance_beta[r] = tuning.accepted_beta[r] / att;
    for (const auto& [name, rate] : {std::pair{"alpha", out.acceptance_alpha[r]},
                                     std::pair{"beta", out.acceptance_beta[r]}}) {
      if (rate < 0.1 || rate > 0.6) {
        std::ostringstream msg;
        msg << "MH acceptance for " << name << " in component " << r << " is " << rate
            << ", outside [0.1, 0.6]";
        out.warnings.push_back(msg.str());
      }
    }
  }
  if (ws.underflow_fallbacks > 0)
    out.warnings.push_back("label weights underflowed " +
                           std::to_string(ws.underflow_fallbacks) +
                           " times; uniform labels drawn");
  if (config.density)
    out.density = evaluate_grid(*config.density, trace, k, kept, st.transform, out.mu_hat,
                                out.sigma2_hat);
  return out;
}

PosteriorSummary fit_default(const DataMatrix& data, const SamplerConfig& config,
                             const HyperOverrides& overrides) {
  return fit(data, elicit_for(data, overrides), config);
}

PosteriorSummary merge(std::span<const PosteriorSummary> chains) {
  if (chains.empty()) throw ParameterError("merge needs at least one chain");
  PosteriorSummary out = chains.front();
  std::int64_t total = 0;
  for (const auto& c : chains) {
    if (c.mu_hat.size() != out.mu_hat.size() ||
        c.pi_sorted_mean.size() != out.pi_sorted_mean.size())
      throw ParameterError("merge: chains disagree in shape");
    if (c.n_kept < 1) throw ParameterError("merge: chain without kept draws");
    total += c.n_kept;
  }
  auto pool = [&](auto member) {
    auto& dst = out.*member;
    std::fill(dst.begin(), dst.end(), 0.0);
    for (const auto& c : chains) {
      const double w = static_cast<double>(c.n_kept) / static_cast<double>(total);
      const auto& src = c.*member;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    }
  };
  pool(&PosteriorSummary::mu_hat);
  pool(&PosteriorSummary::sigma2_hat);
  pool(&PosteriorSummary::pi_sorted_mean);
  pool(&PosteriorSummary::acceptance_alpha);
  pool(&PosteriorSummary::acceptance_beta);
  if (out.density) {
    for (const auto& c : chains)
      if (!c.density || c.density->values.size() != out.density->values.size())
        throw ParameterError("merge: density grids differ");
    std::fill(out.density->values.begin(), out.density->values.end(), 0.0);
    for (const auto& c : chains) {
      const double w = static_cast<double>(c.n_kept) / static_cast<double>(total);
      for (std::size_t i = 0; i < out.density->values.size(); ++i)
        out.density->values[i] += w * c.density->values[i];
    }
  }
  out.n_kept = total;
  out.underflow_fallbacks = 0;
  out.warnings.clear();
  for (const auto& c : chains) {
    out.underflow_fallbacks += c.underflow_fallbacks;
    out.warnings.insert(out.warnings.end(), c.warnings.begin(), c.warnings.end());
  }
  return out;
}

}  // namespace ebmix::dpmm
