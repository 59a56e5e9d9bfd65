#include "ebmix/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ebmix/errors.hpp"
#include "ebmix/isotonic.hpp"
#include "ebmix/optimize.hpp"

namespace ebmix::baselines {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(std::span<const double> xbar, std::span<const double> v,
                  std::size_t min_q) {
  if (xbar.size() < min_q)
    throw ParameterError("estimator needs at least " + std::to_string(min_q) +
                         " coordinates");
  if (v.size() != xbar.size()) throw ParameterError("means and variances differ in length");
  for (double x : v)
    if (!(std::isfinite(x) && x > 0.0)) throw ParameterError("variances must be positive");
  for (double x : xbar)
    if (!std::isfinite(x)) throw ParameterError("means must be finite");
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> apply(std::span<const double> xbar, std::span<const double> b,
                          double m) {
  std::vector<double> out(xbar.size());
  for (std::size_t j = 0; j < xbar.size(); ++j) out[j] = (1.0 - b[j]) * xbar[j] + b[j] * m;
  return out;
}

std::vector<double> b_for_lambda(std::span<const double> v, double lambda) {
  std::vector<double> b(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    b[j] = std::isinf(lambda) ? 0.0 : v[j] / (lambda + v[j]);
  return b;
}

// argmin_m sum b_j^2 (xbar_j - m)^2
double weighted_center(std::span<const double> xbar, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    num += b[j] * b[j] * xbar[j];
    den += b[j] * b[j];
  }
  return den > 0.0 ? num / den : mean_of(xbar);
}

// Minimizes g(lambda) over [0, inf) on a log grid around the spread of v,
// refined by golden-section search in log-lambda. Both ends (lambda = 0 and
// lambda = inf) are candidates too.
Minimum minimize_over_lambda(const std::function<double(double)>& g,
                             std::span<const double> xbar, std::span<const double> v) {
  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  double spread = 0.0;
  const double xm = mean_of(xbar);
  for (double x : xbar) spread += (x - xm) * (x - xm);
  spread /= static_cast<double>(xbar.size());
  const double lo = std::log(1e-6 * *vmin);
  const double hi = std::log(1e3 * std::max(*vmax, spread) + 1e-300);
  auto h = [&](double t) { return g(std::exp(t)); };
  Minimum best = grid_then_golden(h, lo, hi, 200, 1e-9);
  best.x = std::exp(best.x);
  for (double lam : {0.0, kInf}) {
    const double f = g(lam);
    if (f < best.f) best = {lam, f};
  }
  return best;
}

}  // namespace

std::vector<double> estimate_naive(std::span<const double> xbar) {
  return {xbar.begin(), xbar.end()};
}

std::vector<double> estimate_grand_mean(std::span<const double> xbar) {
  if (xbar.empty()) throw ParameterError("no coordinates");
  return std::vector<double>(xbar.size(), mean_of(xbar));
}

std::vector<double> estimate_js(std::span<const double> xbar, double v, bool positive_part) {
  if (xbar.size() < 3) throw ParameterError("James-Stein needs q >= 3");
  if (!(v >= 0.0)) throw ParameterError("variance must be non-negative");
  double norm2 = 0.0;
  for (double x : xbar) norm2 += x * x;
  std::vector<double> out(xbar.begin(), xbar.end());
  if (norm2 == 0.0) return out;
  double c = 1.0 - v * static_cast<double>(xbar.size() - 2) / norm2;
  if (positive_part) c = std::max(c, 0.0);
  for (double& x : out) x *= c;
  return out;
}

std::vector<double> estimate_hetero_js(std::span<const double> xbar,
                                       std::span<const double> v, bool positive_part) {
  check_inputs(xbar, v, 3);
  double denom = 0.0;
  for (std::size_t j = 0; j < xbar.size(); ++j) denom += xbar[j] * xbar[j] / v[j];
  std::vector<double> out(xbar.begin(), xbar.end());
  if (denom == 0.0) return out;
  double c = 1.0 - static_cast<double>(xbar.size() - 2) / denom;
  if (positive_part) c = std::max(c, 0.0);
  for (double& x : out) x *= c;
  return out;
}

std::vector<double> estimate_js_xkb(std::span<const double> xbar, std::span<const double> v) {
  check_inputs(xbar, v, 4);
  double wsum = 0.0, wx = 0.0;
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    wsum += 1.0 / v[j];
    wx += xbar[j] / v[j];
  }
  const double center = wx / wsum;
  double denom = 0.0;
  for (std::size_t j = 0; j < xbar.size(); ++j)
    denom += (xbar[j] - center) * (xbar[j] - center) / v[j];
  const double c =
      denom > 0.0 ? std::max(0.0, 1.0 - static_cast<double>(xbar.size() - 3) / denom) : 0.0;
  std::vector<double> out(xbar.size());
  for (std::size_t j = 0; j < xbar.size(); ++j) out[j] = center + c * (xbar[j] - center);
  return out;
}

ShrinkageFit estimate_normal_normal_eb(std::span<const double> xbar,
                                       std::span<const double> v, EbFit fit) {
  check_inputs(xbar, v, 2);
  const std::size_t q = xbar.size();
  ShrinkageFit out;
  if (fit == EbFit::mom) {
    out.m = mean_of(xbar);
    double ss = 0.0;
    for (double x : xbar) ss += (x - out.m) * (x - out.m);
    out.lambda = std::max(0.0, ss / static_cast<double>(q - 1) - mean_of(v));
  } else {
    auto profile_m = [&](double lambda) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < q; ++j) {
        const double w = 1.0 / (lambda + v[j]);
        num += w * xbar[j];
        den += w;
      }
      return num / den;
    };
    // Negative profile log-likelihood; lambda = inf is not a candidate.
    auto nll = [&](double lambda) {
      if (std::isinf(lambda)) return kInf;
      const double m = profile_m(lambda);
      double s = 0.0;
      for (std::size_t j = 0; j < q; ++j) {
        const double t = lambda + v[j];
        s += std::log(t) + (xbar[j] - m) * (xbar[j] - m) / t;
      }
      return 0.5 * s;
    };
    const Minimum best = minimize_over_lambda(nll, xbar, v);
    if (!std::isfinite(best.f) || !std::isfinite(best.x))
      throw FitError("EBMLE: marginal likelihood optimization failed (lambda=" +
                     std::to_string(best.x) + ", nll=" + std::to_string(best.f) + ")");
    out.lambda = best.x;
    out.m = profile_m(out.lambda);
    out.objective = best.f;
  }
  out.b = b_for_lambda(v, out.lambda);
  out.mu_hat = apply(xbar, out.b, out.m);
  return out;
}

double sure_objective(std::span<const double> xbar, std::span<const double> v,
                      std::span<const double> b, double m) {
  double s = 0.0;
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    const double d = xbar[j] - m;
    s += v[j] + b[j] * b[j] * d * d - 2.0 * b[j] * v[j];
  }
  return s / static_cast<double>(xbar.size());
}

ShrinkageFit estimate_sure_m(std::span<const double> xbar, std::span<const double> v,
                             std::optional<double> fixed_m) {
  check_inputs(xbar, v, 2);
  auto m_for = [&](std::span<const double> b) {
    return fixed_m ? *fixed_m : weighted_center(xbar, b);
  };
  auto objective = [&](double lambda) {
    const auto b = b_for_lambda(v, lambda);
    return sure_objective(xbar, v, b, m_for(b));
  };
  const Minimum best = minimize_over_lambda(objective, xbar, v);
  ShrinkageFit out;
  out.lambda = best.x;
  out.b = b_for_lambda(v, out.lambda);
  out.m = m_for(out.b);
  out.objective = best.f;
  out.mu_hat = apply(xbar, out.b, out.m);
  return out;
}

namespace {

// Coordinates sorted by v with tie groups, shared by every m evaluation.
struct SortedByVariance {
  std::vector<std::size_t> order;
  std::vector<int> group;

  explicit SortedByVariance(std::span<const double> v) : order(v.size()), group(v.size()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    int g = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i > 0 && v[order[i]] != v[order[i - 1]]) ++g;
      group[i] = g;
    }
  }
};

std::vector<double> sm_b(std::span<const double> xbar, std::span<const double> v, double m,
                         const SortedByVariance& s) {
  const std::size_t q = xbar.size();
  // Per-coordinate SURE is d b^2 - 2 v b + v with d = (xbar - m)^2, so the
  // constrained minimizer is an isotonic fit of v/d with weights d.
  std::vector<double> u(q), w(q);
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t j = s.order[i];
    const double d = xbar[j] - m;
    u[i] = v[j];
    w[i] = d * d;
  }
  const std::vector<double> sorted_b = isotonic_ratio(u, w, 0.0, 1.0, s.group);
  std::vector<double> b(q);
  for (std::size_t i = 0; i < q; ++i) b[s.order[i]] = sorted_b[i];
  return b;
}

}  // namespace

std::vector<double> sure_sm_b_given_m(std::span<const double> xbar,
                                      std::span<const double> v, double m) {
  check_inputs(xbar, v, 1);
  return sm_b(xbar, v, m, SortedByVariance(v));
}

ShrinkageFit estimate_sure_sm(std::span<const double> xbar, std::span<const double> v) {
  check_inputs(xbar, v, 2);
  const SortedByVariance sorted(v);
  auto profile = [&](double m) { return sure_objective(xbar, v, sm_b(xbar, v, m, sorted), m); };
  const auto [lo_it, hi_it] = std::minmax_element(xbar.begin(), xbar.end());
  const double lo = *lo_it, hi = *hi_it;

  // The profile is piecewise smooth in m and can have several local minima:
  // scan a grid over the data range (the optimum cannot lie outside it) and
  // refine the best few cells.
  const int n_grid = std::clamp(static_cast<int>(8 * xbar.size()), 400, 2000);
  std::vector<double> ms(static_cast<std::size_t>(n_grid)), fs(ms.size());
  for (int i = 0; i < n_grid; ++i) {
    ms[i] = lo + (hi - lo) * i / (n_grid - 1);
    fs[i] = profile(ms[i]);
  }
  std::vector<int> idx(static_cast<std::size_t>(n_grid));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + std::min(n_grid, 8), idx.end(),
                    [&](int a, int b) { return fs[a] < fs[b]; });
  Minimum best{ms[idx[0]], fs[idx[0]]};
  for (int t = 0; t < std::min(n_grid, 8); ++t) {
    const int i = idx[t];
    const Minimum cand = golden_section(profile, ms[std::max(i - 1, 0)],
                                        ms[std::min(i + 1, n_grid - 1)], 1e-12);
    if (cand.f < best.f) best = cand;
  }
  // Alternate closed-form m given b and isotonic b given m; never worsens.
  for (int it = 0; it < 50; ++it) {
    const double m_new = weighted_center(xbar, sm_b(xbar, v, best.x, sorted));
    const double f_new = profile(m_new);
    if (!(f_new < best.f - 1e-15)) break;
    best = {m_new, f_new};
  }
  ShrinkageFit out;
  out.m = best.x;
  out.b = sm_b(xbar, v, out.m, sorted);
  out.objective = sure_objective(xbar, v, out.b, out.m);
  out.lambda = std::numeric_limits<double>::quiet_NaN();
  out.mu_hat = apply(xbar, out.b, out.m);
  return out;
}

std::vector<double> estimate_group_linear(std::span<const double> xbar,
                                          std::span<const double> v, int bins) {
  check_inputs(xbar, v, 1);
  const std::size_t q = xbar.size();
  if (bins == 0) bins = std::max(1, static_cast<int>(std::lround(std::cbrt(static_cast<double>(q)))));
  if (bins < 1 || static_cast<std::size_t>(bins) > q)
    throw ParameterError("group-linear needs 1 <= bins <= q");
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> out(xbar.begin(), xbar.end());
  for (int g = 0; g < bins; ++g) {
    const std::size_t begin = q * static_cast<std::size_t>(g) / static_cast<std::size_t>(bins);
    const std::size_t end =
        q * static_cast<std::size_t>(g + 1) / static_cast<std::size_t>(bins);
    if (end - begin < 2) continue;
    double mean = 0.0, vsum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      mean += xbar[order[i]];
      vsum += v[order[i]];
    }
    mean /= static_cast<double>(end - begin);
    double ss = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      ss += (xbar[order[i]] - mean) * (xbar[order[i]] - mean);
    const double c = ss > 0.0 ? std::clamp(1.0 - vsum / ss, 0.0, 1.0) : 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t j = order[i];
      out[j] = mean + c * (xbar[j] - mean);
    }
  }
  return out;
}

ShrinkageFit estimate_oracle(std::span<const double> xbar, std::span<const double> v,
                             std::span<const double> mu_true) {
  check_inputs(xbar, v, 2);
  if (mu_true.size() != xbar.size()) throw ParameterError("truth length mismatch");
  const std::size_t q = xbar.size();
  // Loss is quadratic in m given b: sum ((1 - b) xbar + b m - mu)^2.
  auto m_for = [&](std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      num += b[j] * (mu_true[j] - (1.0 - b[j]) * xbar[j]);
      den += b[j] * b[j];
    }
    return den > 0.0 ? num / den : 0.0;
  };
  auto loss = [&](double lambda) {
    const auto b = b_for_lambda(v, lambda);
    const double m = m_for(b);
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      const double e = (1.0 - b[j]) * xbar[j] + b[j] * m - mu_true[j];
      s += e * e;
    }
    return s / static_cast<double>(q);
  };
  const Minimum best = minimize_over_lambda(loss, xbar, v);
  ShrinkageFit out;
  out.lambda = best.x;
  out.b = b_for_lambda(v, out.lambda);
  out.m = m_for(out.b);
  out.objective = best.f;
  out.mu_hat = apply(xbar, out.b, out.m);
  return out;
}

namespace {

const std::map<std::string, MeanEstimator>& registry() {
  static const std::map<std::string, MeanEstimator> r = {
      {"Naive", [](const EstimatorInput& in) { return estimate_naive(in.xbar); }},
      {"GrandMean", [](const EstimatorInput& in) { return estimate_grand_mean(in.xbar); }},
      {"JS", [](const EstimatorInput& in) { return estimate_js(in.xbar, mean_of(in.v), false); }},
      {"JS+", [](const EstimatorInput& in) { return estimate_js(in.xbar, mean_of(in.v), true); }},
      {"HeteroJS",
       [](const EstimatorInput& in) { return estimate_hetero_js(in.xbar, in.v, false); }},
      {"JS.XKB", [](const EstimatorInput& in) { return estimate_js_xkb(in.xbar, in.v); }},
      {"EBMLE.XKB",
       [](const EstimatorInput& in) {
         return estimate_normal_normal_eb(in.xbar, in.v, EbFit::mle).mu_hat;
       }},
      {"EBMOM.XKB",
       [](const EstimatorInput& in) {
         return estimate_normal_normal_eb(in.xbar, in.v, EbFit::mom).mu_hat;
       }},
      {"SURE.M.XKB",
       [](const EstimatorInput& in) { return estimate_sure_m(in.xbar, in.v).mu_hat; }},
      {"SURE.SM.XKB",
       [](const EstimatorInput& in) { return estimate_sure_sm(in.xbar, in.v).mu_hat; }},
      {"GL.WMBZ", [](const EstimatorInput& in) { return estimate_group_linear(in.xbar, in.v); }},
      {"Oracle.XKB",
       [](const EstimatorInput& in) {
         return estimate_oracle(in.xbar, in.v, in.mu_true).mu_hat;
       }},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names = {
      "Naive",     "GrandMean",  "JS",          "JS+",     "HeteroJS",  "JS.XKB",
      "EBMLE.XKB", "EBMOM.XKB",  "SURE.M.XKB",  "SURE.SM.XKB", "GL.WMBZ", "Oracle.XKB"};
  return names;
}

std::optional<MeanEstimator> lookup(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) return std::nullopt;
  return it->second;
}

bool needs_truth(const std::string& name) { return name == "Oracle.XKB"; }

}  // namespace ebmix::baselines
