#include "ebmix/dpmm_io.hpp"

#include <iomanip>
#include <ostream>

namespace ebmix::dpmm {

nlohmann::ordered_json hyper_to_json(const Hyperparams& h) {
  return {{"m0", h.m0},           {"zeta2", h.zeta2},     {"a_lambda", h.a_lambda},
          {"b_lambda", h.b_lambda}, {"a_alpha", h.a_alpha}, {"b_alpha", h.b_alpha},
          {"a_beta", h.a_beta},   {"b_beta", h.b_beta},   {"gamma", h.gamma},
          {"k", h.k}};
}

nlohmann::ordered_json summary_to_json(const PosteriorSummary& s, const SamplerConfig& cfg,
                                       const ConfigEcho& echo) {
  nlohmann::ordered_json j;
  j["mu_hat"] = s.mu_hat;
  j["sigma2_hat"] = s.sigma2_hat;
  j["pi_sorted"] = s.pi_sorted_mean;
  j["acceptance"] = {{"alpha", s.acceptance_alpha}, {"beta", s.acceptance_beta}};
  j["n_kept"] = s.n_kept;
  j["hyperparameters"] = hyper_to_json(s.hyper);
  j["warnings"] = s.warnings;
  nlohmann::ordered_json c = {{"n_iter", cfg.n_iter},
                              {"n_burnin", cfg.n_burnin},
                              {"mh_step_alpha", cfg.mh_step_alpha},
                              {"mh_step_beta", cfg.mh_step_beta},
                              {"adapt_mh", cfg.adapt_mh},
                              {"stream", cfg.stream}};
  for (const auto& [key, value] : echo) c[key] = value;
  j["config"] = c;
  j["seed"] = cfg.seed;
  return j;
}

void write_density_csv(std::ostream& out, const DensityGrid& grid) {
  out << "mu,sigma2,density\n" << std::setprecision(17);
  const std::size_t nm = grid.mu.size();
  for (std::size_t s = 0; s < grid.sigma2.size(); ++s)
    for (std::size_t i = 0; i < nm; ++i)
      out << grid.mu[i] << ',' << grid.sigma2[s] << ',' << grid.values[s * nm + i] << '\n';
}

}  // namespace ebmix::dpmm
