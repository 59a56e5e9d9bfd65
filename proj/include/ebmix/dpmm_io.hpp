#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include <json.hpp>

#include "ebmix/dpmm.hpp"

namespace ebmix::dpmm {

// Flat description of the run echoed into every artifact.
using ConfigEcho = std::map<std::string, std::string>;

nlohmann::ordered_json hyper_to_json(const Hyperparams& h);

/// {mu_hat, sigma2_hat, pi_sorted, acceptance{alpha, beta}, n_kept,
///  hyperparameters, warnings, config, seed}
nlohmann::ordered_json summary_to_json(const PosteriorSummary& s, const SamplerConfig& cfg,
                                       const ConfigEcho& echo = {});

// One row per grid cell: mu, sigma2, density.
void write_density_csv(std::ostream& out, const DensityGrid& grid);

}  // namespace ebmix::dpmm
