#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ebmix/dpmm.hpp"

namespace ebmix {

// Settings of one CLI invocation. The file form is one `key = value` per
// line, '#' comments, lists comma-separated.
struct RunConfig {
  std::string command;
  std::string input;
  bool known_variance = false;
  std::string output = "ebmix_out";
  std::vector<std::string> estimators;
  int example = 1;
  std::vector<std::size_t> q_values{20, 100, 500};
  int reps = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
  int k = 10;
  double gamma = 0.1;
  std::vector<double> gammas{0.1, 10.0, 50.0, 100.0};
  int n_iter = 5000;
  int burnin = 2000;
  double mh_step_alpha = 0.5;
  double mh_step_beta = 0.5;
  bool adapt_mh = true;
  std::vector<std::string> formats{"csv", "json"};
  bool density = false;
  int grid_points = 100;
  std::string subset = "all";
  int permutations = 0;
  std::size_t rows = 500;
  std::size_t cols = 3;

  // Ordered key -> value text, exactly what to_text writes.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::map<std::string, std::string> echo() const;
  std::string to_text() const;
  // Throws ParameterError on unknown keys or malformed values.
  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  dpmm::SamplerConfig sampler() const;
  dpmm::HyperOverrides overrides() const;
  bool wants(const std::string& format) const;

  bool operator==(const RunConfig&) const = default;
};

}  // namespace ebmix
