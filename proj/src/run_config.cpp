#include "ebmix/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ebmix/data.hpp"
#include "ebmix/errors.hpp"

namespace ebmix {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Shortest text that parses back to the same double.
std::string dtoa(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>)
      out += dtoa(v[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      out += v[i];
    else
      out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value) {
  throw ParameterError("config: invalid value '" + value + "' for " + key);
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const std::string t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad(key, v);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const auto d = parse_double(trim(v));
  if (!d) bad(key, v);
  return *d;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(key, v);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  return {{"command", command},
          {"input", input},
          {"known_variance", known_variance ? "true" : "false"},
          {"output", output},
          {"estimators", join(estimators)},
          {"example", std::to_string(example)},
          {"q", join(q_values)},
          {"reps", std::to_string(reps)},
          {"seed", std::to_string(seed)},
          {"jobs", std::to_string(jobs)},
          {"k", std::to_string(k)},
          {"gamma", dtoa(gamma)},
          {"gammas", join(gammas)},
          {"iterations", std::to_string(n_iter)},
          {"burnin", std::to_string(burnin)},
          {"mh_step_alpha", dtoa(mh_step_alpha)},
          {"mh_step_beta", dtoa(mh_step_beta)},
          {"adapt_mh", adapt_mh ? "true" : "false"},
          {"formats", join(formats)},
          {"density", density ? "true" : "false"},
          {"grid_points", std::to_string(grid_points)},
          {"subset", subset},
          {"permutations", std::to_string(permutations)},
          {"rows", std::to_string(rows)},
          {"cols", std::to_string(cols)}};
}

std::map<std::string, std::string> RunConfig::echo() const {
  const auto e = entries();
  return {e.begin(), e.end()};
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "command") command = v;
  else if (key == "input") input = v;
  else if (key == "known_variance") known_variance = to_bool(key, v);
  else if (key == "output") output = v;
  else if (key == "estimators") estimators = split_list(v);
  else if (key == "example") example = to_int<int>(key, v);
  else if (key == "q") {
    q_values.clear();
    for (const auto& s : split_list(v)) q_values.push_back(to_int<std::size_t>(key, s));
  } else if (key == "reps") reps = to_int<int>(key, v);
  else if (key == "seed") seed = to_int<std::uint64_t>(key, v);
  else if (key == "jobs") jobs = to_int<int>(key, v);
  else if (key == "k") k = to_int<int>(key, v);
  else if (key == "gamma") gamma = to_double(key, v);
  else if (key == "gammas") {
    gammas.clear();
    for (const auto& s : split_list(v)) gammas.push_back(to_double(key, s));
  } else if (key == "iterations") n_iter = to_int<int>(key, v);
  else if (key == "burnin") burnin = to_int<int>(key, v);
  else if (key == "mh_step_alpha") mh_step_alpha = to_double(key, v);
  else if (key == "mh_step_beta") mh_step_beta = to_double(key, v);
  else if (key == "adapt_mh") adapt_mh = to_bool(key, v);
  else if (key == "formats") formats = split_list(v);
  else if (key == "density") density = to_bool(key, v);
  else if (key == "grid_points") grid_points = to_int<int>(key, v);
  else if (key == "subset") subset = v;
  else if (key == "permutations") permutations = to_int<int>(key, v);
  else if (key == "rows") rows = to_int<std::size_t>(key, v);
  else if (key == "cols") cols = to_int<std::size_t>(key, v);
  else throw ParameterError("config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    c.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

dpmm::SamplerConfig RunConfig::sampler() const {
  dpmm::SamplerConfig s;
  s.n_iter = n_iter;
  s.n_burnin = burnin;
  s.mh_step_alpha = mh_step_alpha;
  s.mh_step_beta = mh_step_beta;
  s.adapt_mh = adapt_mh;
  s.seed = seed;
  if (density) {
    dpmm::DensityGridSpec g;
    g.mu_points = g.sigma2_points = grid_points;
    s.density = g;
  }
  return s;
}

dpmm::HyperOverrides RunConfig::overrides() const {
  dpmm::HyperOverrides o;
  o.k = k;
  o.gamma = gamma;
  return o;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

}  // namespace ebmix
