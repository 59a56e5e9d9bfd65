// ebmix command-line front end.
// Exit codes: 0 ok, 1 runtime failure, 2 usage or data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "ebmix/benchmarks.hpp"
#include "ebmix/dpmm_io.hpp"
#include "ebmix/errors.hpp"
#include "ebmix/run_config.hpp"
#include "ebmix/simlab.hpp"

using namespace ebmix;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options are kept as raw text and applied through RunConfig::set, so the
// command line and the config file share one parser.
struct Bindings {
  std::vector<std::pair<CLI::Option*, std::string>> options;
  std::vector<std::pair<CLI::Option*, std::pair<std::string, std::string>>> flags;
  std::string config_path;
  std::string save_config;
  bool quiet = false;
};

void add_common(CLI::App* sub, Bindings& b, const std::vector<std::string>& keys) {
  static const std::map<std::string, std::pair<std::string, std::string>> help = {
      {"input", {"--input,-i", "data CSV"}},
      {"output", {"--output,-o", "output path prefix"}},
      {"estimators", {"--estimators", "comma-separated estimator names"}},
      {"example", {"--example", "simulation example 1-14"}},
      {"q", {"--q", "comma-separated dimensions"}},
      {"reps", {"--reps", "replications"}},
      {"seed", {"--seed", "RNG seed"}},
      {"jobs", {"--jobs,-j", "worker threads (0 = all cores)"}},
      {"k", {"--k", "truncation level"}},
      {"gamma", {"--gamma", "Dirichlet concentration"}},
      {"gammas", {"--gammas", "comma-separated concentrations"}},
      {"iterations", {"--iterations", "Gibbs iterations"}},
      {"burnin", {"--burnin", "burn-in iterations"}},
      {"mh_step_alpha", {"--mh-step-alpha", "initial log-scale MH step for alpha"}},
      {"mh_step_beta", {"--mh-step-beta", "initial log-scale MH step for beta"}},
      {"formats", {"--formats", "comma-separated subset of csv,json,svg"}},
      {"grid_points", {"--grid-points", "density grid points per axis"}},
      {"subset", {"--subset", "all, pitchers or non-pitchers"}},
      {"permutations", {"--permutations", "hypergeometric resamples"}},
      {"rows", {"--rows", "genes per submatrix"}},
      {"cols", {"--cols", "control subjects per submatrix"}},
  };
  for (const auto& key : keys) {
    const auto& [name, desc] = help.at(key);
    auto* opt = sub->add_option(name, desc)->type_name("TEXT")->expected(1);
    b.options.emplace_back(opt, key);
  }
  sub->add_option("--config,-c", b.config_path, "key = value config file");
  sub->add_option("--save-config", b.save_config, "write the effective config here");
  sub->add_flag("--quiet", b.quiet, "no progress on stderr");
  b.flags.emplace_back(sub->add_flag("--no-adapt", "fixed MH step sizes"),
                       std::pair{"adapt_mh", "false"});
}

RunConfig resolve(const std::string& command, const Bindings& b) {
  RunConfig cfg = b.config_path.empty() ? RunConfig{} : RunConfig::from_file(b.config_path);
  cfg.command = command;
  for (const auto& [opt, key] : b.options)
    if (opt->count() > 0) cfg.set(key, opt->results().front());
  for (const auto& [opt, kv] : b.flags)
    if (opt->count() > 0) cfg.set(kv.first, kv.second);
  if (cfg.jobs == 0) cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (cfg.jobs < 0) throw ParameterError("jobs must be >= 0");
  if (cfg.reps <= 0) throw ParameterError("reps must be positive");
  for (const auto& f : cfg.formats)
    if (f != "csv" && f != "json" && f != "svg")
      throw ParameterError("unknown format '" + f + "' (csv, json, svg)");
  cfg.sampler().validate();
  return cfg;
}

// All artifacts are rendered first and written last, so a failure leaves
// nothing behind.
class Artifacts {
 public:
  void add(std::string path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }
  void commit() const {
    for (const auto& [path, content] : files_) {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + path);
      out << content;
    }
  }
  const auto& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string csv_echo(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries()) out += "# " + k + " = " + v + "\n";
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

std::string svg_with_echo(std::string svg, const RunConfig& cfg) {
  const auto open = svg.find("<svg");
  const auto end = open == std::string::npos ? open : svg.find('>', open);
  if (end == std::string::npos) return svg;
  std::string desc = "\n<desc>";
  for (const auto& [k, v] : cfg.entries()) desc += xml_escape(k + " = " + v) + "; ";
  desc += "</desc>";
  svg.insert(end + 1, desc);
  return svg;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bench::Progress progress_printer(const std::string& label, bool quiet) {
  if (quiet) return {};
  return [label](std::size_t done, std::size_t total) {
    std::fprintf(stderr, "\r%s %zu/%zu", label.c_str(), done, total);
    if (done == total) std::fprintf(stderr, "\n");
  };
}

void run_fit(const RunConfig& cfg, Artifacts& art) {
  if (cfg.input.empty()) throw UsageError("fit needs --input");
  const DataMatrix data = cfg.known_variance ? read_known_variance_csv_file(cfg.input)
                                             : read_matrix_csv_file(cfg.input);
  auto sampler = cfg.sampler();
  const auto summary = dpmm::fit_default(data, sampler, cfg.overrides());
  if (cfg.wants("json")) art.add(cfg.output + ".json", dump(dpmm::summary_to_json(summary, sampler, cfg.echo())));
  if (cfg.wants("csv")) {
    std::ostringstream os;
    os.precision(17);
    os << csv_echo(cfg) << "j,mu_hat,sigma2_hat\n";
    for (std::size_t j = 0; j < summary.mu_hat.size(); ++j)
      os << j << ',' << summary.mu_hat[j] << ',' << summary.sigma2_hat[j] << '\n';
    art.add(cfg.output + ".csv", os.str());
  }
  if (summary.density) {
    std::ostringstream os;
    os << csv_echo(cfg);
    dpmm::write_density_csv(os, *summary.density);
    art.add(cfg.output + "_density.csv", os.str());
  }
}

sim::StudyConfig study_config(const RunConfig& cfg, std::vector<std::string> estimators) {
  sim::StudyConfig s;
  s.example = cfg.example;
  s.q_values = cfg.q_values;
  s.estimators = std::move(estimators);
  s.n_reps = cfg.reps;
  s.seed = cfg.seed;
  s.jobs = cfg.jobs;
  s.sampler = cfg.sampler();
  s.overrides = cfg.overrides();
  sim::example_spec(cfg.example);
  sim::check_estimator_names(s.estimators);
  return s;
}

void run_simulate(const RunConfig& cfg, Artifacts& art, bool quiet) {
  auto names = cfg.estimators.empty() ? sim::all_estimator_names() : cfg.estimators;
  const auto report = sim::run_study(study_config(cfg, names), progress_printer("simulate", quiet));
  if (cfg.wants("csv")) {
    std::ostringstream os;
    os << csv_echo(cfg);
    sim::write_report_csv(os, report);
    art.add(cfg.output + ".csv", os.str());
  }
  if (cfg.wants("json")) {
    auto j = sim::report_to_json(report);
    j["config"] = cfg.echo();
    art.add(cfg.output + ".json", dump(j));
  }
  if (cfg.wants("svg")) {
    std::ostringstream mu;
    sim::write_report_svg(mu, report, false);
    art.add(cfg.output + "_mu.svg", svg_with_echo(mu.str(), cfg));
    if (report.mode == VarianceMode::unknown) {
      std::ostringstream s2;
      sim::write_report_svg(s2, report, true);
      art.add(cfg.output + "_sigma2.svg", svg_with_echo(s2.str(), cfg));
    }
  }
}

void run_gamma(const RunConfig& cfg, Artifacts& art, bool quiet) {
  auto base = study_config(cfg, {"NIG-DPMM"});
  const auto g = sim::gamma_sensitivity(base, cfg.gammas, progress_printer("gamma", quiet));
  if (cfg.wants("json")) {
    json j = sim::gamma_to_json(g);
    j["config"] = cfg.echo();
    art.add(cfg.output + ".json", dump(j));
  }
  if (cfg.wants("csv")) {
    std::ostringstream rows;
    rows.precision(17);
    rows << csv_echo(cfg) << "gamma,q,n_ok,n_failed,mse_mu,se_mu,mse_sigma2,se_sigma2\n";
    for (std::size_t i = 0; i < g.gammas.size(); ++i)
      for (const auto& r : g.reports[i].rows())
        rows << g.gammas[i] << ',' << r.q << ',' << r.n_ok << ',' << r.n_failed << ','
             << r.mse_mu << ',' << r.se_mu << ',' << r.mse_sigma2 << ',' << r.se_sigma2 << '\n';
    art.add(cfg.output + ".csv", rows.str());
    std::ostringstream box;
    box << csv_echo(cfg);
    sim::write_gamma_boxplot_csv(box, g);
    art.add(cfg.output + "_boxplot.csv", box.str());
  }
}

void run_baseball(const RunConfig& cfg, Artifacts& art, bool quiet) {
  if (cfg.input.empty()) throw UsageError("baseball needs --input");
  const auto records = bench::read_baseball_csv_file(cfg.input);
  const auto subset = bench::parse_subset(cfg.subset);
  std::vector<std::string> names = cfg.estimators;
  if (names.empty())
    for (const auto& n : sim::all_estimator_names())
      if (n != "Oracle.XKB") names.push_back(n);
  sim::check_estimator_names(names);

  const auto d = bench::baseball_transform(records, subset);
  const auto tse = bench::baseball_tse(d, names, cfg.sampler(), cfg.overrides());
  std::optional<bench::PermutationResult> perm;
  if (cfg.permutations > 0)
    perm = bench::baseball_permutations(records, subset, cfg.permutations, names, cfg.sampler(),
                                        cfg.overrides(), cfg.seed, cfg.jobs,
                                        progress_printer("permutations", quiet));

  if (cfg.wants("json")) {
    json j;
    j["subset"] = bench::subset_name(subset);
    j["n_estimation"] = d.x1.size();
    j["n_validation"] = d.validation.size();
    json t = json::object();
    for (const auto& n : names) t[n] = tse.at(n);
    j["tse"] = t;
    if (perm) {
      json p = json::object();
      for (const auto& n : names) p[n] = {{"mean", perm->mean_tse.at(n)}, {"se", perm->se_tse.at(n)}};
      j["permutations"] = {{"n", perm->n_perm}, {"tse", p}};
    }
    j["config"] = cfg.echo();
    art.add(cfg.output + ".json", dump(j));
  }
  if (cfg.wants("csv")) {
    std::ostringstream os;
    os.precision(17);
    os << csv_echo(cfg) << "estimator,tse" << (perm ? ",perm_mean_tse,perm_se_tse" : "") << '\n';
    for (const auto& n : names) {
      os << n << ',' << tse.at(n);
      if (perm) os << ',' << perm->mean_tse.at(n) << ',' << perm->se_tse.at(n);
      os << '\n';
    }
    art.add(cfg.output + ".csv", os.str());
  }
}

void run_prostate(const RunConfig& cfg, Artifacts& art, bool quiet) {
  if (cfg.input.empty()) throw UsageError("prostate needs --input");
  const auto matrix = bench::read_prostate_csv_file(cfg.input);
  auto names = cfg.estimators.empty() ? sim::all_estimator_names() : cfg.estimators;
  sim::check_estimator_names(names);
  bench::ProstateConfig pc;
  pc.n_rows = cfg.rows;
  pc.n_cols = cfg.cols;
  pc.n_reps = cfg.reps;
  pc.seed = cfg.seed;
  pc.jobs = cfg.jobs;
  const auto rows = bench::prostate_study(matrix, pc, names, cfg.sampler(), cfg.overrides(),
                                          progress_printer("prostate", quiet));
  if (cfg.wants("json")) {
    json j;
    j["genes"] = matrix.genes;
    j["subjects"] = matrix.subjects;
    json r = json::array();
    for (const auto& row : rows)
      r.push_back({{"estimator", row.estimator}, {"loss_mu", row.loss_mu}, {"se_mu", row.se_mu},
                   {"loss_sigma2", row.loss_sigma2}, {"se_sigma2", row.se_sigma2},
                   {"n_ok", row.n_ok}, {"n_failed", row.n_failed}});
    j["rows"] = r;
    j["config"] = cfg.echo();
    art.add(cfg.output + ".json", dump(j));
  }
  if (cfg.wants("csv")) {
    std::ostringstream os;
    os.precision(17);
    os << csv_echo(cfg) << "estimator,n_ok,n_failed,loss_mu,se_mu,loss_sigma2,se_sigma2\n";
    for (const auto& r : rows)
      os << r.estimator << ',' << r.n_ok << ',' << r.n_failed << ',' << r.loss_mu << ','
         << r.se_mu << ',' << r.loss_sigma2 << ',' << r.se_sigma2 << '\n';
    art.add(cfg.output + ".csv", os.str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ebmix: empirical Bayes mean/variance estimation with a NIG mixture prior"};
  app.require_subcommand(1);

  std::map<std::string, Bindings> bindings;
  const std::vector<std::string> sampler_keys = {"seed", "k", "gamma", "iterations", "burnin",
                                                 "mh_step_alpha", "mh_step_beta", "output",
                                                 "formats", "jobs"};
  auto keys = [&](std::vector<std::string> extra) {
    extra.insert(extra.end(), sampler_keys.begin(), sampler_keys.end());
    return extra;
  };

  auto* fit = app.add_subcommand("fit", "fit the mixture model to a data file");
  add_common(fit, bindings["fit"], keys({"input", "grid_points"}));
  bindings["fit"].flags.emplace_back(
      fit->add_flag("--known-variance", "input rows are (value, variance)"),
      std::pair{"known_variance", "true"});
  bindings["fit"].flags.emplace_back(fit->add_flag("--density", "write the fitted prior density"),
                                     std::pair{"density", "true"});

  auto* simulate = app.add_subcommand("simulate", "risk study on a simulation example");
  add_common(simulate, bindings["simulate"], keys({"example", "q", "reps", "estimators"}));

  auto* gamma = app.add_subcommand("gamma", "sensitivity of the mixture fit to gamma");
  add_common(gamma, bindings["gamma"], keys({"example", "q", "reps", "gammas"}));

  auto* baseball = app.add_subcommand("baseball", "batting-average benchmark");
  add_common(baseball, bindings["baseball"], keys({"input", "subset", "permutations", "estimators"}));

  auto* prostate = app.add_subcommand("prostate", "gene-expression benchmark");
  add_common(prostate, bindings["prostate"], keys({"input", "rows", "cols", "reps", "estimators"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Bindings& b = bindings.at(command);
  try {
    const RunConfig cfg = resolve(command, b);
    Artifacts art;
    if (command == "fit") run_fit(cfg, art);
    else if (command == "simulate") run_simulate(cfg, art, b.quiet);
    else if (command == "gamma") run_gamma(cfg, art, b.quiet);
    else if (command == "baseball") run_baseball(cfg, art, b.quiet);
    else run_prostate(cfg, art, b.quiet);
    if (!b.save_config.empty()) art.add(b.save_config, cfg.to_text());
    art.commit();
    if (!b.quiet)
      for (const auto& [path, content] : art.files()) std::cerr << "wrote " << path << '\n';
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const ElicitationError& e) {
    std::cerr << "elicitation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
