#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ebmix/simlab.hpp"

namespace ebmix::sim {

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "NA";
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#000000", "#aec7e8",
                          "#98df8a", "#ff9896"};

}  // namespace

void write_report_csv(std::ostream& out, const RiskReport& report) {
  out << "example,estimator,q,n_reps,n_ok,n_failed,mse_mu,se_mu,mse_sigma2,se_sigma2\n";
  for (const RiskRow& r : report.rows())
    out << report.example << ',' << r.estimator << ',' << r.q << ',' << report.n_reps << ','
        << r.n_ok << ',' << r.n_failed << ',' << fmt(r.mse_mu) << ',' << fmt(r.se_mu) << ','
        << fmt(r.mse_sigma2) << ',' << fmt(r.se_sigma2) << '\n';
}

nlohmann::ordered_json report_to_json(const RiskReport& report) {
  nlohmann::ordered_json j;
  j["example"] = report.example;
  j["variance_mode"] = report.mode == VarianceMode::known ? "known" : "unknown";
  j["n"] = report.n;
  j["q_values"] = report.q_values;
  j["n_reps"] = report.n_reps;
  j["seed"] = report.seed;
  auto rows = nlohmann::ordered_json::array();
  for (const RiskRow& r : report.rows()) {
    nlohmann::ordered_json row = {{"estimator", r.estimator}, {"q", r.q},
                                  {"n_ok", r.n_ok},           {"n_failed", r.n_failed}};
    row["mse_mu"] = r.mse_mu;
    row["se_mu"] = r.se_mu;
    row["mse_sigma2"] = r.mse_sigma2;
    row["se_sigma2"] = r.se_sigma2;
    rows.push_back(row);
  }
  j["rows"] = rows;
  // First error message per estimator, if any replication failed.
  nlohmann::ordered_json failures = nlohmann::ordered_json::object();
  for (std::size_t e = 0; e < report.estimators.size(); ++e)
    for (const auto& per_q : report.records[e])
      for (const RepRecord& rec : per_q)
        if (!rec.ok && !failures.contains(report.estimators[e]))
          failures[report.estimators[e]] = rec.error;
  j["failures"] = failures;
  return j;
}

void write_report_svg(std::ostream& out, const RiskReport& report, bool sigma2) {
  const double W = 640, H = 420, left = 70, right = 170, top = 30, bottom = 50;
  const auto rows = report.rows();
  double ymin = INFINITY, ymax = -INFINITY;
  for (const RiskRow& r : rows) {
    const double y = sigma2 ? r.mse_sigma2 : r.mse_mu;
    if (!std::isfinite(y)) continue;
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const auto [qlo_it, qhi_it] = std::minmax_element(report.q_values.begin(), report.q_values.end());
  const double qlo = static_cast<double>(*qlo_it);
  double qhi = static_cast<double>(*qhi_it);
  if (qhi == qlo) qhi = qlo + 1.0;
  auto px = [&](double q) { return left + (q - qlo) / (qhi - qlo) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\">Example " << report.example
      << (sigma2 ? " variance" : " mean") << " estimation</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right
      << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">q</text>\n";
  out << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">MSE</text>\n";
  for (std::size_t q : report.q_values)
    out << "<text x=\"" << px(static_cast<double>(q)) << "\" y=\"" << H - bottom + 16
        << "\" text-anchor=\"middle\">" << q << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
        << std::setprecision(3) << y << "</text>\n";
  }
  for (std::size_t e = 0; e < report.estimators.size(); ++e) {
    const char* colour = kPalette[e % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const RiskRow& r : rows) {
      if (r.estimator != report.estimators[e]) continue;
      const double y = sigma2 ? r.mse_sigma2 : r.mse_mu;
      if (!std::isfinite(y)) continue;
      out << std::setprecision(6) << px(static_cast<double>(r.q)) << ',' << py(y) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(e);
    out << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - right + 35 << "\" y=\"" << ly + 4 << "\">"
        << report.estimators[e] << "</text>\n";
  }
  out << "</svg>\n";
}

void write_gamma_boxplot_csv(std::ostream& out, const GammaSensitivity& g) {
  out << "gamma,q,rep,rank,pi\n" << std::setprecision(10);
  for (std::size_t gi = 0; gi < g.gammas.size(); ++gi) {
    const RiskReport& rep = g.reports[gi];
    for (std::size_t qi = 0; qi < rep.q_values.size(); ++qi)
      for (std::size_t r = 0; r < rep.records[0][qi].size(); ++r) {
        const auto& pi = rep.records[0][qi][r].pi_sorted;
        for (std::size_t k = 0; k < pi.size(); ++k)
          out << g.gammas[gi] << ',' << rep.q_values[qi] << ',' << r << ',' << k + 1 << ','
              << pi[k] << '\n';
      }
  }
}

nlohmann::ordered_json gamma_to_json(const GammaSensitivity& g) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t gi = 0; gi < g.gammas.size(); ++gi) {
    nlohmann::ordered_json item = report_to_json(g.reports[gi]);
    item["gamma"] = g.gammas[gi];
    arr.push_back(item);
  }
  j["gamma_sensitivity"] = arr;
  return j;
}

}  // namespace ebmix::sim
