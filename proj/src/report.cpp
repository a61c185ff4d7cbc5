#include "ising_lwc/report.hpp"

#include <algorithm>
#include <type_traits>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace ising_lwc {

bool ExperimentResult::all_passed() const noexcept {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::vector<std::size_t> tv_histogram(const std::vector<double>& tvs, std::size_t bins) {
  std::vector<std::size_t> h(bins, 0);
  if (bins == 0) return h;
  for (double tv : tvs) {
    auto b = static_cast<std::size_t>(std::clamp(tv, 0.0, 1.0) * static_cast<double>(bins));
    ++h[std::min(b, bins - 1)];
  }
  return h;
}

namespace {

using nlohmann::json;

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json estimate(const std::optional<Estimate>& e) {
  if (!e) return nullptr;
  return json{{"mean", e->mean}, {"stderr", e->std_error}};
}

json point_json(const ConvergenceReport& r) {
  json j;
  j["label"] = r.label;
  j["n"] = r.n;
  j["beta"] = r.beta;
  j["t"] = opt(r.t);
  j["ell"] = opt(r.ell);
  j["delta"] = opt(r.delta);
  j["samples"] = r.samples;
  j["algorithm"] = r.algorithm;
  j["seed"] = r.seed;
  j["graph_hash"] = r.graph_hash;
  j["tree_likeness"] = opt(r.tree_likeness);
  j["mode_A_tv"] = opt(r.mode_A_tv);
  if (r.mode_C_epsilon) {
    j["mode_C"] = {{"epsilon", *r.mode_C_epsilon},
                   {"exceed_fraction", opt(r.mode_C_exceed_fraction)},
                   {"mean_tv", opt(r.mode_C_mean_tv)},
                   {"histogram_bins", 20},
                   {"histogram", tv_histogram(r.mode_C_tv_per_vertex, 20)},
                   {"tv_per_vertex", r.mode_C_tv_per_vertex}};
  } else {
    j["mode_C"] = nullptr;
  }
  j["edge_agreement"] = estimate(r.edge_agreement);
  j["edge_agreement_conditioned"] = estimate(r.edge_agreement_conditioned);
  j["edge_correlation_tree"] = opt(r.edge_correlation_tree);
  j["f_census_mean"] = opt(r.f_census_mean);
  j["f_disagreement_mean"] = opt(r.f_disagreement_mean);
  j["q_hat"] = opt(r.q_hat);
  j["anticoncentration_sup"] = opt(r.anticoncentration_sup);
  j["anticoncentration_statistic"] = opt(r.anticoncentration_statistic);
  j["extra"] = r.extra;
  return j;
}

std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string csv_opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return csv_number(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace

void write_report_json(std::ostream& out, const ExperimentResult& result) {
  json j;
  j["experiment"] = result.experiment;
  j["all_passed"] = result.all_passed();
  json asserts = json::array();
  for (const auto& a : result.assertions) {
    asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  }
  j["assertions"] = asserts;
  j["warnings"] = result.warnings;
  json points = json::array();
  for (const auto& p : result.points) points.push_back(point_json(p));
  j["points"] = points;
  out << j.dump(2) << '\n';
}

void write_report_csv(std::ostream& out, const ExperimentResult& result) {
  std::vector<std::string> extra_keys;
  for (const auto& p : result.points) {
    for (const auto& [k, v] : p.extra) {
      if (std::find(extra_keys.begin(), extra_keys.end(), k) == extra_keys.end()) extra_keys.push_back(k);
    }
  }
  std::sort(extra_keys.begin(), extra_keys.end());
  out << "label,n,beta,t,ell,delta,samples,algorithm,seed,tree_likeness,mode_A_tv,mode_C_epsilon,"
         "mode_C_exceed_fraction,mode_C_mean_tv,edge_agreement,edge_agreement_stderr,"
         "edge_agreement_conditioned,edge_agreement_conditioned_stderr,edge_correlation_tree,"
         "f_census_mean,f_disagreement_mean,q_hat,anticoncentration_sup,anticoncentration_statistic";
  for (const auto& k : extra_keys) out << ',' << k;
  out << '\n';
  for (const auto& p : result.points) {
    auto est = [](const std::optional<Estimate>& e) {
      return e ? csv_number(e->mean) + "," + csv_number(e->std_error) : std::string(",");
    };
    out << p.label << ',' << p.n << ',' << csv_number(p.beta) << ',' << csv_opt(p.t) << ',' << csv_opt(p.ell) << ','
        << csv_opt(p.delta) << ',' << p.samples << ',' << p.algorithm << ',' << p.seed << ','
        << csv_opt(p.tree_likeness) << ',' << csv_opt(p.mode_A_tv) << ',' << csv_opt(p.mode_C_epsilon) << ','
        << csv_opt(p.mode_C_exceed_fraction) << ',' << csv_opt(p.mode_C_mean_tv) << ',' << est(p.edge_agreement)
        << ',' << est(p.edge_agreement_conditioned) << ',' << csv_opt(p.edge_correlation_tree) << ','
        << csv_opt(p.f_census_mean) << ',' << csv_opt(p.f_disagreement_mean) << ',' << csv_opt(p.q_hat) << ','
        << csv_opt(p.anticoncentration_sup) << ',' << csv_opt(p.anticoncentration_statistic);
    for (const auto& k : extra_keys) {
      auto it = p.extra.find(k);
      out << ',' << (it == p.extra.end() ? std::string() : csv_number(it->second));
    }
    out << '\n';
  }
}

}  // namespace ising_lwc
