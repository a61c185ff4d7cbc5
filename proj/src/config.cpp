#include "ising_lwc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ising_lwc/error.hpp"

namespace ising_lwc {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config_error, msg); }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <class T>
T number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) fail(key + ": cannot parse '" + text + "'");
  return value;
}

bool boolean(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(key + ": expected true or false, got '" + text + "'");
}

template <class T>
std::vector<T> number_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(number<T>(key, item));
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (const auto& x : xs) {
    if (!s.empty()) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(x);
    } else {
      s += std::to_string(x);
    }
  }
  return s;
}

const char* graph_kind_name(const GraphSpec& g) {
  switch (g.kind) {
    case GraphKind::random: return "random";
    case GraphKind::named: return nullptr;
    case GraphKind::file: return "file";
    case GraphKind::disjoint: return "disjoint";
  }
  return "random";
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"experiment", [](auto& c, auto&, auto& v) { c.experiment = v; }},
      {"graph",
       [](auto& c, auto& k, auto& v) {
         if (v == "random") {
           c.graph.kind = GraphKind::random;
         } else if (v == "file") {
           c.graph.kind = GraphKind::file;
         } else if (v == "disjoint") {
           c.graph.kind = GraphKind::disjoint;
         } else if (v == "K4" || v == "k4") {
           c.graph.kind = GraphKind::named;
           c.graph.name = "K4";
         } else if (v == "petersen" || v == "Petersen") {
           c.graph.kind = GraphKind::named;
           c.graph.name = "petersen";
         } else {
           fail(k + ": unknown graph '" + v + "'");
         }
       }},
      {"graph.n", [](auto& c, auto& k, auto& v) { c.graph.n_ladder = number_list<std::size_t>(k, v); }},
      {"graph.r", [](auto& c, auto& k, auto& v) { c.graph.r_ladder = number_list<std::size_t>(k, v); }},
      {"graph.n_per", [](auto& c, auto& k, auto& v) { c.graph.n_per = number<std::size_t>(k, v); }},
      {"graph.k", [](auto& c, auto& k, auto& v) { c.graph.k = number<int>(k, v); }},
      {"graph.seed", [](auto& c, auto& k, auto& v) { c.graph.seed = number<std::uint64_t>(k, v); }},
      {"graph.path", [](auto& c, auto&, auto& v) { c.graph.path = v; }},
      {"beta", [](auto& c, auto& k, auto& v) { c.beta = number<double>(k, v); }},
      {"beta_grid", [](auto& c, auto& k, auto& v) { c.beta_grid = number_list<double>(k, v); }},
      {"field", [](auto& c, auto& k, auto& v) { c.field = number<double>(k, v); }},
      {"sampler.algorithm",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") {
           c.algorithm.reset();
           return;
         }
         try {
           c.algorithm = parse_algorithm(v);
         } catch (const Error&) {
           fail(k + ": unknown algorithm '" + v + "'");
         }
       }},
      {"sampler.samples", [](auto& c, auto& k, auto& v) { c.samples = number<std::size_t>(k, v); }},
      {"sampler.burn_in",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") {
           c.burn_in.reset();
         } else {
           c.burn_in = number<std::size_t>(k, v);
         }
       }},
      {"sampler.thin", [](auto& c, auto& k, auto& v) { c.thin = number<std::size_t>(k, v); }},
      {"sampler.seed", [](auto& c, auto& k, auto& v) { c.seed = number<std::uint64_t>(k, v); }},
      {"sampler.start",
       [](auto& c, auto& k, auto& v) {
         try {
           c.start = parse_start(v);
         } catch (const Error&) {
           fail(k + ": unknown start '" + v + "'");
         }
       }},
      {"sampler.global_flip", [](auto& c, auto& k, auto& v) { c.global_flip = boolean(k, v); }},
      {"diagnostics.t", [](auto& c, auto& k, auto& v) { c.t_values = number_list<int>(k, v); }},
      {"diagnostics.ell", [](auto& c, auto& k, auto& v) { c.ell = number<int>(k, v); }},
      {"diagnostics.delta",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") {
           c.delta.reset();
         } else {
           c.delta = number<double>(k, v);
         }
       }},
      {"diagnostics.epsilon", [](auto& c, auto& k, auto& v) { c.epsilon = number<double>(k, v); }},
      {"diagnostics.local_functions",
       [](auto& c, auto& k, auto& v) {
         c.local_functions.clear();
         for (const auto& name : split_list(v)) {
           try {
             c.local_functions.push_back(parse_local_function(name));
           } catch (const Error&) {
             fail(k + ": unknown local function '" + name + "'");
           }
         }
       }},
      {"output", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = number<std::size_t>(k, v); }},
      {"assert.mode_A_max", [](auto& c, auto& k, auto& v) { c.assert_mode_A_max = number<double>(k, v); }},
      {"assert.q_hat_max", [](auto& c, auto& k, auto& v) { c.assert_q_hat_max = number<double>(k, v); }},
      {"assert.q_hat_min", [](auto& c, auto& k, auto& v) { c.assert_q_hat_min = number<double>(k, v); }},
      {"assert.q_hat_upper", [](auto& c, auto& k, auto& v) { c.assert_q_hat_upper = number<double>(k, v); }},
      {"assert.z_max", [](auto& c, auto& k, auto& v) { c.assert_z_max = number<double>(k, v); }},
      {"assert.identity_tol", [](auto& c, auto& k, auto& v) { c.assert_identity_tol = number<double>(k, v); }},
      {"assert.growth_tol", [](auto& c, auto& k, auto& v) { c.assert_growth_tol = number<double>(k, v); }},
      {"assert.tv_max", [](auto& c, auto& k, auto& v) { c.assert_tv_max = number<double>(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) fail("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

void validate(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    fail("unknown experiment '" + c.experiment + "'");
  }
  if (c.graph.k < 3) fail("graph.k must be at least 3");
  if (!std::isfinite(c.beta) || c.beta < 0.0) fail("beta must be finite and >= 0");
  for (double b : c.beta_grid) {
    if (!std::isfinite(b) || b < 0.0) fail("beta_grid entries must be finite and >= 0");
  }
  if (!std::isfinite(c.field)) fail("field must be finite");
  if (c.samples == 0) fail("sampler.samples must be positive");
  if (c.thin == 0) fail("sampler.thin must be positive");
  if (c.ell < 0) fail("diagnostics.ell must be >= 0");
  if (c.t_values.empty()) fail("diagnostics.t is empty");
  for (int t : c.t_values) {
    if (t < 0) fail("diagnostics.t entries must be >= 0");
  }
  if (c.delta && !(*c.delta > 0.0 && *c.delta < 1.0)) fail("diagnostics.delta must lie in (0, 1)");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) fail("diagnostics.epsilon must lie in [0, 1]");
  if (c.output_dir.empty()) fail("output must be non-empty");

  const bool needs_ladder = c.experiment != "validate" && c.experiment != "energy-check";
  switch (c.graph.kind) {
    case GraphKind::random:
      if (needs_ladder || c.experiment == "energy-check") {
        if (c.graph.n_ladder.empty()) fail("graph ladder graph.n is empty");
      }
      for (auto n : c.graph.n_ladder) {
        if (n <= static_cast<std::size_t>(c.graph.k) || (n * static_cast<std::size_t>(c.graph.k)) % 2 != 0) {
          fail("graph.n entry " + std::to_string(n) + " admits no simple k-regular graph");
        }
      }
      break;
    case GraphKind::disjoint:
      if (c.graph.r_ladder.empty()) fail("graph ladder graph.r is empty");
      if (c.graph.n_per <= static_cast<std::size_t>(c.graph.k) ||
          (c.graph.n_per * static_cast<std::size_t>(c.graph.k)) % 2 != 0) {
        fail("graph.n_per admits no simple k-regular graph");
      }
      for (auto r : c.graph.r_ladder) {
        if (r == 0) fail("graph.r entries must be positive");
      }
      break;
    case GraphKind::file:
      if (c.graph.path.empty()) fail("graph=file needs graph.path");
      break;
    case GraphKind::named:
      if (c.graph.k != 3) fail("named graphs are 3-regular; set graph.k = 3");
      break;
  }
  if (c.experiment == "counterexample" && c.graph.kind != GraphKind::disjoint) {
    fail("counterexample needs graph = disjoint");
  }
  if ((c.experiment == "energy-check") && c.beta_grid.empty()) fail("energy-check needs a non-empty beta_grid");
  if (c.experiment == "concentration" && c.local_functions.empty()) {
    fail("concentration needs at least one local function");
  }
  if (c.experiment != "validate" && c.experiment != "anticoncentration" && c.field != 0.0) {
    fail("this experiment is defined at field = 0");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config '" + path + "'");
  return parse_config(in);
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "experiment = " << c.experiment << '\n';
  if (const char* kind = graph_kind_name(c.graph)) {
    o << "graph = " << kind << '\n';
  } else {
    o << "graph = " << c.graph.name << '\n';
  }
  if (!c.graph.n_ladder.empty()) o << "graph.n = " << join(c.graph.n_ladder) << '\n';
  if (!c.graph.r_ladder.empty()) o << "graph.r = " << join(c.graph.r_ladder) << '\n';
  o << "graph.n_per = " << c.graph.n_per << '\n'
    << "graph.k = " << c.graph.k << '\n'
    << "graph.seed = " << c.graph.seed << '\n';
  if (!c.graph.path.empty()) o << "graph.path = " << c.graph.path << '\n';
  o << "beta = " << fmt(c.beta) << '\n';
  if (!c.beta_grid.empty()) o << "beta_grid = " << join(c.beta_grid) << '\n';
  o << "field = " << fmt(c.field) << '\n'
    << "sampler.algorithm = " << (c.algorithm ? to_string(*c.algorithm) : "auto") << '\n'
    << "sampler.samples = " << c.samples << '\n'
    << "sampler.burn_in = " << (c.burn_in ? std::to_string(*c.burn_in) : "auto") << '\n'
    << "sampler.thin = " << c.thin << '\n'
    << "sampler.seed = " << c.seed << '\n'
    << "sampler.start = " << to_string(c.start) << '\n'
    << "sampler.global_flip = " << (c.global_flip ? "true" : "false") << '\n'
    << "diagnostics.t = " << join(c.t_values) << '\n'
    << "diagnostics.ell = " << c.ell << '\n'
    << "diagnostics.delta = " << (c.delta ? fmt(*c.delta) : "auto") << '\n'
    << "diagnostics.epsilon = " << fmt(c.epsilon) << '\n';
  std::string fns;
  for (auto f : c.local_functions) fns += (fns.empty() ? "" : ",") + std::string(to_string(f));
  o << "diagnostics.local_functions = " << fns << '\n'
    << "output = " << c.output_dir << '\n'
    << "threads = " << c.threads << '\n';
  if (c.assert_mode_A_max) o << "assert.mode_A_max = " << fmt(*c.assert_mode_A_max) << '\n';
  if (c.assert_q_hat_max) o << "assert.q_hat_max = " << fmt(*c.assert_q_hat_max) << '\n';
  o << "assert.q_hat_min = " << fmt(c.assert_q_hat_min) << '\n'
    << "assert.q_hat_upper = " << fmt(c.assert_q_hat_upper) << '\n'
    << "assert.z_max = " << fmt(c.assert_z_max) << '\n'
    << "assert.identity_tol = " << fmt(c.assert_identity_tol) << '\n'
    << "assert.growth_tol = " << fmt(c.assert_growth_tol) << '\n'
    << "assert.tv_max = " << fmt(c.assert_tv_max) << '\n';
  return o.str();
}

}  // namespace ising_lwc
