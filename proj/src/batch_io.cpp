#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ising_lwc/error.hpp"
#include "ising_lwc/sampler.hpp"

namespace ising_lwc {

void write_batch_csv(std::ostream& out, const SampleBatch& batch) {
  const auto& m = batch.meta();
  const auto old = out.precision(17);
  out << "# graph_hash=" << m.graph_hash << '\n'
      << "# n=" << batch.num_vertices() << '\n'
      << "# beta=" << m.beta << '\n'
      << "# field=" << m.field << '\n'
      << "# algorithm=" << to_string(m.algorithm) << '\n'
      << "# burn_in=" << m.burn_in << '\n'
      << "# thin=" << m.thin << '\n'
      << "# seed=" << m.seed << '\n'
      << "# conditioned=" << (m.conditioned ? "true" : "false") << '\n'
      << "# samples=" << batch.size() << '\n';
  out.precision(old);
  std::string line;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    line.clear();
    for (auto x : batch.spins(s)) {
      if (!line.empty()) line += ',';
      line += x > 0 ? "1" : "-1";
    }
    out << line << '\n';
  }
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::io_error, "bad value for " + key + ": '" + text + "'");
  }
  return value;
}

}  // namespace

SampleBatch read_batch_csv(std::istream& in) {
  std::map<std::string, std::string> header;
  std::string line;
  std::vector<std::vector<std::int8_t>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      header[key] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::int8_t> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "1" || cell == "+1") {
        row.push_back(1);
      } else if (cell == "-1") {
        row.push_back(-1);
      } else {
        throw Error(ErrorCode::io_error, "line " + std::to_string(line_no) + ": spin must be 1 or -1");
      }
    }
    rows.push_back(std::move(row));
  }
  auto get = [&header](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw Error(ErrorCode::io_error, "batch header lacks '" + key + "'");
    return it->second;
  };
  BatchMeta meta;
  meta.graph_hash = get("graph_hash");
  meta.beta = parse_number<double>("beta", get("beta"));
  meta.field = parse_number<double>("field", get("field"));
  meta.algorithm = parse_algorithm(get("algorithm"));
  meta.burn_in = parse_number<std::size_t>("burn_in", get("burn_in"));
  meta.thin = parse_number<std::size_t>("thin", get("thin"));
  meta.seed = parse_number<std::uint64_t>("seed", get("seed"));
  const auto& cond = get("conditioned");
  if (cond != "true" && cond != "false") throw Error(ErrorCode::io_error, "conditioned must be true or false");
  meta.conditioned = cond == "true";
  const auto n = parse_number<std::size_t>("n", get("n"));
  SampleBatch batch(std::move(meta), n);
  batch.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != n) throw Error(ErrorCode::io_error, "row length differs from n");
    batch.push_back(r);
  }
  if (header.count("samples") && parse_number<std::size_t>("samples", header["samples"]) != rows.size()) {
    throw Error(ErrorCode::io_error, "sample count differs from header");
  }
  if (batch.meta().conditioned) {
    for (auto m : batch.magnetizations()) {
      if (m <= 0) throw Error(ErrorCode::io_error, "conditioned batch holds a configuration with M <= 0");
    }
  }
  return batch;
}

}  // namespace ising_lwc
