#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ising_lwc/error.hpp"
#include "ising_lwc/graph.hpp"

namespace ising_lwc {

void write_edge_list(std::ostream& out, const RegularGraph& g) {
  out << g.num_vertices() << ' ' << g.degree() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

RegularGraph read_edge_list(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw Error(ErrorCode::io_error, "edge list: missing header");
  std::size_t n = 0;
  int k = 0;
  {
    std::istringstream header(line);
    if (!(header >> n >> k)) throw Error(ErrorCode::io_error, "edge list: bad header '" + line + "'");
  }
  std::vector<Edge> edges;
  Edge previous{};
  while (next_line()) {
    std::istringstream row(line);
    long long i = -1;
    long long j = -1;
    if (!(row >> i >> j) || i < 0 || j < 0) {
      throw Error(ErrorCode::io_error, "edge list: bad row '" + line + "'");
    }
    Edge e{static_cast<Vertex>(i), static_cast<Vertex>(j)};
    if (e.u >= e.v) throw Error(ErrorCode::io_error, "edge list: rows must have i < j");
    if (!edges.empty() && !(previous < e)) {
      throw Error(ErrorCode::io_error, "edge list: rows must be strictly ascending");
    }
    previous = e;
    edges.push_back(e);
  }
  return RegularGraph(n, k, std::move(edges));
}

void save_edge_list(const std::string& path, const RegularGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  write_edge_list(out, g);
}

RegularGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return read_edge_list(in);
}

}  // namespace ising_lwc
