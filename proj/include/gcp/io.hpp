#pragma once

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gcp/core.hpp"
#include "gcp/error.hpp"

namespace gcp {

enum class InputFormat { observations, distances, graph, network };

inline const char* to_string(InputFormat f) {
  switch (f) {
    case InputFormat::observations: return "obs";
    case InputFormat::distances: return "dist";
    case InputFormat::graph: return "graph";
    case InputFormat::network: return "network";
  }
  return "?";
}

inline InputFormat parse_input_format(const std::string& s) {
  if (s == "obs" || s == "observations") return InputFormat::observations;
  if (s == "dist" || s == "distances") return InputFormat::distances;
  if (s == "graph") return InputFormat::graph;
  if (s == "network") return InputFormat::network;
  throw error(errc::unknown_format, "unknown input format '" + s + "'");
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : line) {
    if (c == ',' || c == '\t' || c == ' ' || c == ';' || c == '\r')
      flush();
    else
      cur.push_back(c);
  }
  flush();
  return out;
}

inline bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

struct NumericTable {
  std::size_t cols = 0;
  std::vector<double> values;
  std::size_t rows() const { return cols ? values.size() / cols : 0; }
};

// Delimited numeric matrix; an optional non-numeric header line is skipped.
inline NumericTable read_table(std::istream& in, const std::string& source) {
  NumericTable t;
  std::string line;
  std::size_t lineNo = 0;
  bool seenData = false, seenHeader = false;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (!parse_double(fields[c], row[c])) {
        bad = c;
        break;
      }
    if (bad < fields.size()) {
      if (!seenData && !seenHeader) {
        seenHeader = true;
        continue;
      }
      throw error(errc::parse_error, source + ": line " + std::to_string(lineNo) + ", column " +
                                         std::to_string(bad + 1) + ": not a number '" + fields[bad] + "'");
    }
    if (!seenData) {
      t.cols = row.size();
      seenData = true;
    } else if (row.size() != t.cols) {
      throw error(errc::dimension_mismatch, source + ": line " + std::to_string(lineNo) + " has " +
                                                std::to_string(row.size()) + " fields, expected " +
                                                std::to_string(t.cols));
    }
    t.values.insert(t.values.end(), row.begin(), row.end());
  }
  return t;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot open '" + path + "'");
  return in;
}

}  // namespace detail

inline DenseObservations parse_observations(std::istream& in, const std::string& source = "<input>") {
  const auto t = detail::read_table(in, source);
  DenseObservations o;
  o.n = t.rows();
  o.d = t.cols;
  o.values = t.values;
  return o;
}

inline DistanceMatrix parse_distances(std::istream& in, const std::string& source = "<input>") {
  const auto t = detail::read_table(in, source);
  if (t.rows() != t.cols)
    throw error(errc::non_square, source + ": " + std::to_string(t.rows()) + " rows but " + std::to_string(t.cols) +
                                      " columns");
  return validate_distance_matrix(t.cols, t.values);
}

// "n <N>" on the first line, then one "i j" pair (1-based) per line.
inline SimilarityGraph parse_graph(std::istream& in, const std::string& source = "<input>") {
  std::string line;
  std::size_t lineNo = 0;
  long long n = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto f = detail::split_fields(line);
    auto where = [&](std::size_t col) {
      return source + ": line " + std::to_string(lineNo) + ", column " + std::to_string(col);
    };
    if (n < 0) {
      double v = 0;
      if (f.size() != 2 || f[0] != "n") throw error(errc::parse_error, where(1) + ": expected 'n <N>'");
      if (!detail::parse_double(f[1], v) || v < 1 || v != static_cast<long long>(v))
        throw error(errc::parse_error, where(2) + ": bad node count");
      n = static_cast<long long>(v);
      continue;
    }
    if (f.size() != 2) throw error(errc::parse_error, where(1) + ": expected 'i j'");
    long long ij[2];
    for (int c = 0; c < 2; ++c) {
      double v = 0;
      if (!detail::parse_double(f[c], v) || v != static_cast<long long>(v) || v < 1 || v > n)
        throw error(errc::parse_error, where(c + 1) + ": bad node index '" + f[c] + "'");
      ij[c] = static_cast<long long>(v);
    }
    edges.push_back({static_cast<std::uint32_t>(ij[0] - 1), static_cast<std::uint32_t>(ij[1] - 1)});
  }
  if (n < 0) throw error(errc::parse_error, source + ": missing 'n <N>' header");
  return SimilarityGraph(static_cast<std::size_t>(n), std::move(edges));
}

inline NetworkObservations read_network_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw error(errc::io_error, "'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  NetworkObservations net;
  net.n = files.size();
  for (const auto& path : files) {
    auto in = detail::open_input(path);
    const auto t = detail::read_table(in, path);
    if (t.rows() != t.cols) throw error(errc::dimension_mismatch, path + ": adjacency matrix is not square");
    if (net.adjacency.empty())
      net.m = t.cols;
    else if (t.cols != net.m)
      throw error(errc::dimension_mismatch, path + ": matrix size differs from earlier files");
    std::vector<std::uint8_t> a(t.values.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double v = t.values[k];
      if (v != 0 && v != 1) throw error(errc::dimension_mismatch, path + ": entries must be 0/1");
      a[k] = static_cast<std::uint8_t>(v);
    }
    for (std::size_t i = 0; i < net.m; ++i) {
      if (a[i * net.m + i] != 0) throw error(errc::dimension_mismatch, path + ": nonzero diagonal");
      for (std::size_t j = i + 1; j < net.m; ++j)
        if (a[i * net.m + j] != a[j * net.m + i])
          throw error(errc::dimension_mismatch, path + ": adjacency matrix is not symmetric");
    }
    net.adjacency.push_back(std::move(a));
    net.sources.push_back(path);
  }
  return net;
}

using Ingested = std::variant<ObservationSequence, SimilarityGraph>;

inline Ingested ingest(const std::string& path, InputFormat fmt) {
  switch (fmt) {
    case InputFormat::observations: {
      auto in = detail::open_input(path);
      return ObservationSequence(parse_observations(in, path));
    }
    case InputFormat::distances: {
      auto in = detail::open_input(path);
      return ObservationSequence(parse_distances(in, path));
    }
    case InputFormat::graph: {
      auto in = detail::open_input(path);
      return parse_graph(in, path);
    }
    case InputFormat::network: return ObservationSequence(read_network_dir(path));
  }
  throw error(errc::unknown_format, "unknown input format");
}

}  // namespace gcp
