#pragma once

// Line-delimited dataset and pair-file formats:
//   dataset:  id x y token token ...
//   pairs:    id_a id_b                (canonical order)

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "geojoin/model.hpp"

namespace geojoin {

struct parse_error : std::runtime_error {
  std::size_t line;
  parse_error(std::size_t line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

inline void write_dataset(std::ostream& out, const std::vector<GeoImage>& records) {
  out.precision(17);
  for (const GeoImage& img : records) {
    out << img.id << ' ' << img.x << ' ' << img.y;
    for (TokenId t : img.tokens) out << ' ' << t;
    out << '\n';
  }
}

inline void write_dataset(const std::string& path, const std::vector<GeoImage>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset(out, records);
}

inline std::vector<GeoImage> read_dataset(std::istream& in) {
  std::vector<GeoImage> out;
  std::unordered_set<RecordId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    long long id = 0;
    double x = 0.0, y = 0.0;
    if (!(fields >> id)) throw parse_error(line_no, "expected a record id");
    if (id < 0 || id > 0xffffffffLL) throw parse_error(line_no, "record id out of range");
    if (!(fields >> x >> y)) throw parse_error(line_no, "expected two coordinates");
    if (!std::isfinite(x) || !std::isfinite(y))
      throw parse_error(line_no, "coordinates must be finite");
    GeoImage img;
    img.id = static_cast<RecordId>(id);
    img.x = x;
    img.y = y;
    long long token = 0;
    while (fields >> token) {
      if (token < 0 || token > 0xffffffffLL) throw parse_error(line_no, "token id out of range");
      img.tokens.push_back(static_cast<TokenId>(token));
    }
    if (!fields.eof()) throw parse_error(line_no, "malformed field");
    if (!ids.insert(img.id).second)
      throw parse_error(line_no, "duplicate record id " + std::to_string(img.id));
    out.push_back(std::move(img));
  }
  return out;
}

inline std::vector<GeoImage> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset(in);
}

inline void write_pairs(std::ostream& out, const PairSet& pairs) {
  for (const IdPair& p : pairs) out << p.first << ' ' << p.second << '\n';
}

inline void write_pairs(const std::string& path, const PairSet& pairs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_pairs(out, pairs);
}

}  // namespace geojoin
