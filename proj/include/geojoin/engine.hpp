#pragma once

// Algorithm dispatch and name mapping shared by the CLI and the benchmark
// harness.

#include <stdexcept>
#include <string>

#include "geojoin/grid.hpp"
#include "geojoin/join.hpp"
#include "geojoin/oracle.hpp"
#include "geojoin/quadtree.hpp"

namespace geojoin {

inline JoinResult run_join(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                           const JoinConfig& config) {
  switch (config.algorithm) {
    case JoinAlgorithm::oracle:
      return brute_force_join(dataset, vocab, config);
    case JoinAlgorithm::flat:
      return join_flat(dataset, vocab, config);
    case JoinAlgorithm::grid:
      return join_grid(dataset, vocab, config);
    case JoinAlgorithm::quadtree:
      return join_quadtree(dataset, vocab, config);
  }
  throw std::logic_error("unknown join algorithm");
}

inline const char* algorithm_name(JoinAlgorithm a) {
  switch (a) {
    case JoinAlgorithm::oracle:
      return "oracle";
    case JoinAlgorithm::flat:
      return "b";
    case JoinAlgorithm::grid:
      return "g";
    case JoinAlgorithm::quadtree:
      return "q";
  }
  return "?";
}

inline JoinAlgorithm algorithm_from_name(const std::string& name) {
  if (name == "oracle") return JoinAlgorithm::oracle;
  if (name == "b") return JoinAlgorithm::flat;
  if (name == "g") return JoinAlgorithm::grid;
  if (name == "q") return JoinAlgorithm::quadtree;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected oracle, b, g or q)");
}

inline WeightScheme scheme_from_name(const std::string& name) {
  if (name == "uniform") return WeightScheme::uniform;
  if (name == "idf") return WeightScheme::idf;
  throw std::invalid_argument("unknown weight scheme '" + name + "' (expected uniform or idf)");
}

}  // namespace geojoin
