#pragma once

// Brute-force nested-loop reference join. No filters, no indexes: the ground
// truth every indexed algorithm is tested against.

#include <algorithm>
#include <vector>

#include "geojoin/join.hpp"
#include "geojoin/model.hpp"

namespace geojoin {

inline JoinResult brute_force_join(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                                   const JoinConfig& config) {
  config.validate();
  if (dataset.size() < 2) return {};
  const double t0 = detail::now_ms();
  const double extent = resolve_max_dis(dataset, config);
  JoinResult res;
  const std::size_t n = dataset.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++res.stats.candidates;
      ++res.stats.verified;
      const GeoImage& a = dataset[i];
      const GeoImage& b = dataset[j];
      if (geo_dist(a, b, extent) > config.gamma_g) continue;
      if (vis_sim(a, b, vocab) < config.gamma_v) continue;
      res.pairs.emplace_back(std::min(a.id, b.id), std::max(a.id, b.id));
    }
  }
  canonicalize_pairs(res.pairs);
  res.stats.results = res.pairs.size();
  res.stats.join_ms = detail::now_ms() - t0;
  return res;
}

}  // namespace geojoin
