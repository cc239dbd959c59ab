#pragma once

// Shared helpers for the test suites: deterministic random instances and
// independent brute-force oracles kept deliberately separate from the
// library's own code paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "geojoin/model.hpp"

namespace testsupport {

// Random instance with clustered points, co-located duplicates, occasional
// empty token lists and small token universes so threshold boundaries are
// actually hit.
inline std::vector<geojoin::GeoImage> random_instance(std::mt19937_64& rng, int n, int vocab_size,
                                                      double extent = 100.0) {
  std::vector<geojoin::GeoImage> out;
  const int clusters = 1 + static_cast<int>(rng() % 5);
  std::vector<std::pair<double, double>> centers;
  for (int c = 0; c < clusters; ++c)
    centers.push_back({double(rng() % 10000) / 10000.0 * extent,
                       double(rng() % 10000) / 10000.0 * extent});
  for (int i = 0; i < n; ++i) {
    geojoin::GeoImage img;
    img.id = static_cast<geojoin::RecordId>(i);
    const auto& [cx, cy] = centers[rng() % centers.size()];
    img.x = cx + (double(rng() % 2001) - 1000.0) / 1000.0 * extent * 0.05;
    img.y = cy + (double(rng() % 2001) - 1000.0) / 1000.0 * extent * 0.05;
    const int count = static_cast<int>(rng() % 10);  // 0..9, empty lists included
    for (int k = 0; k < count; ++k)
      img.tokens.push_back(static_cast<geojoin::TokenId>(rng() % vocab_size));
    out.push_back(std::move(img));
  }
  // a co-located identical twin and an exact duplicate point
  if (n >= 4) {
    out[1].x = out[0].x;
    out[1].y = out[0].y;
    out[1].tokens = out[0].tokens;
    out[3].x = out[2].x;
    out[3].y = out[2].y;
  }
  return out;
}

inline double brute_diameter(const std::vector<geojoin::GeoImage>& records) {
  double best = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t j = i + 1; j < records.size(); ++j)
      best = std::max(best, geojoin::euc_dis(records[i], records[j]));
  return best;
}

// Weighted Jaccard recomputed with explicit set arithmetic.
inline double set_jaccard_oracle(const geojoin::GeoImage& a, const geojoin::GeoImage& b,
                                 const geojoin::Vocabulary& vocab) {
  std::set<geojoin::TokenId> sa(a.tokens.begin(), a.tokens.end());
  std::set<geojoin::TokenId> sb(b.tokens.begin(), b.tokens.end());
  std::set<geojoin::TokenId> uni = sa;
  uni.insert(sb.begin(), sb.end());
  double inter_w = 0.0, uni_w = 0.0;
  for (geojoin::TokenId t : uni) {
    const double w = vocab.weight_of(t);
    uni_w += w;
    if (sa.count(t) && sb.count(t)) inter_w += w;
  }
  return uni_w == 0.0 ? 0.0 : inter_w / uni_w;
}

inline int exact_overlap(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::set<std::uint32_t> sa(a.begin(), a.end());
  int count = 0;
  for (std::uint32_t t : b)
    if (sa.count(t)) ++count;
  return count;
}

}  // namespace testsupport
