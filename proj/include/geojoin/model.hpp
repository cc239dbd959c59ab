#pragma once

// Core record/vocabulary types and the similarity math shared by every
// join algorithm: planar distance, normalized geo distance, and weighted
// Jaccard similarity over canonically ordered token sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace geojoin {

using TokenId = std::uint32_t;
using RecordId = std::uint32_t;

// A geo-tagged record: a 2-D point plus a set of visual-word ids.
// After canonicalize(), tokens are duplicate-free and ordered by
// vocabulary rank (rarest word first).
struct GeoImage {
  RecordId id = 0;
  double x = 0.0;
  double y = 0.0;
  std::vector<TokenId> tokens;
};

struct vocabulary_mismatch : std::runtime_error {
  explicit vocabulary_mismatch(const std::string& msg) : std::runtime_error(msg) {}
};

// All points coincide: the normalizing diameter is zero and normalized
// distances are undefined.
struct degenerate_extent : std::runtime_error {
  explicit degenerate_extent(const std::string& msg) : std::runtime_error(msg) {}
};

enum class WeightScheme { uniform, idf };
enum class JoinAlgorithm { oracle, flat, grid, quadtree };

struct JoinConfig {
  double gamma_g = 0.06;  // normalized geo distance threshold, [0, 1]
  double gamma_v = 0.7;   // visual (weighted Jaccard) threshold, (0, 1]
  WeightScheme scheme = WeightScheme::uniform;
  JoinAlgorithm algorithm = JoinAlgorithm::quadtree;
  bool positional_filter = true;
  bool suffix_filter = false;
  int suffix_max_depth = 2;
  bool max_weight_prune = true;
  // Insert full probe-length prefixes into self-join indexes instead of the
  // shorter index prefixes. Reference mode used by equivalence tests.
  bool index_full_prefix = false;
  std::optional<double> max_dis_override;
  std::uint32_t leaf_capacity = 64;
  int threads = 1;

  void validate() const {
    if (!(gamma_v > 0.0 && gamma_v <= 1.0))
      throw std::invalid_argument("gamma_v must be in (0, 1]");
    if (!(gamma_g >= 0.0 && gamma_g <= 1.0))
      throw std::invalid_argument("gamma_g must be in [0, 1]");
    if (max_dis_override && !(*max_dis_override > 0.0))
      throw std::invalid_argument("max-dis override must be positive");
    if (leaf_capacity == 0)
      throw std::invalid_argument("leaf capacity must be positive");
    if (threads < 1)
      throw std::invalid_argument("threads must be >= 1");
  }
};

// Global word set with document frequencies, weights and the total rank
// order used to canonicalize token lists (ascending df, ties by token id).
class Vocabulary {
 public:
  struct TokenInfo {
    std::uint32_t df = 0;
    double weight = 1.0;
    std::uint32_t rank = 0;
  };

  Vocabulary() = default;
  Vocabulary(std::unordered_map<TokenId, TokenInfo> entries, std::vector<TokenId> by_rank,
             std::size_t n_docs, WeightScheme scheme)
      : entries_(std::move(entries)), by_rank_(std::move(by_rank)), n_docs_(n_docs),
        scheme_(scheme) {
    weights_by_rank_.resize(by_rank_.size(), 1.0);
    min_weight_ = by_rank_.empty() ? 1.0 : std::numeric_limits<double>::infinity();
    for (TokenId t : by_rank_) {
      const TokenInfo& info = entries_.at(t);
      weights_by_rank_[info.rank] = info.weight;
      min_weight_ = std::min(min_weight_, info.weight);
    }
    if (by_rank_.empty()) min_weight_ = 1.0;
  }

  bool contains(TokenId t) const { return entries_.count(t) != 0; }

  const TokenInfo& info(TokenId t) const {
    auto it = entries_.find(t);
    if (it == entries_.end())
      throw vocabulary_mismatch("token " + std::to_string(t) + " not in vocabulary");
    return it->second;
  }

  std::uint32_t rank_of(TokenId t) const { return info(t).rank; }
  double weight_of(TokenId t) const { return info(t).weight; }
  std::uint32_t df_of(TokenId t) const { return info(t).df; }

  TokenId token_at_rank(std::uint32_t rank) const { return by_rank_.at(rank); }
  double weight_by_rank(std::uint32_t rank) const { return weights_by_rank_[rank]; }
  std::span<const double> rank_weights() const { return weights_by_rank_; }

  std::size_t size() const { return by_rank_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  WeightScheme scheme() const { return scheme_; }
  double min_weight() const { return min_weight_; }

 private:
  std::unordered_map<TokenId, TokenInfo> entries_;
  std::vector<TokenId> by_rank_;
  std::vector<double> weights_by_rank_;
  std::size_t n_docs_ = 0;
  WeightScheme scheme_ = WeightScheme::uniform;
  double min_weight_ = 1.0;
};

inline double idf_weight(std::size_t n_docs, std::uint32_t df) {
  // Smoothed so a token present in every record still gets a positive weight.
  return std::log((static_cast<double>(n_docs) + 1.0) / (static_cast<double>(df) + 1.0)) + 1.0;
}

inline Vocabulary build_vocabulary(const std::vector<GeoImage>& dataset, WeightScheme scheme) {
  if (dataset.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty dataset");
  std::unordered_map<TokenId, Vocabulary::TokenInfo> entries;
  std::vector<TokenId> distinct;
  for (const GeoImage& img : dataset) {
    distinct.assign(img.tokens.begin(), img.tokens.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (TokenId t : distinct) entries[t].df += 1;
  }
  std::vector<TokenId> by_rank;
  by_rank.reserve(entries.size());
  for (const auto& [t, info] : entries) by_rank.push_back(t);
  std::sort(by_rank.begin(), by_rank.end(), [&](TokenId a, TokenId b) {
    const std::uint32_t da = entries[a].df, db = entries[b].df;
    return da != db ? da < db : a < b;
  });
  for (std::uint32_t r = 0; r < by_rank.size(); ++r) {
    Vocabulary::TokenInfo& info = entries[by_rank[r]];
    info.rank = r;
    info.weight = scheme == WeightScheme::uniform ? 1.0 : idf_weight(dataset.size(), info.df);
  }
  return Vocabulary(std::move(entries), std::move(by_rank), dataset.size(), scheme);
}

// Deduplicates tokens and sorts them ascending by vocabulary rank.
inline GeoImage canonicalize(const GeoImage& img, const Vocabulary& vocab) {
  GeoImage out{img.id, img.x, img.y, {}};
  std::vector<std::uint32_t> ranks;
  ranks.reserve(img.tokens.size());
  for (TokenId t : img.tokens) ranks.push_back(vocab.rank_of(t));
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  out.tokens.reserve(ranks.size());
  for (std::uint32_t r : ranks) out.tokens.push_back(vocab.token_at_rank(r));
  return out;
}

// Canonicalizes every record and sorts the dataset ascending by token count,
// ties by id: the input order the prefix-filter joins require.
inline std::vector<GeoImage> prepare_dataset(const std::vector<GeoImage>& records,
                                             const Vocabulary& vocab) {
  std::vector<GeoImage> out;
  out.reserve(records.size());
  for (const GeoImage& img : records) out.push_back(canonicalize(img, vocab));
  std::sort(out.begin(), out.end(), [](const GeoImage& a, const GeoImage& b) {
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
    return a.id < b.id;
  });
  return out;
}

inline double euc_dis(const GeoImage& a, const GeoImage& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

namespace detail {

struct Point {
  double x, y;
  friend bool operator<(const Point& a, const Point& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  }
  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Monotone chain, strict turns (collinear points dropped).
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Rotating calipers over a strictly convex CCW hull.
inline double hull_diameter(const std::vector<Point>& h) {
  const std::size_t m = h.size();
  if (m < 2) return 0.0;
  if (m == 2) return std::sqrt(dist2(h[0], h[1]));
  double best = 0.0;
  std::size_t k = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    while (std::abs(cross(h[i], h[j], h[(k + 1) % m])) > std::abs(cross(h[i], h[j], h[k])))
      k = (k + 1) % m;
    best = std::max(best, std::max(dist2(h[i], h[k]), dist2(h[j], h[k])));
  }
  return std::sqrt(best);
}

}  // namespace detail

// Exact diameter of the point set (convex hull + rotating calipers).
inline double max_dis(const std::vector<GeoImage>& dataset) {
  std::vector<detail::Point> pts;
  pts.reserve(dataset.size());
  for (const GeoImage& img : dataset) pts.push_back({img.x, img.y});
  std::vector<detail::Point> hull = detail::convex_hull(std::move(pts));
  if (hull.size() < 2)
    throw degenerate_extent("all points coincide; normalized distance is undefined");
  return detail::hull_diameter(hull);
}

inline double resolve_max_dis(const std::vector<GeoImage>& dataset, const JoinConfig& config) {
  if (config.max_dis_override) return *config.max_dis_override;
  return max_dis(dataset);
}

// Normalized distance in [0, 1] for in-extent points. The join predicate is
// geo_dist(a, b) <= gamma_g everywhere.
inline double geo_dist(const GeoImage& a, const GeoImage& b, double max_dis) {
  return euc_dis(a, b) / max_dis;
}

inline double geo_sim(const GeoImage& a, const GeoImage& b, double max_dis) {
  return 1.0 - geo_dist(a, b, max_dis);
}

// Weighted Jaccard over rank-sorted token lists. Every similarity decision in
// the project funnels through this one accumulation so that filtered joins
// and the brute-force oracle agree bit for bit.
inline double weighted_jaccard_ranks(std::span<const std::uint32_t> a,
                                     std::span<const std::uint32_t> b,
                                     std::span<const double> weight_by_rank) {
  std::size_t i = 0, j = 0;
  double inter = 0.0, uni = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      const double w = weight_by_rank[a[i]];
      inter += w;
      uni += w;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      uni += weight_by_rank[a[i]];
      ++i;
    } else {
      uni += weight_by_rank[b[j]];
      ++j;
    }
  }
  for (; i < a.size(); ++i) uni += weight_by_rank[a[i]];
  for (; j < b.size(); ++j) uni += weight_by_rank[b[j]];
  return uni == 0.0 ? 0.0 : inter / uni;
}

namespace detail {

inline std::vector<std::uint32_t> to_ranks(const GeoImage& img, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ranks;
  ranks.reserve(img.tokens.size());
  for (TokenId t : img.tokens) ranks.push_back(vocab.rank_of(t));
  return ranks;
}

}  // namespace detail

// Pre: both records canonicalized against vocab.
inline double vis_sim(const GeoImage& a, const GeoImage& b, const Vocabulary& vocab) {
  const std::vector<std::uint32_t> ra = detail::to_ranks(a, vocab);
  const std::vector<std::uint32_t> rb = detail::to_ranks(b, vocab);
  return weighted_jaccard_ranks(ra, rb, vocab.rank_weights());
}

using IdPair = std::pair<RecordId, RecordId>;
using PairSet = std::vector<IdPair>;

// Normalizes each pair to id_a < id_b, sorts lexicographically, removes
// duplicates and self pairs.
inline void canonicalize_pairs(PairSet& pairs) {
  for (IdPair& p : pairs)
    if (p.first > p.second) std::swap(p.first, p.second);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                             [](const IdPair& p) { return p.first == p.second; }),
              pairs.end());
}

}  // namespace geojoin
