#pragma once

// Deterministic synthetic corpus generator: clustered points over a square
// extent, Zipf-distributed token ids, Poisson token counts. Identical spec
// (including seed) reproduces the identical dataset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "geojoin/model.hpp"

namespace geojoin {

struct GenSpec {
  std::uint64_t n_records = 1000;
  std::uint32_t vocab_size = 1000;
  double tokens_per_record = 60.0;  // Poisson mean, min 1 per record
  double token_skew = 1.0;          // Zipf exponent; 0 = uniform
  std::uint32_t n_clusters = 100;
  double cluster_sigma = 20.0;
  double extent = 1000.0;
  std::uint64_t seed = 42;

  void validate() const {
    if (vocab_size < 1) throw std::invalid_argument("vocab size must be >= 1");
    if (n_records < 1) throw std::invalid_argument("record count must be >= 1");
    if (n_clusters < 1) throw std::invalid_argument("cluster count must be >= 1");
    if (!(tokens_per_record > 0.0)) throw std::invalid_argument("mean token count must be > 0");
    if (cluster_sigma < 0.0) throw std::invalid_argument("cluster sigma must be >= 0");
    if (!(extent > 0.0)) throw std::invalid_argument("extent must be > 0");
    if (token_skew < 0.0) throw std::invalid_argument("token skew must be >= 0");
  }
};

namespace detail {

// Samplers are hand-rolled on top of mt19937_64: the standard distributions
// are implementation-defined and would break cross-build reproducibility.
class GenRng {
 public:
  explicit GenRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  double next_double() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  std::uint64_t poisson(double lambda) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

class ZipfSampler {
 public:
  ZipfSampler(std::uint32_t n, double skew) : cumulative_(n) {
    double sum = 0.0;
    for (std::uint32_t k = 0; k < n; ++k) {
      sum += 1.0 / std::pow(static_cast<double>(k) + 1.0, skew);
      cumulative_[k] = sum;
    }
    for (double& c : cumulative_) c /= sum;
  }

  std::uint32_t sample(double u) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
    return static_cast<std::uint32_t>(std::min(k, cumulative_.size() - 1));
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace detail

inline std::vector<GeoImage> generate(const GenSpec& spec) {
  spec.validate();
  detail::GenRng rng(spec.seed);
  const detail::ZipfSampler zipf(spec.vocab_size, spec.token_skew);

  std::vector<std::pair<double, double>> centers(spec.n_clusters);
  for (auto& [cx, cy] : centers) {
    cx = rng.next_double() * spec.extent;
    cy = rng.next_double() * spec.extent;
  }

  auto clamp_extent = [&](double v) { return std::clamp(v, 0.0, spec.extent); };

  std::vector<GeoImage> out;
  out.reserve(spec.n_records);
  std::unordered_set<TokenId> seen;
  for (std::uint64_t i = 0; i < spec.n_records; ++i) {
    GeoImage img;
    img.id = static_cast<RecordId>(i);
    const auto& [cx, cy] = centers[rng.next_u64() % spec.n_clusters];
    img.x = clamp_extent(cx + spec.cluster_sigma * rng.gaussian());
    img.y = clamp_extent(cy + spec.cluster_sigma * rng.gaussian());
    const std::uint64_t count = std::max<std::uint64_t>(1, rng.poisson(spec.tokens_per_record));
    seen.clear();
    img.tokens.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      const TokenId t = zipf.sample(rng.next_double());
      if (seen.insert(t).second) img.tokens.push_back(t);
    }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace geojoin
