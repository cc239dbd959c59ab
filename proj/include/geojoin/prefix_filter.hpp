#pragma once

// Prefix-filtering machinery: probe/index prefix lengths, the overlap
// threshold, the positional filter, a depth-bounded suffix filter and the
// exact pair verification all joins share.
//
// Threshold arithmetic for the uniform scheme runs on exact integer
// fractions; ceil(gamma * n) computed in floating point is off by one
// whenever gamma * n lands on an integer.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "geojoin/model.hpp"

namespace geojoin {

// A threshold as an exact integer ratio, recovered from the shortest decimal
// representation of the double (what the caller actually wrote).
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction from_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::invalid_argument("unprintable threshold");
    std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));

    bool negative = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
      negative = s[i] == '-';
      ++i;
    }
    std::int64_t digits = 0;
    int frac_digits = 0;
    bool in_fraction = false;
    int exp10 = 0;
    for (; i < s.size(); ++i) {
      const char c = s[i];
      if (c == '.') {
        in_fraction = true;
      } else if (c == 'e' || c == 'E') {
        int e = 0;
        auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + s.size(), e);
        if (ec != std::errc{}) throw std::invalid_argument("bad threshold exponent");
        exp10 = e;
        break;
      } else {
        digits = digits * 10 + (c - '0');
        if (in_fraction) ++frac_digits;
      }
    }
    int denom_pow = frac_digits - exp10;
    Fraction f;
    f.num = negative ? -digits : digits;
    f.den = 1;
    while (denom_pow > 0) {
      if (f.den > 922337203685477580LL) throw std::invalid_argument("threshold precision out of range");
      f.den *= 10;
      --denom_pow;
    }
    while (denom_pow < 0) {
      if (f.num > 922337203685477580LL) throw std::invalid_argument("threshold magnitude out of range");
      f.num *= 10;
      ++denom_pow;
    }
    const std::int64_t g = std::gcd(f.num < 0 ? -f.num : f.num, f.den);
    if (g > 1) {
      f.num /= g;
      f.den /= g;
    }
    return f;
  }
};

namespace detail {

inline std::int64_t ceil_ratio(__int128 num, __int128 den) {
  return static_cast<std::int64_t>((num + den - 1) / den);
}

// ceil(f * n) for f > 0, n >= 0.
inline std::int64_t ceil_mul(const Fraction& f, std::int64_t n) {
  return ceil_ratio(static_cast<__int128>(f.num) * n, f.den);
}

}  // namespace detail

struct PrefixBounds {
  std::int32_t probe_len = 0;  // positions scanned when probing
  std::int32_t index_len = 0;  // positions inserted when indexing (self-join order)
};

// Uniform-weight prefix lengths:
//   probe = n - ceil(t * n) + 1, index = n - ceil(2t/(1+t) * n) + 1.
inline PrefixBounds prefix_bounds(std::int64_t token_count, const Fraction& gamma_v) {
  if (token_count <= 0) return {0, 0};
  const std::int64_t probe = token_count - detail::ceil_mul(gamma_v, token_count) + 1;
  const std::int64_t index =
      token_count -
      detail::ceil_ratio(static_cast<__int128>(2) * gamma_v.num * token_count,
                         gamma_v.num + gamma_v.den) +
      1;
  return {static_cast<std::int32_t>(probe), static_cast<std::int32_t>(index)};
}

inline PrefixBounds prefix_bounds(std::int64_t token_count, double gamma_v) {
  return prefix_bounds(token_count, Fraction::from_double(gamma_v));
}

// Weighted generalization. The probe prefix is the shortest prefix whose
// remaining suffix weight cannot on its own reach gamma_v * W. The index
// prefix additionally exploits that in self-join probe order any later
// partner A has at least as many tokens, so W_A >= n * min_token_weight and
// the required overlap is at least t/(1+t) * (n * min_w + W). The slack keeps
// floating-point roundoff from ever shortening a prefix.
inline PrefixBounds prefix_bounds_weighted(std::span<const double> weights, double gamma_v,
                                           double min_token_weight) {
  const std::int64_t n = static_cast<std::int64_t>(weights.size());
  if (n == 0) return {0, 0};
  double total = 0.0;
  for (double w : weights) total += w;
  const double slack = 1e-9 * (1.0 + total);
  const double probe_cut = gamma_v * total - slack;
  const double index_cut =
      gamma_v / (1.0 + gamma_v) * (static_cast<double>(n) * min_token_weight + total) - slack;

  std::int64_t probe = n, index = n;
  double suffix = total;
  for (std::int64_t k = 0; k <= n; ++k) {
    if (k > 0) suffix -= weights[static_cast<std::size_t>(k - 1)];
    if (probe == n && suffix < probe_cut) probe = std::min<std::int64_t>(probe, k);
    if (index == n && suffix < index_cut) index = std::min<std::int64_t>(index, k);
    if (probe < n && index < n) break;
  }
  return {static_cast<std::int32_t>(std::max<std::int64_t>(probe, 1)),
          static_cast<std::int32_t>(std::max<std::int64_t>(index, 1))};
}

// Minimum overlap for Jaccard >= gamma_v between sets of the given sizes:
// alpha = ceil(t/(1+t) * (len_a + len_b)).
inline std::int64_t overlap_threshold(std::int64_t len_a, std::int64_t len_b,
                                      const Fraction& gamma_v) {
  return detail::ceil_ratio(static_cast<__int128>(gamma_v.num) * (len_a + len_b),
                            gamma_v.num + gamma_v.den);
}

inline std::int64_t overlap_threshold(std::int64_t len_a, std::int64_t len_b, double gamma_v) {
  return overlap_threshold(len_a, len_b, Fraction::from_double(gamma_v));
}

inline double weighted_overlap_threshold(double weight_a, double weight_b, double gamma_v) {
  return gamma_v / (1.0 + gamma_v) * (weight_a + weight_b);
}

// True iff the suffixes past the shared token could still reach alpha.
inline bool positional_filter(std::int64_t len_a, std::int64_t pos_a, std::int64_t len_b,
                              std::int64_t pos_b, std::int64_t current_overlap,
                              std::int64_t alpha) {
  return current_overlap + 1 + std::min(len_a - pos_a - 1, len_b - pos_b - 1) >= alpha;
}

inline bool positional_filter_weighted(double suffix_weight_a, double suffix_weight_b,
                                       double current_weight, double shared_weight,
                                       double alpha_weight) {
  const double slack = 1e-9 * (1.0 + alpha_weight);
  return current_weight + shared_weight + std::min(suffix_weight_a, suffix_weight_b) >=
         alpha_weight - slack;
}

namespace detail {

// Depth-bounded divide-and-conquer lower bound on the Hamming distance of two
// sorted token ranges. Never exceeds the true distance.
inline std::int64_t hamming_lower_bound(std::span<const std::uint32_t> a,
                                        std::span<const std::uint32_t> b, std::int64_t limit,
                                        int depth, int max_depth) {
  const std::int64_t la = static_cast<std::int64_t>(a.size());
  const std::int64_t lb = static_cast<std::int64_t>(b.size());
  if (la == 0 || lb == 0) return la + lb;
  if (depth > max_depth) return la > lb ? la - lb : lb - la;

  const std::size_t mid = a.size() / 2;
  const std::uint32_t pivot = a[mid];
  const auto it = std::lower_bound(b.begin(), b.end(), pivot);
  const std::size_t split = static_cast<std::size_t>(it - b.begin());
  const bool found = it != b.end() && *it == pivot;

  const auto al = a.subspan(0, mid);
  const auto ar = a.subspan(mid + 1);
  const auto bl = b.subspan(0, split);
  const auto br = b.subspan(split + (found ? 1 : 0));
  const std::int64_t d0 = found ? 0 : 1;

  auto size_diff = [](std::span<const std::uint32_t> x, std::span<const std::uint32_t> y) {
    const std::int64_t lx = static_cast<std::int64_t>(x.size());
    const std::int64_t ly = static_cast<std::int64_t>(y.size());
    return lx > ly ? lx - ly : ly - lx;
  };

  const std::int64_t right_floor = size_diff(ar, br);
  std::int64_t bound = size_diff(al, bl) + right_floor + d0;
  if (bound > limit) return bound;

  const std::int64_t left = hamming_lower_bound(al, bl, limit - right_floor - d0, depth + 1, max_depth);
  if (left + right_floor + d0 > limit) return left + right_floor + d0;
  const std::int64_t right = hamming_lower_bound(ar, br, limit - left - d0, depth + 1, max_depth);
  return left + right + d0;
}

}  // namespace detail

// Suffix filter: true iff the divide-and-conquer mismatch bound on the
// suffixes after (pos_a, pos_b) cannot prove total overlap < alpha.
// max_depth <= 0 degenerates to a no-op.
inline bool suffix_filter(std::span<const std::uint32_t> a_tokens,
                          std::span<const std::uint32_t> b_tokens, std::int64_t pos_a,
                          std::int64_t pos_b, std::int64_t alpha, std::int64_t overlap_so_far,
                          int max_depth) {
  if (max_depth <= 0) return true;
  const std::int64_t needed = alpha - overlap_so_far;
  if (needed <= 0) return true;
  const auto sa = a_tokens.subspan(static_cast<std::size_t>(pos_a + 1));
  const auto sb = b_tokens.subspan(static_cast<std::size_t>(pos_b + 1));
  const std::int64_t allowance =
      static_cast<std::int64_t>(sa.size()) + static_cast<std::int64_t>(sb.size()) - 2 * needed;
  if (allowance < 0) return false;
  return detail::hamming_lower_bound(sa, sb, allowance, 1, max_depth) <= allowance;
}

// Exact verification of the join predicate; the single source of truth a
// candidate pair must pass.
inline bool verify_pair(const GeoImage& a, const GeoImage& b, const Vocabulary& vocab,
                        double gamma_v) {
  return vis_sim(a, b, vocab) >= gamma_v;
}

inline bool verify_pair(const GeoImage& a, const GeoImage& b, const Vocabulary& vocab,
                        double gamma_v, double gamma_g, double max_dis) {
  return geo_dist(a, b, max_dis) <= gamma_g && vis_sim(a, b, vocab) >= gamma_v;
}

// Per-probe overlap accumulator with O(1) reuse across probes. A candidate
// disqualified by a filter stays disqualified; its count never grows again.
class OverlapAccumulator {
 public:
  struct Slot {
    std::uint32_t epoch = 0;
    std::int32_t count = 0;
    double weight = 0.0;
    bool dead = false;
  };

  void reset(std::size_t n) {
    slots_.assign(n, Slot{});
    touched_.clear();
    epoch_ = 0;
  }

  void begin_probe() {
    touched_.clear();
    ++epoch_;
  }

  // Returns the candidate slot, marking whether this is its first touch in
  // the current probe.
  Slot& touch(std::uint32_t candidate, bool& fresh) {
    Slot& s = slots_[candidate];
    fresh = s.epoch != epoch_;
    if (fresh) {
      s.epoch = epoch_;
      s.count = 0;
      s.weight = 0.0;
      s.dead = false;
      touched_.push_back(candidate);
    }
    return s;
  }

  // Slot if the candidate was already touched during the current probe.
  Slot* peek(std::uint32_t candidate) {
    Slot& s = slots_[candidate];
    return s.epoch == epoch_ ? &s : nullptr;
  }

  const Slot& slot(std::uint32_t candidate) const { return slots_[candidate]; }
  std::span<const std::uint32_t> touched() const { return touched_; }

 private:
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> touched_;
  std::uint32_t epoch_ = 0;
};

}  // namespace geojoin
