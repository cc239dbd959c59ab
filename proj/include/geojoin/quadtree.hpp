#pragma once

// Quadtree partition with Z-order (Morton) leaf codes, one global inverted
// index holding per-leaf posting ranges, and the join search that probes a
// record against its own leaf and its smaller-code neighbor leaves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "geojoin/join.hpp"
#include "geojoin/model.hpp"
#include "geojoin/prefix_filter.hpp"

namespace geojoin {

// Bit-interleaved cell code, most significant level first; the quadrant digit
// per level is 2 * row_bit + col_bit.
inline std::uint64_t morton_encode(std::uint32_t col, std::uint32_t row, std::uint32_t depth) {
  if (depth > 31) throw std::out_of_range("morton depth over 31");
  if (depth < 32 && (col >= (std::uint32_t{1} << depth) || row >= (std::uint32_t{1} << depth)))
    throw std::out_of_range("morton coordinate out of range for depth");
  std::uint64_t code = 0;
  for (std::uint32_t level = depth; level-- > 0;) {
    const std::uint64_t cb = (col >> level) & 1u;
    const std::uint64_t rb = (row >> level) & 1u;
    code = (code << 2) | (rb << 1) | cb;
  }
  return code;
}

inline std::pair<std::uint32_t, std::uint32_t> morton_decode(std::uint64_t code,
                                                             std::uint32_t depth) {
  if (depth > 31) throw std::out_of_range("morton depth over 31");
  if (depth < 32 && code >= (std::uint64_t{1} << (2 * depth)))
    throw std::out_of_range("morton code out of range for depth");
  std::uint32_t col = 0, row = 0;
  for (std::uint32_t level = 0; level < depth; ++level) {
    col |= static_cast<std::uint32_t>((code >> (2 * level)) & 1u) << level;
    row |= static_cast<std::uint32_t>((code >> (2 * level + 1)) & 1u) << level;
  }
  return {col, row};
}

struct QuadTree {
  struct Node {
    double x0 = 0.0, y0 = 0.0, side = 0.0;
    std::uint32_t depth = 0;
    std::uint64_t morton = 0;
    std::int32_t child[4] = {-1, -1, -1, -1};  // quadrants in Z order
    std::uint32_t begin = 0, end = 0;          // slice of `order` (leaves only)
    bool is_leaf = false;
  };

  std::vector<Node> nodes;                 // nodes[0] is the root
  std::vector<std::uint32_t> order;        // dataset positions in (leaf Z, count, id) order
  std::vector<std::uint32_t> slot_of;      // inverse of `order`
  std::vector<std::uint32_t> leaves;       // leaf node indices in Z order
  std::vector<std::uint32_t> leaf_of_slot; // per `order` slot: leaf ordinal
  std::uint32_t max_depth = 0;
  double reach = 0.0;  // gamma_g * max_dis

  const Node& leaf(std::uint32_t ordinal) const { return nodes[leaves[ordinal]]; }
  std::size_t leaf_count() const { return leaves.size(); }

  // Z-curve interval start; totally orders leaves and matches ordinal order.
  std::uint64_t leaf_key(std::uint32_t ordinal) const {
    const Node& n = leaf(ordinal);
    return n.morton << (2 * (max_depth - n.depth));
  }
};

// Depth cap: the largest d with 2^d <= 1 / gamma_g.
inline std::uint32_t quadtree_max_depth(double gamma_g) {
  if (!(gamma_g > 0.0)) throw std::invalid_argument("quadtree requires gamma_g > 0");
  std::uint32_t d = 0;
  while (d < 24 && std::ldexp(1.0, static_cast<int>(d) + 1) <= 1.0 / gamma_g) ++d;
  return d;
}

inline QuadTree build_quadtree(const std::vector<GeoImage>& dataset, double gamma_g,
                               double max_dis, std::uint32_t leaf_capacity) {
  if (!(max_dis > 0.0)) throw std::invalid_argument("quadtree requires max_dis > 0");
  if (leaf_capacity == 0) throw std::invalid_argument("leaf capacity must be positive");
  QuadTree tree;
  tree.max_depth = quadtree_max_depth(gamma_g);
  tree.reach = gamma_g * max_dis;

  double min_x = 0.0, min_y = 0.0, side = 0.0;
  if (!dataset.empty()) {
    min_x = dataset[0].x;
    min_y = dataset[0].y;
    double max_x = min_x, max_y = min_y;
    for (const GeoImage& img : dataset) {
      min_x = std::min(min_x, img.x);
      max_x = std::max(max_x, img.x);
      min_y = std::min(min_y, img.y);
      max_y = std::max(max_y, img.y);
    }
    side = std::max(max_x - min_x, max_y - min_y);
  }

  // Within a leaf, records run ascending by token count then id: scans of the
  // own leaf stop at the probe's slot, so earlier records are never larger and
  // the short index prefix stays sound there (the flat kernel's discipline).
  std::vector<std::uint32_t> all(dataset.size());
  for (std::uint32_t i = 0; i < dataset.size(); ++i) all[i] = i;
  std::sort(all.begin(), all.end(), [&](std::uint32_t a, std::uint32_t b) {
    const std::size_t ca = dataset[a].tokens.size(), cb = dataset[b].tokens.size();
    if (ca != cb) return ca < cb;
    return dataset[a].id < dataset[b].id;
  });

  tree.nodes.push_back({min_x, min_y, side, 0, 0, {-1, -1, -1, -1}, 0, 0, false});
  tree.order.reserve(dataset.size());

  // Recursive split; children are created for all four quadrants (empty ones
  // become empty leaves) so leaf regions tile the root exactly.
  auto build = [&](auto&& self, std::int32_t node_idx, std::vector<std::uint32_t> recs) -> void {
    QuadTree::Node& node = tree.nodes[static_cast<std::size_t>(node_idx)];
    if (recs.size() <= leaf_capacity || node.depth >= tree.max_depth) {
      node.is_leaf = true;
      node.begin = static_cast<std::uint32_t>(tree.order.size());
      for (std::uint32_t r : recs) tree.order.push_back(r);
      node.end = static_cast<std::uint32_t>(tree.order.size());
      const std::uint32_t ordinal = static_cast<std::uint32_t>(tree.leaves.size());
      tree.leaves.push_back(static_cast<std::uint32_t>(node_idx));
      tree.leaf_of_slot.resize(tree.order.size(), ordinal);
      return;
    }
    const double half = node.side * 0.5;
    const double cx = node.x0 + half;
    const double cy = node.y0 + half;
    std::vector<std::uint32_t> parts[4];
    for (std::uint32_t r : recs) {
      const std::uint32_t qx = dataset[r].x >= cx ? 1u : 0u;
      const std::uint32_t qy = dataset[r].y >= cy ? 1u : 0u;
      parts[qy * 2 + qx].push_back(r);
    }
    recs.clear();
    recs.shrink_to_fit();
    const double x0 = node.x0, y0 = node.y0;
    const std::uint32_t depth = node.depth;
    const std::uint64_t morton = node.morton;
    std::int32_t children[4];
    for (std::uint32_t q = 0; q < 4; ++q) {
      children[q] = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back({x0 + (q & 1u ? half : 0.0), y0 + (q & 2u ? half : 0.0), half,
                            depth + 1, (morton << 2) | q, {-1, -1, -1, -1}, 0, 0, false});
    }
    for (std::uint32_t q = 0; q < 4; ++q)
      tree.nodes[static_cast<std::size_t>(node_idx)].child[q] = children[q];
    for (std::uint32_t q = 0; q < 4; ++q) self(self, children[q], std::move(parts[q]));
  };
  build(build, 0, std::move(all));
  tree.slot_of.resize(tree.order.size());
  for (std::uint32_t slot = 0; slot < tree.order.size(); ++slot)
    tree.slot_of[tree.order[slot]] = slot;
  return tree;
}

inline double region_min_dist(const QuadTree::Node& a, const QuadTree::Node& b) {
  const double dx = std::max({0.0, a.x0 - (b.x0 + b.side), b.x0 - (a.x0 + a.side)});
  const double dy = std::max({0.0, a.y0 - (b.y0 + b.side), b.y0 - (a.y0 + a.side)});
  return std::sqrt(dx * dx + dy * dy);
}

// All other leaves whose region lies within the distance threshold of the
// given leaf (before the smaller-code restriction).
inline std::vector<std::uint32_t> leaves_within_reach(const QuadTree& tree,
                                                      std::uint32_t ordinal) {
  const QuadTree::Node& self = tree.leaf(ordinal);
  const double limit = tree.reach * (1.0 + 1e-9);
  std::vector<std::uint32_t> out;
  for (std::uint32_t other = 0; other < tree.leaf_count(); ++other) {
    if (other == ordinal) continue;
    if (region_min_dist(self, tree.leaf(other)) <= limit) out.push_back(other);
  }
  return out;
}

// Neighbor leaves a probe in this leaf scans: within reach and strictly
// smaller in Z order (leaf ordinals follow Z order).
inline std::vector<std::uint32_t> leaf_neighbors(const QuadTree& tree, std::uint32_t ordinal) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t other : leaves_within_reach(tree, ordinal))
    if (other < ordinal) out.push_back(other);
  return out;
}

// Half-open posting range of one leaf inside one token's posting list.
struct NodeRange {
  std::uint32_t leaf = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

// Global-index posting: self-contained, so the length, geographic and
// prefix-window filters run off the contiguous list without touching the
// record table for entries that get rejected.
struct QuadPosting {
  std::uint32_t pos = 0;         // dataset position
  std::uint32_t prefix_pos = 0;  // canonical position of the token in the owner
  std::uint32_t count = 0;       // owner token count
  std::int32_t index_len = 0;    // owner index-prefix length
  float x = 0.0f, y = 0.0f;
  float wtotal = 0.0f;
};

struct GlobalIndex {
  // Posting lists by token rank, in Morton slot order, so per-leaf postings
  // are contiguous; entry.pos is the record's dataset position. The primary
  // lists hold index-prefix positions (all a scan of an equal-or-smaller
  // record needs); the extension lists hold the remaining probe-prefix
  // positions, which only matter when the indexed record is larger than the
  // probe.
  std::vector<std::vector<QuadPosting>> postings;
  std::vector<std::vector<QuadPosting>> ext_postings;
  std::vector<std::vector<NodeRange>> ranges;        // by rank, ascending leaf ordinal
  std::vector<std::vector<NodeRange>> ext_ranges;
  std::vector<std::vector<std::uint32_t>> occurs;    // by rank: leaves containing the token
  std::vector<double> leaf_max_record_weight;        // by leaf ordinal
  std::vector<std::uint64_t> occurs_bits;            // leaf-major presence bitmap
  std::size_t bit_words_per_leaf = 0;
  // Cumulative posting counts per rank over leaf ordinals: postings of leaf
  // interval [lo, hi) sit at [cum[lo], cum[hi]), so adjacent source leaves
  // coalesce into one contiguous scan.
  std::vector<std::uint32_t> cum;
  std::vector<std::uint32_t> ext_cum;
  std::size_t cum_stride = 0;  // leaf_count + 1
  // Per slot: the probe's insertion point in each probed token's primary
  // list; own-leaf scans stop exactly there.
  std::vector<std::uint32_t> own_posting_offsets;
  std::vector<std::uint32_t> own_posting_index;
  std::uint64_t entries = 0;

  static std::pair<std::uint32_t, std::uint32_t> lookup(const std::vector<NodeRange>& list,
                                                        std::uint32_t lo, std::uint32_t hi) {
    auto it = std::lower_bound(list.begin(), list.end(), lo,
                               [](const NodeRange& r, std::uint32_t leaf) { return r.leaf < leaf; });
    if (it == list.end() || it->leaf >= hi) return {0, 0};
    std::uint32_t begin = it->begin, end = it->end;
    while (it != list.end() && it->leaf < hi) end = it++->end;
    return {begin, end};
  }

  // Postings of the leaf-ordinal interval [lo, hi).
  std::pair<std::uint32_t, std::uint32_t> range_of(std::uint32_t rank, std::uint32_t lo,
                                                   std::uint32_t hi) const {
    if (cum_stride != 0) {
      const std::uint32_t* base = cum.data() + rank * cum_stride;
      return {base[lo], base[hi]};
    }
    return lookup(ranges[rank], lo, hi);
  }

  std::pair<std::uint32_t, std::uint32_t> range_of(std::uint32_t rank,
                                                   std::uint32_t leaf_ordinal) const {
    return range_of(rank, leaf_ordinal, leaf_ordinal + 1);
  }

  std::pair<std::uint32_t, std::uint32_t> ext_range_of(std::uint32_t rank, std::uint32_t lo,
                                                       std::uint32_t hi) const {
    if (cum_stride != 0) {
      const std::uint32_t* base = ext_cum.data() + rank * cum_stride;
      return {base[lo], base[hi]};
    }
    return lookup(ext_ranges[rank], lo, hi);
  }

  bool occurs_in(std::uint32_t rank, std::uint32_t leaf_ordinal) const {
    if (bit_words_per_leaf != 0)
      return (occurs_bits[leaf_ordinal * bit_words_per_leaf + rank / 64] >> (rank % 64)) & 1u;
    const auto& list = occurs[rank];
    return std::binary_search(list.begin(), list.end(), leaf_ordinal);
  }
};

// Largest weight the token can contribute anywhere / within one leaf.
inline double max_token_weight(const GlobalIndex& index, const Vocabulary& vocab,
                               std::uint32_t rank) {
  return index.occurs[rank].empty() ? 0.0 : vocab.weight_by_rank(rank);
}

inline double max_token_weight(const GlobalIndex& index, const Vocabulary& vocab,
                               std::uint32_t rank, std::uint32_t leaf_ordinal) {
  return index.occurs_in(rank, leaf_ordinal) ? vocab.weight_by_rank(rank) : 0.0;
}

namespace detail {

// Postings cover full probe-length prefixes: a probe and the records it
// scans meet in Morton order, not size order, so index prefixes alone would
// lose pairs. Positions past the owner's index prefix land in the extension
// lists. Occurrence lists cover every token position; they back the
// admission bound, which must see the whole record.
inline GlobalIndex build_global_index(const QuadTree& tree, const JoinContext& ctx) {
  GlobalIndex index;
  const std::size_t vocab_size = ctx.vocab->size();
  index.postings.resize(vocab_size);
  index.ext_postings.resize(vocab_size);
  index.ranges.resize(vocab_size);
  index.ext_ranges.resize(vocab_size);
  index.occurs.resize(vocab_size);
  index.leaf_max_record_weight.assign(tree.leaf_count(), 0.0);
  const bool full = ctx.cfg->index_full_prefix;

  const std::size_t bitmap_bytes = tree.leaf_count() * ((vocab_size + 63) / 64) * 8;
  if (bitmap_bytes > 0 && bitmap_bytes <= (std::size_t{1} << 27)) {
    index.bit_words_per_leaf = (vocab_size + 63) / 64;
    index.occurs_bits.assign(tree.leaf_count() * index.bit_words_per_leaf, 0);
  }

  auto extend_ranges = [](std::vector<NodeRange>& ranges, std::uint32_t leaf,
                          std::uint32_t end) {
    if (ranges.empty() || ranges.back().leaf != leaf)
      ranges.push_back({leaf, end - 1, end});
    else
      ranges.back().end = end;
  };

  index.own_posting_offsets.resize(tree.order.size() + 1, 0);
  for (std::uint32_t slot = 0; slot < tree.order.size(); ++slot) {
    const std::uint32_t pos = tree.order[slot];
    const RecView& v = ctx.recs[pos];
    const std::uint32_t leaf = tree.leaf_of_slot[slot];
    index.own_posting_offsets[slot + 1] =
        index.own_posting_offsets[slot] + static_cast<std::uint32_t>(std::max(v.probe_len, 0));
    for (std::int32_t i = 0; i < v.probe_len; ++i) {
      const std::uint32_t r = v.ranks[static_cast<std::size_t>(i)];
      const QuadPosting entry{pos,
                              static_cast<std::uint32_t>(i),
                              static_cast<std::uint32_t>(v.ranks.size()),
                              v.index_len,
                              static_cast<float>(v.img->x),
                              static_cast<float>(v.img->y),
                              static_cast<float>(v.wtotal)};
      index.own_posting_index.push_back(static_cast<std::uint32_t>(index.postings[r].size()));
      if (full || i < v.index_len) {
        index.postings[r].push_back(entry);
        extend_ranges(index.ranges[r], leaf,
                      static_cast<std::uint32_t>(index.postings[r].size()));
      } else {
        index.ext_postings[r].push_back(entry);
        extend_ranges(index.ext_ranges[r], leaf,
                      static_cast<std::uint32_t>(index.ext_postings[r].size()));
      }
      ++index.entries;
    }
    for (std::uint32_t r : v.ranks) {
      auto& occ = index.occurs[r];
      if (occ.empty() || occ.back() != leaf) occ.push_back(leaf);
      if (index.bit_words_per_leaf != 0)
        index.occurs_bits[leaf * index.bit_words_per_leaf + r / 64] |= std::uint64_t{1}
                                                                       << (r % 64);
    }
    index.leaf_max_record_weight[leaf] = std::max(index.leaf_max_record_weight[leaf], v.wtotal);
  }

  const std::size_t cum_bytes = vocab_size * (tree.leaf_count() + 1) * 8;
  if (cum_bytes == 0 || cum_bytes > (std::size_t{1} << 28)) return index;
  index.cum_stride = tree.leaf_count() + 1;
  index.cum.assign(vocab_size * index.cum_stride, 0);
  index.ext_cum.assign(vocab_size * index.cum_stride, 0);
  auto fill_cum = [&](const std::vector<std::vector<NodeRange>>& ranges,
                      std::vector<std::uint32_t>& cum) {
    for (std::size_t r = 0; r < vocab_size; ++r) {
      std::uint32_t* base = cum.data() + r * index.cum_stride;
      std::size_t next = 0;
      std::uint32_t running = 0;
      for (std::uint32_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
        base[leaf] = running;
        if (next < ranges[r].size() && ranges[r][next].leaf == leaf) {
          running = ranges[r][next].end;
          ++next;
        }
      }
      base[tree.leaf_count()] = running;
    }
  };
  fill_cum(index.ranges, index.cum);
  fill_cum(index.ext_ranges, index.ext_cum);
  return index;
}

// Contiguous interval of neighbor leaf ordinals scanned as one posting span.
struct SourceRun {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;  // exclusive
};

struct QuadProbeScratch {
  std::vector<double> remaining;       // admission bound per source run
  std::vector<double> required;        // sound cutoff per source run
  std::vector<std::uint8_t> tracked;   // bound can fire for this run
  std::vector<std::uint8_t> presence;  // token i present in run s: [i * nsrc + s]
};

// Probe one record (by slot) against its own leaf and its smaller-code
// neighbors. The admission bound over the remaining probe tokens stops new
// candidates once even a maximal partner in the source leaf could no longer
// reach the similarity threshold; already-admitted candidates keep
// accumulating so the positional filter always sees exact prefix overlaps.
inline void quad_probe(const QuadTree& tree, const GlobalIndex& index, const JoinContext& ctx,
                       const std::vector<std::vector<SourceRun>>& neighbor_runs,
                       std::uint32_t slot, JoinKernel& k, QuadProbeScratch& scratch) {
  const std::uint32_t pos = tree.order[slot];
  const RecView& a = ctx.recs[pos];
  if (a.ranks.empty()) return;
  const std::uint32_t own = tree.leaf_of_slot[slot];
  const bool prune = ctx.cfg->max_weight_prune;
  const double t = ctx.gamma_v;

  const std::vector<SourceRun>& runs = neighbor_runs[own];
  const std::size_t nsrc = runs.size() + 1;  // neighbor runs plus the own leaf
  auto run_of = [&](std::size_t s) {
    return s < runs.size() ? runs[s] : SourceRun{own, own + 1};
  };

  // The admission bound per source run: a candidate first seen once the
  // remaining reachable weight drops below required[s] cannot qualify, with
  // required derived from the heaviest record any leaf of the run could
  // contribute. Runs with a vacuous bound skip the bookkeeping entirely.
  scratch.tracked.assign(nsrc, 0);
  bool any_tracked = false;
  if (prune) {
    scratch.remaining.assign(nsrc, 0.0);
    scratch.required.assign(nsrc, 0.0);
    const double slack = 1e-12 * (1.0 + a.wtotal);
    for (std::size_t s = 0; s < nsrc; ++s) {
      const SourceRun run = run_of(s);
      double maxrec = 0.0;
      for (std::uint32_t leaf = run.lo; leaf < run.hi; ++leaf)
        maxrec = std::max(maxrec, index.leaf_max_record_weight[leaf]);
      const double partner = std::min(maxrec, a.wtotal / t);
      const double required = t / (1.0 + t) * (a.wtotal - t * partner);
      if (required > slack) {
        scratch.required[s] = required - slack;
        scratch.tracked[s] = 1;
        any_tracked = true;
      }
    }
    if (any_tracked) {
      scratch.presence.assign(a.ranks.size() * nsrc, 0);
      for (std::size_t i = 0; i < a.ranks.size(); ++i) {
        const std::uint32_t r = a.ranks[i];
        const double w = ctx.w[r];
        for (std::size_t s = 0; s < nsrc; ++s) {
          if (!scratch.tracked[s]) continue;
          const SourceRun run = run_of(s);
          for (std::uint32_t leaf = run.lo; leaf < run.hi; ++leaf) {
            if (index.occurs_in(r, leaf)) {
              scratch.presence[i * nsrc + s] = 1;
              scratch.remaining[s] += w;
              break;
            }
          }
        }
      }
    }
  }

  // Streaming prefilters straight off the posting entries; rejected entries
  // never touch the record table. Slack widens every approximate comparison
  // toward admission, and survivors re-run the exact checks in handle_hit.
  const std::uint32_t la = static_cast<std::uint32_t>(a.ranks.size());
  const std::int32_t a_index_len = a.index_len;
  const bool full = ctx.cfg->index_full_prefix;
  const bool uniform = ctx.uniform;
  const std::int64_t num = ctx.tv.num, den = ctx.tv.den;
  const float ax = static_cast<float>(a.img->x);
  const float ay = static_cast<float>(a.img->y);
  const float geo2 = static_cast<float>(ctx.geo_prune2 * (1.0 + 1e-4));
  const float wa = static_cast<float>(a.wtotal);
  const float wcut = static_cast<float>(t * (1.0 - 1e-5));

  auto scan = [&](const std::vector<QuadPosting>& list, std::uint32_t begin, std::uint32_t end,
                  std::int32_t i, bool admit_new, bool extension) {
    for (std::uint32_t e = begin; e < end; ++e) {
      const QuadPosting& entry = list[e];
      if (!full) {
        // Primary entries of a larger record need the probe token inside the
        // probe's own index prefix; extension entries only ever pair a larger
        // record with such tokens.
        if (extension) {
          if (entry.count <= la) continue;
        } else if (entry.count > la && i >= a_index_len) {
          continue;
        }
      }
      if (uniform) {
        if (static_cast<std::int64_t>(entry.count) * den < num * la) continue;
        if (static_cast<std::int64_t>(la) * den < num * entry.count) continue;
      } else {
        if (entry.wtotal < wcut * wa || wa < wcut * entry.wtotal) continue;
      }
      const float dx = entry.x - ax;
      const float dy = entry.y - ay;
      if (dx * dx + dy * dy > geo2) continue;
      k.handle_hit(pos, entry.pos, i, entry.prefix_pos, admit_new);
    }
  };

  k.acc.begin_probe();
  for (std::int32_t i = 0; i < a.probe_len; ++i) {
    const std::uint32_t r = a.ranks[static_cast<std::size_t>(i)];
    for (std::size_t s = 0; s < nsrc; ++s) {
      const bool admit_new =
          !scratch.tracked[s] || scratch.remaining[s] >= scratch.required[s];
      if (s < runs.size()) {
        const SourceRun run = runs[s];
        const auto [range_begin, range_end] = index.range_of(r, run.lo, run.hi);
        if (range_begin < range_end)
          scan(index.postings[r], range_begin, range_end, i, admit_new, false);
        if (full || i < a_index_len) {
          const auto [ext_begin, ext_end] = index.ext_range_of(r, run.lo, run.hi);
          if (ext_begin < ext_end)
            scan(index.ext_postings[r], ext_begin, ext_end, i, admit_new, true);
        }
      } else {
        const auto [range_begin, ignored] = index.range_of(r, own);
        (void)ignored;
        const std::uint32_t own_end =
            index.own_posting_index[index.own_posting_offsets[slot] +
                                    static_cast<std::uint32_t>(i)];
        if (range_begin < own_end)
          scan(index.postings[r], range_begin, own_end, i, admit_new, false);
      }
    }
    if (any_tracked) {
      const double w = ctx.w[r];
      for (std::size_t s = 0; s < nsrc; ++s)
        if (scratch.tracked[s] && scratch.presence[static_cast<std::size_t>(i) * nsrc + s])
          scratch.remaining[s] -= w;
    }
  }
  k.verify_probe(pos);
}

}  // namespace detail

// Public wrapper used by index-structure tests.
inline GlobalIndex build_global_index(const QuadTree& tree, const std::vector<GeoImage>& dataset,
                                      const Vocabulary& vocab, const JoinConfig& config) {
  const detail::JoinContext ctx = detail::make_context(dataset, vocab, config, /*with_geo=*/false);
  return detail::build_global_index(tree, ctx);
}

// Quadtree-partitioned spatial-visual join over one global inverted index.
inline JoinResult join_quadtree(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                                const JoinConfig& config) {
  config.validate();
  if (dataset.size() < 2) return {};
  if (!(config.gamma_g > 0.0)) throw std::invalid_argument("quadtree requires gamma_g > 0");
  const double t0 = detail::now_ms();
  const detail::JoinContext ctx = detail::make_context(dataset, vocab, config, /*with_geo=*/true);
  const QuadTree tree = build_quadtree(dataset, config.gamma_g, ctx.max_dis, config.leaf_capacity);
  const GlobalIndex index = detail::build_global_index(tree, ctx);

  // Neighbor leaves coalesce into ordinal runs; nearby gaps ride along since
  // their leaves are empty or out of reach and the geographic prefilter
  // rejects their entries.
  std::vector<std::vector<detail::SourceRun>> neighbor_runs(tree.leaf_count());
  for (std::uint32_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    std::vector<detail::SourceRun>& runs = neighbor_runs[leaf];
    for (std::uint32_t nb : leaf_neighbors(tree, leaf)) {
      if (tree.leaf(nb).begin == tree.leaf(nb).end) continue;
      if (!runs.empty() && nb <= runs.back().hi + 2)
        runs.back().hi = nb + 1;
      else
        runs.push_back({nb, nb + 1});
    }
  }
  const double t1 = detail::now_ms();

  JoinResult out;
  out.stats.index_entries = index.entries;
  const std::uint32_t n = static_cast<std::uint32_t>(tree.order.size());
  if (config.threads > 1) {
    const int threads = config.threads;
    std::vector<JoinResult> partial(static_cast<std::size_t>(threads));
    auto worker = [&](int tid) {
      detail::JoinKernel k(ctx);
      detail::QuadProbeScratch scratch;
      for (std::uint32_t s = static_cast<std::uint32_t>(tid); s < n;
           s += static_cast<std::uint32_t>(threads))
        detail::quad_probe(tree, index, ctx, neighbor_runs, s, k, scratch);
      partial[static_cast<std::size_t>(tid)] = {std::move(k.pairs), k.stats};
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (std::thread& t : pool) t.join();
    for (JoinResult& part : partial) {
      out.stats.merge(part.stats);
      out.pairs.insert(out.pairs.end(), part.pairs.begin(), part.pairs.end());
    }
  } else {
    detail::JoinKernel k(ctx);
    detail::QuadProbeScratch scratch;
    for (std::uint32_t s = 0; s < n; ++s)
      detail::quad_probe(tree, index, ctx, neighbor_runs, s, k, scratch);
    out.stats.merge(k.stats);
    out.pairs = std::move(k.pairs);
  }
  canonicalize_pairs(out.pairs);
  out.stats.results = out.pairs.size();
  out.stats.build_ms = t1 - t0;
  out.stats.join_ms = detail::now_ms() - t1;
  return out;
}

}  // namespace geojoin
