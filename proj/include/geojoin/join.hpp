#pragma once

// Flat join algorithms: the PPJOIN set-similarity kernel (probe prefix scan,
// positional/suffix filters, index-prefix insertion, verify) and its variant
// with the inline geographic filter.

#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "geojoin/model.hpp"
#include "geojoin/prefix_filter.hpp"

namespace geojoin {

struct JoinStats {
  std::uint64_t candidates = 0;  // accumulator entries created
  std::uint64_t verified = 0;    // candidates reaching exact verification
  std::uint64_t results = 0;
  std::uint64_t index_entries = 0;
  double build_ms = 0.0;
  double join_ms = 0.0;

  void merge(const JoinStats& other) {
    candidates += other.candidates;
    verified += other.verified;
    results += other.results;
    index_entries += other.index_entries;
  }
};

struct JoinResult {
  PairSet pairs;
  JoinStats stats;
};

// One posting: a record (by dataset position) plus the canonical position of
// the token inside it at insertion time.
struct PostingEntry {
  std::uint32_t pos = 0;
  std::uint32_t prefix_pos = 0;
};

namespace detail {

struct RecView {
  const GeoImage* img = nullptr;
  std::vector<std::uint32_t> ranks;  // tokens as vocabulary ranks, ascending
  std::int32_t probe_len = 0;
  std::int32_t index_len = 0;
  double wtotal = 0.0;
  std::vector<double> wsuffix;  // idf mode: wsuffix[i] = weight of ranks[i..]
};

struct JoinContext {
  const std::vector<GeoImage>* dataset = nullptr;
  const Vocabulary* vocab = nullptr;
  const JoinConfig* cfg = nullptr;
  std::vector<RecView> recs;
  std::span<const double> w;
  Fraction tv;
  double gamma_v = 0.0;
  double gamma_g = 1.0;
  double max_dis = 1.0;
  double geo_prune2 = 0.0;  // (gamma_g * max_dis)^2 with admission slack
  bool geo = false;
  bool uniform = true;
};

inline double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

inline JoinContext make_context(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                                const JoinConfig& cfg, bool with_geo) {
  cfg.validate();
  JoinContext ctx;
  ctx.dataset = &dataset;
  ctx.vocab = &vocab;
  ctx.cfg = &cfg;
  ctx.w = vocab.rank_weights();
  ctx.tv = Fraction::from_double(cfg.gamma_v);
  ctx.gamma_v = cfg.gamma_v;
  ctx.uniform = vocab.scheme() == WeightScheme::uniform;
  ctx.geo = with_geo;
  if (with_geo) {
    ctx.gamma_g = cfg.gamma_g;
    ctx.max_dis = resolve_max_dis(dataset, cfg);
    const double reach = cfg.gamma_g * ctx.max_dis;
    ctx.geo_prune2 = reach * reach * (1.0 + 1e-9) + 1e-300;
  }

  ctx.recs.resize(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    RecView& v = ctx.recs[i];
    v.img = &dataset[i];
    v.ranks = to_ranks(dataset[i], vocab);
    for (std::size_t k = 1; k < v.ranks.size(); ++k)
      if (v.ranks[k - 1] >= v.ranks[k])
        throw std::invalid_argument("dataset record not canonicalized");
    if (i > 0) {
      const GeoImage& prev = dataset[i - 1];
      const GeoImage& cur = dataset[i];
      const bool ordered = prev.tokens.size() != cur.tokens.size()
                               ? prev.tokens.size() < cur.tokens.size()
                               : prev.id < cur.id;
      if (!ordered) throw std::invalid_argument("dataset not sorted ascending by token count");
    }
    const std::int64_t n = static_cast<std::int64_t>(v.ranks.size());
    if (ctx.uniform) {
      const PrefixBounds pb = prefix_bounds(n, ctx.tv);
      v.probe_len = pb.probe_len;
      v.index_len = pb.index_len;
      v.wtotal = static_cast<double>(n);
    } else {
      std::vector<double> weights(v.ranks.size());
      for (std::size_t k = 0; k < v.ranks.size(); ++k) weights[k] = ctx.w[v.ranks[k]];
      const PrefixBounds pb = prefix_bounds_weighted(weights, ctx.gamma_v, vocab.min_weight());
      v.probe_len = pb.probe_len;
      v.index_len = pb.index_len;
      v.wsuffix.assign(v.ranks.size() + 1, 0.0);
      for (std::size_t k = v.ranks.size(); k-- > 0;)
        v.wsuffix[k] = v.wsuffix[k + 1] + weights[k];
      v.wtotal = v.wsuffix[0];
    }
  }
  return ctx;
}

// Shared candidate handling for every algorithm: cheap per-pair filters, the
// overlap accumulator and the exact verification pass.
struct JoinKernel {
  const JoinContext& ctx;
  OverlapAccumulator acc;
  JoinStats stats;
  PairSet pairs;

  explicit JoinKernel(const JoinContext& c) : ctx(c) { acc.reset(c.recs.size()); }

  bool pair_passes_cheap(const RecView& a, const RecView& b) const {
    if (ctx.uniform) {
      const std::int64_t la = static_cast<std::int64_t>(a.ranks.size());
      const std::int64_t lb = static_cast<std::int64_t>(b.ranks.size());
      if (lb * ctx.tv.den < ctx.tv.num * la) return false;
      if (la * ctx.tv.den < ctx.tv.num * lb) return false;
    } else {
      const double slack = 1e-9 * (1.0 + a.wtotal + b.wtotal);
      if (b.wtotal < ctx.gamma_v * a.wtotal - slack) return false;
      if (a.wtotal < ctx.gamma_v * b.wtotal - slack) return false;
    }
    if (ctx.geo) {
      const double dx = a.img->x - b.img->x;
      const double dy = a.img->y - b.img->y;
      if (dx * dx + dy * dy > ctx.geo_prune2) return false;
    }
    return true;
  }

  // For scans where the indexed side may be larger than the probe (cross-cell
  // and neighbor-leaf postings carry full probe-length prefixes): a shared
  // token is guaranteed inside the probe prefix of the larger record and the
  // index prefix of the smaller, so hits outside that window can be skipped.
  // Equal sizes take the indexed side as the smaller one.
  bool bilateral_hit_matters(const RecView& a, const RecView& b, std::int64_t pos_a,
                             std::int64_t pos_b) const {
    if (ctx.cfg->index_full_prefix) return true;
    if (b.ranks.size() <= a.ranks.size()) return pos_b < b.index_len;
    return pos_a < a.index_len;
  }

  void handle_hit(std::uint32_t probe, std::uint32_t cand, std::int64_t pos_a, std::int64_t pos_b,
                  bool admit_new) {
    const RecView& a = ctx.recs[probe];
    const RecView& b = ctx.recs[cand];
    if (!pair_passes_cheap(a, b)) return;

    OverlapAccumulator::Slot* s;
    if (admit_new) {
      bool fresh = false;
      s = &acc.touch(cand, fresh);
      if (fresh) ++stats.candidates;
    } else {
      s = acc.peek(cand);
      if (s == nullptr) return;
    }
    if (s->dead) return;

    const JoinConfig& cfg = *ctx.cfg;
    bool ok = true;
    if (ctx.uniform) {
      const std::int64_t la = static_cast<std::int64_t>(a.ranks.size());
      const std::int64_t lb = static_cast<std::int64_t>(b.ranks.size());
      const std::int64_t alpha = overlap_threshold(la, lb, ctx.tv);
      if (cfg.positional_filter)
        ok = positional_filter(la, pos_a, lb, pos_b, s->count, alpha);
      if (ok && cfg.suffix_filter && s->count == 0)
        ok = suffix_filter(a.ranks, b.ranks, pos_a, pos_b, alpha, s->count + 1,
                           cfg.suffix_max_depth);
      if (ok) {
        ++s->count;
      } else {
        s->dead = true;
      }
    } else {
      const double alpha_w = weighted_overlap_threshold(a.wtotal, b.wtotal, ctx.gamma_v);
      const double shared = ctx.w[a.ranks[static_cast<std::size_t>(pos_a)]];
      if (cfg.positional_filter)
        ok = positional_filter_weighted(a.wsuffix[static_cast<std::size_t>(pos_a) + 1],
                                        b.wsuffix[static_cast<std::size_t>(pos_b) + 1], s->weight,
                                        shared, alpha_w);
      if (ok) {
        ++s->count;
        s->weight += shared;
      } else {
        s->dead = true;
      }
    }
  }

  void verify_probe(std::uint32_t probe) {
    const RecView& a = ctx.recs[probe];
    for (std::uint32_t cand : acc.touched()) {
      const OverlapAccumulator::Slot& s = acc.slot(cand);
      if (s.dead || s.count == 0) continue;
      ++stats.verified;
      const RecView& b = ctx.recs[cand];
      if (weighted_jaccard_ranks(a.ranks, b.ranks, ctx.w) < ctx.gamma_v) continue;
      if (ctx.geo && !(euc_dis(*a.img, *b.img) / ctx.max_dis <= ctx.gamma_g)) continue;
      const RecordId ia = a.img->id, ib = b.img->id;
      pairs.emplace_back(std::min(ia, ib), std::max(ia, ib));
    }
  }
};

// Sequential reference: probe-then-insert, one pass, each unordered pair
// considered exactly once.
inline JoinResult flat_join_sequential(const JoinContext& ctx) {
  JoinKernel k(ctx);
  const std::size_t vocab_size = ctx.vocab->size();
  std::vector<std::vector<PostingEntry>> postings(vocab_size);
  std::vector<std::uint32_t> start(ctx.uniform ? vocab_size : 0, 0);

  for (std::uint32_t p = 0; p < ctx.recs.size(); ++p) {
    const RecView& a = ctx.recs[p];
    k.acc.begin_probe();
    const std::int64_t la = static_cast<std::int64_t>(a.ranks.size());
    for (std::int32_t i = 0; i < a.probe_len; ++i) {
      const std::uint32_t r = a.ranks[static_cast<std::size_t>(i)];
      auto& list = postings[r];
      std::size_t begin = 0;
      if (ctx.uniform) {
        // Skip candidates permanently below the length filter: probe sizes
        // only grow, so the skip pointer never has to back up.
        std::uint32_t& st = start[r];
        while (st < list.size() &&
               static_cast<std::int64_t>(ctx.recs[list[st].pos].ranks.size()) * ctx.tv.den <
                   ctx.tv.num * la)
          ++st;
        begin = st;
      }
      for (std::size_t e = begin; e < list.size(); ++e)
        k.handle_hit(p, list[e].pos, i, list[e].prefix_pos, true);
    }
    k.verify_probe(p);
    const std::int32_t lim = ctx.cfg->index_full_prefix ? a.probe_len : a.index_len;
    for (std::int32_t i = 0; i < lim; ++i)
      postings[a.ranks[static_cast<std::size_t>(i)]].push_back(
          {p, static_cast<std::uint32_t>(i)});
    k.stats.index_entries += static_cast<std::uint64_t>(lim > 0 ? lim : 0);
  }
  return {std::move(k.pairs), k.stats};
}

// Two-pass parallel mode: the index is fully built first, then probes are
// partitioned across workers. Entries are in dataset order, so each probe
// stops at its own position and sees exactly the postings the sequential
// pass would have seen.
inline JoinResult flat_join_parallel(const JoinContext& ctx) {
  const std::size_t vocab_size = ctx.vocab->size();
  std::vector<std::vector<PostingEntry>> postings(vocab_size);
  std::uint64_t index_entries = 0;
  for (std::uint32_t p = 0; p < ctx.recs.size(); ++p) {
    const RecView& a = ctx.recs[p];
    const std::int32_t lim = ctx.cfg->index_full_prefix ? a.probe_len : a.index_len;
    for (std::int32_t i = 0; i < lim; ++i)
      postings[a.ranks[static_cast<std::size_t>(i)]].push_back(
          {p, static_cast<std::uint32_t>(i)});
    index_entries += static_cast<std::uint64_t>(lim > 0 ? lim : 0);
  }

  const int threads = ctx.cfg->threads;
  std::vector<JoinResult> partial(static_cast<std::size_t>(threads));
  auto worker = [&](int tid) {
    JoinKernel k(ctx);
    const std::size_t n = ctx.recs.size();
    for (std::uint32_t p = static_cast<std::uint32_t>(tid); p < n;
         p += static_cast<std::uint32_t>(threads)) {
      const RecView& a = ctx.recs[p];
      k.acc.begin_probe();
      for (std::int32_t i = 0; i < a.probe_len; ++i) {
        const auto& list = postings[a.ranks[static_cast<std::size_t>(i)]];
        for (const PostingEntry& e : list) {
          if (e.pos >= p) break;
          k.handle_hit(p, e.pos, i, e.prefix_pos, true);
        }
      }
      k.verify_probe(p);
    }
    partial[static_cast<std::size_t>(tid)] = {std::move(k.pairs), k.stats};
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (std::thread& t : pool) t.join();

  JoinResult out;
  out.stats.index_entries = index_entries;
  for (JoinResult& part : partial) {
    out.stats.merge(part.stats);
    out.pairs.insert(out.pairs.end(), part.pairs.begin(), part.pairs.end());
  }
  return out;
}

inline JoinResult flat_join(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                            const JoinConfig& cfg, bool with_geo) {
  cfg.validate();
  if (dataset.size() < 2) return {};
  const double t0 = now_ms();
  const JoinContext ctx = make_context(dataset, vocab, cfg, with_geo);
  const double t1 = now_ms();
  JoinResult res = cfg.threads > 1 ? flat_join_parallel(ctx) : flat_join_sequential(ctx);
  canonicalize_pairs(res.pairs);
  res.stats.results = res.pairs.size();
  res.stats.build_ms = t1 - t0;
  res.stats.join_ms = now_ms() - t1;
  return res;
}

}  // namespace detail

// Set-similarity self-join: all pairs with (weighted) Jaccard >= gamma_v.
// Pre: dataset canonicalized and sorted ascending by token count, ties by id.
inline JoinResult ppjoin(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                         const JoinConfig& config) {
  return detail::flat_join(dataset, vocab, config, /*with_geo=*/false);
}

// Flat spatial-visual join: the PPJOIN kernel with the geographic filter
// applied inline during posting scans and re-checked in verification.
inline JoinResult join_flat(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                            const JoinConfig& config) {
  return detail::flat_join(dataset, vocab, config, /*with_geo=*/true);
}

}  // namespace geojoin
