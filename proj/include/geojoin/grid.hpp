#pragma once

// Spatial grid partitioning: cells of side gamma_g * max_dis over the dataset
// bounding box. A qualifying pair is always in the same cell or in 8-adjacent
// cells, so each cell joins only against itself and its smaller-id neighbors.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

#include "geojoin/join.hpp"
#include "geojoin/model.hpp"
#include "geojoin/prefix_filter.hpp"

namespace geojoin {

struct GridCell {
  std::vector<std::uint32_t> records;  // dataset positions, in dataset order
  std::unordered_map<std::uint32_t, std::vector<PostingEntry>> postings;  // by rank
};

struct GridIndex {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_side = 0.0;
  std::uint32_t cols = 1;
  std::uint32_t rows = 1;
  std::unordered_map<std::uint32_t, GridCell> cells;

  static constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 26;

  std::uint32_t cell_of(double x, double y) const {
    auto clamp_floor = [](double v, std::uint32_t n) {
      double f = std::floor(v);
      if (f < 0.0) f = 0.0;
      std::uint32_t c = static_cast<std::uint32_t>(f);
      return c >= n ? n - 1 : c;
    };
    const std::uint32_t col = clamp_floor((x - origin_x) / cell_side, cols);
    const std::uint32_t row = clamp_floor((y - origin_y) / cell_side, rows);
    return row * cols + col;
  }
};

inline GridIndex build_grid(const std::vector<GeoImage>& dataset, double gamma_g,
                            double max_dis) {
  if (!(gamma_g > 0.0)) throw std::invalid_argument("grid requires gamma_g > 0");
  if (!(max_dis > 0.0)) throw std::invalid_argument("grid requires max_dis > 0");
  GridIndex grid;
  grid.cell_side = gamma_g * max_dis;
  if (!(grid.cell_side > 0.0)) throw std::invalid_argument("grid cell side underflowed to zero");
  if (dataset.empty()) return grid;

  double min_x = dataset[0].x, max_x = dataset[0].x;
  double min_y = dataset[0].y, max_y = dataset[0].y;
  for (const GeoImage& img : dataset) {
    min_x = std::min(min_x, img.x);
    max_x = std::max(max_x, img.x);
    min_y = std::min(min_y, img.y);
    max_y = std::max(max_y, img.y);
  }
  grid.origin_x = min_x;
  grid.origin_y = min_y;
  const double cols = std::max(1.0, std::ceil((max_x - min_x) / grid.cell_side));
  const double rows = std::max(1.0, std::ceil((max_y - min_y) / grid.cell_side));
  if (!(cols * rows <= static_cast<double>(GridIndex::kMaxCells)))
    throw std::invalid_argument("grid cell count over limit; use a larger gamma_g");
  grid.cols = static_cast<std::uint32_t>(cols);
  grid.rows = static_cast<std::uint32_t>(rows);

  for (std::uint32_t i = 0; i < dataset.size(); ++i)
    grid.cells[grid.cell_of(dataset[i].x, dataset[i].y)].records.push_back(i);
  return grid;
}

// 8-neighborhood of a cell including the cell itself, bounds-checked.
inline std::vector<std::uint32_t> adjacent_cells(const GridIndex& grid, std::uint32_t cell_id) {
  const std::int64_t row = cell_id / grid.cols;
  const std::int64_t col = cell_id % grid.cols;
  std::vector<std::uint32_t> out;
  for (std::int64_t dr = -1; dr <= 1; ++dr) {
    for (std::int64_t dc = -1; dc <= 1; ++dc) {
      const std::int64_t nr = row + dr;
      const std::int64_t nc = col + dc;
      if (nr < 0 || nc < 0 || nr >= grid.rows || nc >= grid.cols) continue;
      out.push_back(static_cast<std::uint32_t>(nr * grid.cols + nc));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Cells a given cell joins against: itself plus adjacent cells with a
// strictly smaller id.
inline std::vector<std::uint32_t> get_join_cells(const GridIndex& grid, std::uint32_t cell_id) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c : adjacent_cells(grid, cell_id))
    if (c <= cell_id) out.push_back(c);
  return out;
}

namespace detail {

// Postings probed across cells use full probe-length prefixes: a cross-cell
// probe may be shorter than the indexed record, and the shorter index prefix
// is only sound when probes are at least as large as what they scan.
inline void fill_cross_postings(GridIndex& grid, const JoinContext& ctx, JoinStats& stats) {
  for (auto& [cell_id, cell] : grid.cells) {
    for (std::uint32_t pos : cell.records) {
      const RecView& v = ctx.recs[pos];
      for (std::int32_t i = 0; i < v.probe_len; ++i) {
        cell.postings[v.ranks[static_cast<std::size_t>(i)]].push_back(
            {pos, static_cast<std::uint32_t>(i)});
        ++stats.index_entries;
      }
    }
  }
}

inline void grid_join_cell(const GridIndex& grid, const JoinContext& ctx, std::uint32_t cell_id,
                           const GridCell& cell, JoinKernel& k) {
  std::vector<const GridCell*> neighbors;
  for (std::uint32_t c : get_join_cells(grid, cell_id)) {
    if (c == cell_id) continue;
    auto it = grid.cells.find(c);
    if (it != grid.cells.end()) neighbors.push_back(&it->second);
  }

  std::unordered_map<std::uint32_t, std::vector<PostingEntry>> self_postings;
  for (std::uint32_t probe : cell.records) {
    const RecView& a = ctx.recs[probe];
    k.acc.begin_probe();
    for (std::int32_t i = 0; i < a.probe_len; ++i) {
      const std::uint32_t r = a.ranks[static_cast<std::size_t>(i)];
      if (auto it = self_postings.find(r); it != self_postings.end())
        for (const PostingEntry& e : it->second) k.handle_hit(probe, e.pos, i, e.prefix_pos, true);
      for (const GridCell* nb : neighbors)
        if (auto it = nb->postings.find(r); it != nb->postings.end())
          for (const PostingEntry& e : it->second) {
            if (!k.bilateral_hit_matters(a, ctx.recs[e.pos], i, e.prefix_pos)) continue;
            k.handle_hit(probe, e.pos, i, e.prefix_pos, true);
          }
    }
    k.verify_probe(probe);
    const std::int32_t lim = ctx.cfg->index_full_prefix ? a.probe_len : a.index_len;
    for (std::int32_t i = 0; i < lim; ++i)
      self_postings[a.ranks[static_cast<std::size_t>(i)]].push_back(
          {probe, static_cast<std::uint32_t>(i)});
    k.stats.index_entries += static_cast<std::uint64_t>(lim > 0 ? lim : 0);
  }
}

}  // namespace detail

// Grid-partitioned spatial-visual join. Each cell runs the flat kernel
// against itself (probe-then-insert) and probes the prebuilt posting lists
// of its smaller-id neighbor cells.
inline JoinResult join_grid(const std::vector<GeoImage>& dataset, const Vocabulary& vocab,
                            const JoinConfig& config) {
  config.validate();
  if (dataset.size() < 2) return {};
  const double t0 = detail::now_ms();
  const detail::JoinContext ctx = detail::make_context(dataset, vocab, config, /*with_geo=*/true);
  GridIndex grid = build_grid(dataset, config.gamma_g, ctx.max_dis);
  JoinStats build_stats;
  detail::fill_cross_postings(grid, ctx, build_stats);
  const double t1 = detail::now_ms();

  std::vector<std::uint32_t> cell_ids;
  cell_ids.reserve(grid.cells.size());
  for (const auto& [id, cell] : grid.cells) cell_ids.push_back(id);
  std::sort(cell_ids.begin(), cell_ids.end());

  JoinResult out;
  out.stats = build_stats;
  if (config.threads > 1) {
    const int threads = config.threads;
    std::vector<JoinResult> partial(static_cast<std::size_t>(threads));
    auto worker = [&](int tid) {
      detail::JoinKernel k(ctx);
      for (std::size_t c = static_cast<std::size_t>(tid); c < cell_ids.size();
           c += static_cast<std::size_t>(threads))
        detail::grid_join_cell(grid, ctx, cell_ids[c], grid.cells.at(cell_ids[c]), k);
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
    for (std::uint32_t id : cell_ids) detail::grid_join_cell(grid, ctx, id, grid.cells.at(id), k);
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
