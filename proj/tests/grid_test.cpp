#include <catch2/catch.hpp>

#include <random>

#include "geojoin/grid.hpp"
#include "geojoin/oracle.hpp"
#include "test_support.hpp"

using namespace geojoin;

TEST_CASE("grid over the unit square with quarter cells is 4x4") {
  std::vector<GeoImage> pts;
  RecordId id = 0;
  for (double x : {0.0, 0.3, 0.6, 1.0})
    for (double y : {0.0, 0.3, 0.6, 1.0}) pts.push_back({id++, x, y, {}});
  // cell side chosen directly: gamma_g * max_dis = 0.25
  const GridIndex grid = build_grid(pts, 0.25, 1.0);
  CHECK(grid.cols == 4);
  CHECK(grid.rows == 4);
  CHECK(grid.cell_side == Approx(0.25));

  // exact max corner lands in the last cell, not out of range
  CHECK(grid.cell_of(1.0, 1.0) == 15);
  CHECK(grid.cell_of(0.0, 0.0) == 0);
}

TEST_CASE("every record is in the cell the floor rule recomputes") {
  std::mt19937_64 rng(71);
  std::vector<GeoImage> pts;
  for (int i = 0; i < 1000; ++i)
    pts.push_back({static_cast<RecordId>(i), double(rng() % 100000) / 97.0,
                   double(rng() % 100000) / 89.0, {}});
  const double extent = testsupport::brute_diameter(pts);
  const GridIndex grid = build_grid(pts, 0.07, extent);
  std::size_t total = 0;
  for (const auto& [cell_id, cell] : grid.cells) {
    total += cell.records.size();
    for (std::uint32_t pos : cell.records)
      CHECK(grid.cell_of(pts[pos].x, pts[pos].y) == cell_id);
  }
  CHECK(total == pts.size());
}

TEST_CASE("join cells follow the smaller-id rule") {
  // 10-column grid: points spanning 10 x 8 cells of side 1
  std::vector<GeoImage> pts = {{0, 0, 0, {}}, {1, 9.5, 7.5, {}}};
  const GridIndex grid = build_grid(pts, 0.1, 10.0);
  REQUIRE(grid.cols == 10);
  REQUIRE(grid.rows == 8);

  CHECK(get_join_cells(grid, 57) == std::vector<std::uint32_t>{46, 47, 48, 56, 57});
  CHECK(get_join_cells(grid, 0) == std::vector<std::uint32_t>{0});
}

TEST_CASE("edge cells see at most six candidate cells before the cut") {
  std::vector<GeoImage> pts = {{0, 0, 0, {}}, {1, 9.5, 9.5, {}}};
  const GridIndex grid = build_grid(pts, 0.1, 10.0);
  REQUIRE(grid.cols == 10);
  REQUIRE(grid.rows == 10);
  for (std::uint32_t id = 0; id < 100; ++id) {
    const std::uint32_t row = id / 10, col = id % 10;
    const bool edge = row == 0 || row == 9 || col == 0 || col == 9;
    const auto adjacent = adjacent_cells(grid, id);
    if (edge) {
      CHECK(adjacent.size() <= 6);
    } else {
      CHECK(adjacent.size() == 9);
    }
  }
}

TEST_CASE("qualifying pairs land in identical or adjacent cells") {
  std::mt19937_64 rng(73);
  for (int run = 0; run < 4; ++run) {
    const double gamma = 0.02 + 0.07 * double(rng() % 5);
    std::vector<GeoImage> pts;
    for (int i = 0; i < 400; ++i)
      pts.push_back({static_cast<RecordId>(i), double(rng() % 100000) / 100.0,
                     double(rng() % 100000) / 100.0, {}});
    // boundary-straddling pairs: second point one cell side away
    const double extent = testsupport::brute_diameter(pts);
    const double side = gamma * extent;
    for (int i = 0; i < 50; ++i) {
      const GeoImage& base = pts[static_cast<std::size_t>(rng() % 400)];
      pts.push_back({static_cast<RecordId>(1000 + i),
                     base.x + side * (double(rng() % 3) - 1.0),
                     base.y + side * (double(rng() % 3) - 1.0), {}});
    }
    const double final_extent = testsupport::brute_diameter(pts);
    const GridIndex grid = build_grid(pts, gamma, final_extent);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (geo_dist(pts[i], pts[j], final_extent) > gamma) continue;
        const std::uint32_t ca = grid.cell_of(pts[i].x, pts[i].y);
        const std::uint32_t cb = grid.cell_of(pts[j].x, pts[j].y);
        const std::int64_t dr = std::int64_t(ca / grid.cols) - std::int64_t(cb / grid.cols);
        const std::int64_t dc = std::int64_t(ca % grid.cols) - std::int64_t(cb % grid.cols);
        CHECK(std::abs(dr) <= 1);
        CHECK(std::abs(dc) <= 1);
      }
    }
  }
}

TEST_CASE("grid join reproduces the worked instance and degenerate layouts") {
  std::vector<GeoImage> raw = {
      {0, 0, 0, {1, 2, 3}}, {1, 3, 4, {1, 2, 3, 4}}, {2, 100, 0, {1}}};
  const Vocabulary vocab = build_vocabulary(raw, WeightScheme::uniform);
  const auto ds = prepare_dataset(raw, vocab);
  JoinConfig cfg;
  cfg.gamma_g = 0.06;
  cfg.gamma_v = 0.7;
  CHECK(join_grid(ds, vocab, cfg).pairs == PairSet{{0, 1}});

  // all records in one cell degenerates to the flat join
  std::mt19937_64 rng(79);
  auto clustered = testsupport::random_instance(rng, 120, 15, 1.0);
  const Vocabulary v2 = build_vocabulary(clustered, WeightScheme::uniform);
  const auto ds2 = prepare_dataset(clustered, v2);
  JoinConfig wide;
  wide.gamma_g = 1.0;
  wide.gamma_v = 0.5;
  CHECK(join_grid(ds2, v2, wide).pairs == join_flat(ds2, v2, wide).pairs);
}

TEST_CASE("grid join equals the oracle on random instances") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw =
        testsupport::random_instance(rng, 80 + int(rng() % 220), 10 + int(rng() % 50));
    JoinConfig cfg;
    cfg.gamma_g = 0.02 + 0.01 * double(rng() % 29);
    cfg.gamma_v = 0.4 + 0.01 * double(rng() % 51);
    cfg.scheme = (trial % 2) ? WeightScheme::idf : WeightScheme::uniform;
    cfg.suffix_filter = (trial % 4) < 2;
    const Vocabulary vocab = build_vocabulary(raw, cfg.scheme);
    const auto ds = prepare_dataset(raw, vocab);
    REQUIRE(join_grid(ds, vocab, cfg).pairs == brute_force_join(ds, vocab, cfg).pairs);
  }
}

TEST_CASE("grid join parallel mode matches sequential") {
  std::mt19937_64 rng(89);
  const auto raw = testsupport::random_instance(rng, 250, 18);
  const Vocabulary vocab = build_vocabulary(raw, WeightScheme::uniform);
  const auto ds = prepare_dataset(raw, vocab);
  JoinConfig cfg;
  cfg.gamma_g = 0.1;
  cfg.gamma_v = 0.5;
  JoinConfig par = cfg;
  par.threads = 3;
  CHECK(join_grid(ds, vocab, cfg).pairs == join_grid(ds, vocab, par).pairs);
}

TEST_CASE("grid rejects impossible geometries") {
  std::vector<GeoImage> pts = {{0, 0, 0, {}}, {1, 1, 1, {}}};
  CHECK_THROWS_AS(build_grid(pts, 0.0, 1.0), std::invalid_argument);
  // side so small the cell count explodes past the cap
  std::vector<GeoImage> wide = {{0, 0, 0, {}}, {1, 1e6, 1e6, {}}};
  CHECK_THROWS_AS(build_grid(wide, 1e-7, 1.0), std::invalid_argument);

  std::vector<GeoImage> raw = {{0, 0, 0, {1}}, {1, 1, 1, {1}}};
  const Vocabulary vocab = build_vocabulary(raw, WeightScheme::uniform);
  const auto ds = prepare_dataset(raw, vocab);
  JoinConfig cfg;
  cfg.gamma_g = 0.0;
  CHECK_THROWS_AS(join_grid(ds, vocab, cfg), std::invalid_argument);
}
