#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "geojoin/model.hpp"
#include "test_support.hpp"

using namespace geojoin;

TEST_CASE("vocabulary counts distinct records and orders by rarity") {
  std::vector<GeoImage> ds = {
      {0, 0, 0, {1, 2}},
      {1, 0, 0, {2}},
      {2, 0, 0, {2, 3}},
  };
  const Vocabulary vocab = build_vocabulary(ds, WeightScheme::uniform);
  CHECK(vocab.df_of(2) == 3);
  CHECK(vocab.df_of(1) == 1);
  CHECK(vocab.df_of(3) == 1);
  // rank order: df ascending, ties by token id
  CHECK(vocab.token_at_rank(0) == 1);
  CHECK(vocab.token_at_rank(1) == 3);
  CHECK(vocab.token_at_rank(2) == 2);
  CHECK(vocab.weight_of(1) == 1.0);
  CHECK(vocab.weight_of(2) == 1.0);
}

TEST_CASE("vocabulary counts duplicates within a record once") {
  std::vector<GeoImage> ds = {{0, 0, 0, {5, 5, 5}}, {1, 0, 0, {6}}};
  const Vocabulary vocab = build_vocabulary(ds, WeightScheme::uniform);
  CHECK(vocab.df_of(5) == 1);
}

TEST_CASE("idf weights follow the smoothed formula") {
  std::vector<GeoImage> ds = {{0, 0, 0, {1, 2}}, {1, 0, 0, {2}}, {2, 0, 0, {2, 3}}};
  const Vocabulary vocab = build_vocabulary(ds, WeightScheme::idf);
  // df(2) = 3 over 3 docs: ln(4/4) + 1 = 1 exactly
  CHECK(vocab.weight_of(2) == Approx(1.0));
  CHECK(vocab.weight_of(1) == Approx(std::log(4.0 / 2.0) + 1.0));
  CHECK(vocab.weight_of(1) > 0.0);
}

TEST_CASE("ranks are a permutation ordered by document frequency") {
  std::mt19937_64 rng(11);
  const auto records = testsupport::random_instance(rng, 80, 30);
  const Vocabulary vocab = build_vocabulary(records, WeightScheme::idf);
  std::vector<bool> seen(vocab.size(), false);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    const TokenId t = vocab.token_at_rank(static_cast<std::uint32_t>(r));
    CHECK(vocab.rank_of(t) == r);
    CHECK_FALSE(seen[r]);
    seen[r] = true;
    if (r > 0) {
      const TokenId prev = vocab.token_at_rank(static_cast<std::uint32_t>(r - 1));
      CHECK(vocab.df_of(prev) <= vocab.df_of(t));
    }
  }
}

TEST_CASE("canonicalize dedupes and sorts by rank") {
  std::vector<GeoImage> ds = {{0, 0, 0, {1, 2}}, {1, 0, 0, {2}}, {2, 0, 0, {2, 3}}};
  const Vocabulary vocab = build_vocabulary(ds, WeightScheme::uniform);

  const GeoImage c = canonicalize({7, 1, 2, {2, 1, 2}}, vocab);
  CHECK(c.tokens == std::vector<TokenId>{1, 2});

  const GeoImage empty = canonicalize({8, 0, 0, {}}, vocab);
  CHECK(empty.tokens.empty());

  const GeoImage again = canonicalize(c, vocab);
  CHECK(again.tokens == c.tokens);  // idempotent

  CHECK_THROWS_AS(canonicalize({9, 0, 0, {42}}, vocab), vocabulary_mismatch);
}

TEST_CASE("canonicalization preserves the token set") {
  std::mt19937_64 rng(13);
  const auto records = testsupport::random_instance(rng, 50, 25);
  const Vocabulary vocab = build_vocabulary(records, WeightScheme::uniform);
  for (const GeoImage& img : records) {
    const GeoImage c = canonicalize(img, vocab);
    std::set<TokenId> before(img.tokens.begin(), img.tokens.end());
    std::set<TokenId> after(c.tokens.begin(), c.tokens.end());
    CHECK(before == after);
  }
}

TEST_CASE("euclidean distance basics") {
  const GeoImage a{0, 0, 0, {}};
  const GeoImage b{1, 3, 4, {}};
  const GeoImage c{2, 100, 0, {}};
  CHECK(euc_dis(a, b) == Approx(5.0));
  CHECK(euc_dis(a, a) == 0.0);
  CHECK(euc_dis(a, c) == Approx(100.0));
  CHECK(euc_dis(a, b) == euc_dis(b, a));
}

TEST_CASE("max_dis equals the brute-force pairwise maximum") {
  std::vector<GeoImage> three = {{0, 0, 0, {}}, {1, 3, 4, {}}, {2, 100, 0, {}}};
  CHECK(max_dis(three) == Approx(100.0));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<GeoImage> pts;
    const int n = 100 + static_cast<int>(rng() % 1900);
    for (int i = 0; i < n; ++i)
      pts.push_back({static_cast<RecordId>(i), double(rng() % 100000) / 101.0,
                     double(rng() % 100000) / 103.0, {}});
    CHECK(max_dis(pts) == Approx(testsupport::brute_diameter(pts)).epsilon(1e-12));
  }
}

TEST_CASE("max_dis handles collinear and degenerate inputs") {
  std::vector<GeoImage> collinear = {{0, 0, 0, {}}, {1, 5, 5, {}}, {2, 10, 10, {}}};
  CHECK(max_dis(collinear) == Approx(std::sqrt(200.0)));

  std::vector<GeoImage> same = {{0, 2, 2, {}}, {1, 2, 2, {}}, {2, 2, 2, {}}};
  CHECK_THROWS_AS(max_dis(same), degenerate_extent);

  JoinConfig cfg;
  cfg.max_dis_override = 500.0;
  CHECK(resolve_max_dis(same, cfg) == 500.0);
}

TEST_CASE("geo_dist normalizes by the diameter") {
  const GeoImage a{0, 0, 0, {}};
  const GeoImage b{1, 3, 4, {}};
  CHECK(geo_dist(a, b, 100.0) == Approx(0.05));
  CHECK(geo_dist(a, a, 100.0) == 0.0);
  CHECK(geo_sim(a, a, 100.0) == 1.0);
  const GeoImage far{2, 100, 0, {}};
  CHECK(geo_dist(a, far, 100.0) == 1.0);
  CHECK(geo_sim(a, far, 100.0) == 0.0);
}

TEST_CASE("vis_sim basics") {
  std::vector<GeoImage> ds = {{0, 0, 0, {1, 2, 3}}, {1, 0, 0, {1, 2, 3, 4}}, {2, 0, 0, {}}};
  const Vocabulary vocab = build_vocabulary(ds, WeightScheme::uniform);
  const auto a = canonicalize(ds[0], vocab);
  const auto b = canonicalize(ds[1], vocab);
  const auto empty = canonicalize(ds[2], vocab);
  CHECK(vis_sim(a, a, vocab) == 1.0);
  CHECK(vis_sim(a, b, vocab) == Approx(0.75));
  CHECK(vis_sim(a, b, vocab) == vis_sim(b, a, vocab));
  CHECK(vis_sim(empty, empty, vocab) == 0.0);
  CHECK(vis_sim(a, empty, vocab) == 0.0);
}

TEST_CASE("idf vis_sim matches explicit set arithmetic") {
  std::mt19937_64 rng(23);
  const auto records = testsupport::random_instance(rng, 60, 20);
  const Vocabulary vocab = build_vocabulary(records, WeightScheme::idf);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = canonicalize(records[rng() % records.size()], vocab);
    const auto b = canonicalize(records[rng() % records.size()], vocab);
    const double got = vis_sim(a, b, vocab);
    const double expected = testsupport::set_jaccard_oracle(a, b, vocab);
    CHECK(got == Approx(expected).margin(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("prepare_dataset sorts by token count then id") {
  std::vector<GeoImage> ds = {
      {5, 0, 0, {1, 2, 3}}, {2, 1, 1, {4}}, {9, 2, 2, {4, 5}}, {1, 3, 3, {6}}};
  const Vocabulary vocab = build_vocabulary(ds, WeightScheme::uniform);
  const auto prepared = prepare_dataset(ds, vocab);
  REQUIRE(prepared.size() == 4);
  CHECK(prepared[0].id == 1);
  CHECK(prepared[1].id == 2);
  CHECK(prepared[2].id == 9);
  CHECK(prepared[3].id == 5);
}

TEST_CASE("pair canonicalization") {
  PairSet pairs = {{3, 1}, {1, 3}, {2, 2}, {1, 2}};
  canonicalize_pairs(pairs);
  CHECK(pairs == PairSet{{1, 2}, {1, 3}});
}

TEST_CASE("config validation rejects out-of-range thresholds") {
  JoinConfig cfg;
  cfg.gamma_v = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.gamma_v = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.gamma_v = 0.7;
  cfg.gamma_g = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.gamma_g = 1.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.gamma_g = 0.06;
  CHECK_NOTHROW(cfg.validate());
}
