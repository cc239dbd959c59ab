#pragma once

// Benchmark harness: sweeps one workload axis while holding the others at
// their defaults (300K records scaled by --scale, 60 words per record,
// gamma_g 0.06, gamma_v 0.7) and reports one row per (algorithm, point).

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "geojoin/datagen.hpp"
#include "geojoin/engine.hpp"

namespace geojoin {

enum class SweepAxis { size, words, gamma_g, gamma_v };

inline const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::size:
      return "size";
    case SweepAxis::words:
      return "words";
    case SweepAxis::gamma_g:
      return "gamma_g";
    case SweepAxis::gamma_v:
      return "gamma_v";
  }
  return "?";
}

inline SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "size") return SweepAxis::size;
  if (name == "words") return SweepAxis::words;
  if (name == "gamma_g") return SweepAxis::gamma_g;
  if (name == "gamma_v") return SweepAxis::gamma_v;
  throw std::invalid_argument("unknown sweep axis '" + name +
                              "' (expected size, words, gamma_g or gamma_v)");
}

struct BenchRow {
  std::string algo;
  double axis_value = 0.0;
  double wall_ms = 0.0;
  JoinStats stats;
  bool timed_out = false;
};

struct BenchOptions {
  SweepAxis axis = SweepAxis::size;
  double scale = 0.01;
  std::vector<JoinAlgorithm> algorithms = {JoinAlgorithm::flat, JoinAlgorithm::grid,
                                           JoinAlgorithm::quadtree};
  std::uint64_t seed = 42;
  double timeout_ms = 0.0;  // 0 disables; exceeding it marks the row
  int threads = 1;
};

namespace detail {

inline std::uint64_t scaled_records(double base, double scale) {
  const double n = base * scale;
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

}  // namespace detail

inline std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  if (!(opts.scale > 0.0)) throw std::invalid_argument("scale must be > 0");

  std::vector<double> points;
  switch (opts.axis) {
    case SweepAxis::size:
      points = {100000, 200000, 300000, 400000, 500000};
      break;
    case SweepAxis::words:
      points = {20, 40, 60, 80, 100};
      break;
    case SweepAxis::gamma_g:
      points = {0.02, 0.04, 0.06, 0.08, 0.10};
      break;
    case SweepAxis::gamma_v:
      points = {0.5, 0.6, 0.7, 0.8, 0.9};
      break;
  }

  std::vector<BenchRow> rows;
  for (double point : points) {
    GenSpec spec;
    spec.seed = opts.seed;
    spec.n_records = detail::scaled_records(300000, opts.scale);
    spec.tokens_per_record = 60.0;
    JoinConfig cfg;
    cfg.gamma_g = 0.06;
    cfg.gamma_v = 0.7;
    cfg.scheme = WeightScheme::uniform;
    cfg.threads = opts.threads;

    double axis_value = point;
    switch (opts.axis) {
      case SweepAxis::size:
        spec.n_records = detail::scaled_records(point, opts.scale);
        axis_value = static_cast<double>(spec.n_records);
        break;
      case SweepAxis::words:
        spec.tokens_per_record = point;
        break;
      case SweepAxis::gamma_g:
        cfg.gamma_g = point;
        break;
      case SweepAxis::gamma_v:
        cfg.gamma_v = point;
        break;
    }

    const std::vector<GeoImage> raw = generate(spec);
    const Vocabulary vocab = build_vocabulary(raw, cfg.scheme);
    const std::vector<GeoImage> dataset = prepare_dataset(raw, vocab);

    for (JoinAlgorithm algo : opts.algorithms) {
      JoinConfig run_cfg = cfg;
      run_cfg.algorithm = algo;
      const auto t0 = std::chrono::steady_clock::now();
      JoinResult res = run_join(dataset, vocab, run_cfg);
      const double wall =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
      BenchRow row;
      row.algo = algorithm_name(algo);
      row.axis_value = axis_value;
      row.wall_ms = wall;
      row.stats = res.stats;
      row.timed_out = opts.timeout_ms > 0.0 && wall > opts.timeout_ms;
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_report(std::ostream& out, SweepAxis axis, const std::vector<BenchRow>& rows) {
  out << "# sweep=" << sweep_axis_name(axis) << '\n';
  out << "# algo value wall_ms candidates verified results index_entries status\n";
  for (const BenchRow& r : rows) {
    out << r.algo << ' ' << std::setprecision(12) << r.axis_value << ' ' << std::fixed
        << std::setprecision(3) << r.wall_ms << std::defaultfloat << ' ' << r.stats.candidates
        << ' ' << r.stats.verified << ' ' << r.stats.results << ' ' << r.stats.index_entries
        << ' ' << (r.timed_out ? "timeout" : "ok") << '\n';
  }
}

}  // namespace geojoin
