// Command-line front end: synthetic dataset generation, join execution,
// oracle checking and the benchmark harness.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geojoin/geojoin.hpp"

namespace {

void print_stats(const char* algo, std::size_t records, const geojoin::JoinResult& res) {
  std::fprintf(stderr,
               "# algo=%s records=%zu pairs=%zu candidates=%llu verified=%llu "
               "index_entries=%llu build_ms=%.3f join_ms=%.3f\n",
               algo, records, res.pairs.size(),
               static_cast<unsigned long long>(res.stats.candidates),
               static_cast<unsigned long long>(res.stats.verified),
               static_cast<unsigned long long>(res.stats.index_entries), res.stats.build_ms,
               res.stats.join_ms);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace geojoin;

  CLI::App app{"Similarity join engine for geo-tagged token-set records"};
  app.require_subcommand(1);

  GenSpec spec;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("-o,--out", gen_out, "output dataset file")->required();
  gen->add_option("--records", spec.n_records, "number of records");
  gen->add_option("--vocab", spec.vocab_size, "vocabulary size");
  gen->add_option("--mean-tokens", spec.tokens_per_record, "mean tokens per record");
  gen->add_option("--skew", spec.token_skew, "Zipf exponent for token ids");
  gen->add_option("--clusters", spec.n_clusters, "spatial cluster count");
  gen->add_option("--sigma", spec.cluster_sigma, "spatial cluster spread");
  gen->add_option("--extent", spec.extent, "bounding square side");
  gen->add_option("--seed", spec.seed, "random seed");

  std::string join_input, join_out, join_algo = "q", join_weights = "uniform";
  JoinConfig cfg;
  double max_dis_flag = 0.0;
  bool no_positional = false, no_maxweight = false;
  CLI::App* join = app.add_subcommand("join", "Run a join and write the result pairs");
  join->add_option("input", join_input, "dataset file")->required();
  join->add_option("--gamma-g", cfg.gamma_g, "geographic threshold in [0,1]");
  join->add_option("--gamma-v", cfg.gamma_v, "visual threshold in (0,1]");
  join->add_option("--algo", join_algo, "oracle | b | g | q");
  join->add_option("--weights", join_weights, "uniform | idf");
  join->add_flag("--suffix-filter", cfg.suffix_filter, "enable the suffix filter");
  join->add_flag("--no-positional-filter", no_positional, "disable the positional filter");
  join->add_flag("--no-maxweight", no_maxweight, "disable the maxweight admission bound");
  join->add_option("--leaf-capacity", cfg.leaf_capacity, "quadtree leaf capacity");
  join->add_option("--max-dis", max_dis_flag, "pin the normalizing diameter");
  join->add_option("--threads", cfg.threads, "parallel probe workers");
  join->add_option("-o,--out", join_out, "pair output file (default stdout)");

  std::string check_input, check_weights = "uniform";
  std::vector<std::string> check_algos = {"b", "g", "q"};
  JoinConfig check_cfg;
  double check_max_dis = 0.0;
  CLI::App* check = app.add_subcommand("check", "Diff join algorithms against the oracle");
  check->add_option("input", check_input, "dataset file")->required();
  check->add_option("--gamma-g", check_cfg.gamma_g, "geographic threshold in [0,1]");
  check->add_option("--gamma-v", check_cfg.gamma_v, "visual threshold in (0,1]");
  check->add_option("--algo", check_algos, "algorithms to check")->delimiter(',');
  check->add_option("--weights", check_weights, "uniform | idf");
  check->add_flag("--suffix-filter", check_cfg.suffix_filter, "enable the suffix filter");
  check->add_option("--leaf-capacity", check_cfg.leaf_capacity, "quadtree leaf capacity");
  check->add_option("--max-dis", check_max_dis, "pin the normalizing diameter");
  check->add_option("--threads", check_cfg.threads, "parallel probe workers");

  std::string bench_axis = "size", bench_out;
  std::vector<std::string> bench_algos = {"b", "g", "q"};
  BenchOptions bench_opts;
  CLI::App* bench = app.add_subcommand("bench", "Sweep a workload axis and report timings");
  bench->add_option("--sweep", bench_axis, "size | words | gamma_g | gamma_v")->required();
  bench->add_option("--scale", bench_opts.scale, "record-count scale factor");
  bench->add_option("--algos", bench_algos, "algorithms to run")->delimiter(',');
  bench->add_option("--seed", bench_opts.seed, "random seed");
  bench->add_option("--timeout", bench_opts.timeout_ms, "per-point timeout in ms (marks the row)");
  bench->add_option("--threads", bench_opts.threads, "parallel probe workers");
  bench->add_option("-o,--out", bench_out, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      write_dataset(gen_out, generate(spec));
      return 0;
    }

    if (join->parsed()) {
      cfg.algorithm = algorithm_from_name(join_algo);
      cfg.scheme = scheme_from_name(join_weights);
      cfg.positional_filter = !no_positional;
      cfg.max_weight_prune = !no_maxweight;
      if (max_dis_flag != 0.0) cfg.max_dis_override = max_dis_flag;
      cfg.validate();
      const std::vector<GeoImage> raw = read_dataset(join_input);
      JoinResult res;
      if (!raw.empty()) {
        const Vocabulary vocab = build_vocabulary(raw, cfg.scheme);
        const std::vector<GeoImage> dataset = prepare_dataset(raw, vocab);
        res = run_join(dataset, vocab, cfg);
      }
      if (join_out.empty()) {
        write_pairs(std::cout, res.pairs);
      } else {
        write_pairs(join_out, res.pairs);
      }
      print_stats(join_algo.c_str(), raw.size(), res);
      return 0;
    }

    if (check->parsed()) {
      check_cfg.scheme = scheme_from_name(check_weights);
      if (check_max_dis != 0.0) check_cfg.max_dis_override = check_max_dis;
      check_cfg.validate();
      const std::vector<GeoImage> raw = read_dataset(check_input);
      if (raw.empty()) {
        std::fprintf(stderr, "# empty dataset, nothing to check\n");
        return 0;
      }
      const Vocabulary vocab = build_vocabulary(raw, check_cfg.scheme);
      const std::vector<GeoImage> dataset = prepare_dataset(raw, vocab);
      JoinConfig oracle_cfg = check_cfg;
      oracle_cfg.algorithm = JoinAlgorithm::oracle;
      const JoinResult expected = run_join(dataset, vocab, oracle_cfg);
      bool all_ok = true;
      for (const std::string& name : check_algos) {
        JoinConfig algo_cfg = check_cfg;
        algo_cfg.algorithm = algorithm_from_name(name);
        const JoinResult got = run_join(dataset, vocab, algo_cfg);
        const bool ok = got.pairs == expected.pairs;
        all_ok = all_ok && ok;
        std::printf("%s: %s (%zu pairs, oracle %zu)\n", name.c_str(),
                    ok ? "OK" : "MISMATCH", got.pairs.size(), expected.pairs.size());
      }
      return all_ok ? 0 : 3;
    }

    if (bench->parsed()) {
      bench_opts.axis = sweep_axis_from_name(bench_axis);
      bench_opts.algorithms.clear();
      for (const std::string& name : bench_algos)
        bench_opts.algorithms.push_back(algorithm_from_name(name));
      const std::vector<BenchRow> rows = run_bench(bench_opts);
      if (bench_out.empty()) {
        write_report(std::cout, bench_opts.axis, rows);
      } else {
        std::ofstream out(bench_out);
        if (!out) throw std::runtime_error("cannot open " + bench_out + " for writing");
        write_report(out, bench_opts.axis, rows);
      }
      return 0;
    }
  } catch (const geojoin::parse_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
