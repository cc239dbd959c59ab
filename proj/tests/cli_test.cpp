#include <catch2/catch.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "geojoin/dataset_io.hpp"
#include "geojoin/datagen.hpp"

using namespace geojoin;

namespace {

#ifndef GEOJOIN_CLI_PATH
#error "GEOJOIN_CLI_PATH must point at the geojoin binary"
#endif

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const std::string out_file = "cli_test_stdout.txt";
  const std::string err_file = "cli_test_stderr.txt";
  const std::string cmd =
      std::string(GEOJOIN_CLI_PATH) + " " + args + " > " + out_file + " 2> " + err_file;
  const int rc = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

}  // namespace

TEST_CASE("dataset files round-trip through write and read") {
  GenSpec spec;
  spec.n_records = 200;
  spec.vocab_size = 60;
  spec.tokens_per_record = 7;
  spec.seed = 3;
  const auto records = generate(spec);
  write_dataset("cli_test_roundtrip.txt", records);
  const auto back = read_dataset("cli_test_roundtrip.txt");
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].id == records[i].id);
    CHECK(back[i].x == records[i].x);
    CHECK(back[i].y == records[i].y);
    CHECK(back[i].tokens == records[i].tokens);
  }
}

TEST_CASE("generate is deterministic and feeds join end to end") {
  const auto gen1 = run_cli("generate -o cli_test_a.txt --records 400 --vocab 80 "
                            "--mean-tokens 8 --seed 11");
  REQUIRE(gen1.exit_code == 0);
  const auto gen2 = run_cli("generate -o cli_test_b.txt --records 400 --vocab 80 "
                            "--mean-tokens 8 --seed 11");
  REQUIRE(gen2.exit_code == 0);

  std::ifstream fa("cli_test_a.txt"), fb("cli_test_b.txt");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());

  const auto join = run_cli("join cli_test_a.txt --gamma-g 0.2 --gamma-v 0.5 --algo q "
                            "-o cli_test_q.txt");
  CHECK(join.exit_code == 0);
  CHECK(join.err.find("algo=q") != std::string::npos);
}

TEST_CASE("oracle and filtered joins write byte-identical pair files") {
  const auto gen = run_cli("generate -o cli_test_c.txt --records 300 --vocab 40 "
                           "--mean-tokens 6 --seed 17");
  REQUIRE(gen.exit_code == 0);
  for (const char* algo : {"oracle", "b", "g", "q"}) {
    const auto join = run_cli(std::string("join cli_test_c.txt --gamma-g 0.15 --gamma-v 0.5 "
                                          "--algo ") +
                              algo + " -o cli_test_" + algo + ".pairs");
    REQUIRE(join.exit_code == 0);
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string expected = slurp("cli_test_oracle.pairs");
  CHECK(expected == slurp("cli_test_b.pairs"));
  CHECK(expected == slurp("cli_test_g.pairs"));
  CHECK(expected == slurp("cli_test_q.pairs"));
}

TEST_CASE("check reports agreement with the oracle") {
  const auto gen = run_cli("generate -o cli_test_d.txt --records 250 --vocab 30 "
                           "--mean-tokens 5 --seed 23");
  REQUIRE(gen.exit_code == 0);
  const auto check = run_cli("check cli_test_d.txt --gamma-g 0.2 --gamma-v 0.5");
  CHECK(check.exit_code == 0);
  CHECK(check.out.find("b: OK") != std::string::npos);
  CHECK(check.out.find("g: OK") != std::string::npos);
  CHECK(check.out.find("q: OK") != std::string::npos);
}

TEST_CASE("malformed input reports the line and exits with a parse failure") {
  {
    std::ofstream bad("cli_test_bad.txt");
    bad << "0 1.0 2.0 3 4\n";
    bad << "1 5.0 oops 6\n";
  }
  const auto join = run_cli("join cli_test_bad.txt --gamma-g 0.1 --gamma-v 0.7");
  CHECK(join.exit_code == 1);
  CHECK(join.err.find("line 2") != std::string::npos);

  {
    std::ofstream dup("cli_test_dup.txt");
    dup << "7 1.0 2.0 3\n";
    dup << "7 2.0 3.0 4\n";
  }
  const auto dup_join = run_cli("join cli_test_dup.txt");
  CHECK(dup_join.exit_code == 1);
  CHECK(dup_join.err.find("duplicate") != std::string::npos);
}

TEST_CASE("threshold range errors exit as usage errors") {
  {
    std::ofstream ok("cli_test_ok.txt");
    ok << "0 0 0 1 2\n1 1 1 1 2\n";
  }
  CHECK(run_cli("join cli_test_ok.txt --gamma-v 1.5").exit_code == 1);
  CHECK(run_cli("join cli_test_ok.txt --gamma-g 2.0").exit_code == 1);
  CHECK(run_cli("join cli_test_ok.txt --algo zz").exit_code == 1);
}

TEST_CASE("degenerate diameter is a runtime failure unless pinned") {
  {
    std::ofstream same("cli_test_same.txt");
    same << "0 5 5 1 2\n1 5 5 1 2\n";
  }
  const auto fail = run_cli("join cli_test_same.txt --gamma-g 0.1 --gamma-v 0.5");
  CHECK(fail.exit_code == 2);
  const auto pinned =
      run_cli("join cli_test_same.txt --gamma-g 0.1 --gamma-v 0.5 --max-dis 10");
  CHECK(pinned.exit_code == 0);
  CHECK(pinned.out == "0 1\n");
}

TEST_CASE("bench writes one row per algorithm and point") {
  const auto bench =
      run_cli("bench --sweep gamma_v --scale 0.001 --algos g,q -o cli_test_bench.txt");
  REQUIRE(bench.exit_code == 0);
  std::ifstream in("cli_test_bench.txt");
  std::string line;
  int rows = 0, headers = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      ++headers;
      continue;
    }
    ++rows;
    std::istringstream fields(line);
    std::string algo, status;
    double value, wall;
    std::uint64_t candidates, verified, results, entries;
    REQUIRE((fields >> algo >> value >> wall >> candidates >> verified >> results >> entries >>
             status));
    CHECK((algo == "g" || algo == "q"));
    CHECK(status == "ok");
  }
  CHECK(headers == 2);
  CHECK(rows == 2 * 5);
}
