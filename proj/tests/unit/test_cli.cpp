#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "coinfer/io.hpp"
#include "coinfer/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(COINFER_CLI_PATH) + " " + args + " 2>&1";
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) result.output += buf.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "coinfer_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string problem_json() {
  return R"({
  "workload": {"agent_gflops": 212.27, "server_gflops": 321.39,
               "native_bits": 16, "b_max": 16},
  "device": {"f_max_ghz": 2.0, "flops_per_cycle": 32, "pue": 1.0,
             "power_coeff": 2e-29},
  "server": {"f_max_ghz": 10.0, "flops_per_cycle": 128, "pue": 2.0,
             "power_coeff": 1e-28},
  "lambda": 1.0, "t0_s": 2.0, "e0_j": 2.0
})";
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fit recovers lambda from a generated .f32 file") {
  const fs::path dir = fresh_dir("fit");
  coinfer::Rng rng(42);
  std::vector<double> draws(200000);
  for (double& v : draws) v = rng.exponential(1.0) * rng.sign();
  coinfer::write_f32((dir / "weights.f32").string(), draws);

  const RunResult result =
      run_cli("--out " + dir.string() + " fit " + (dir / "weights.f32").string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("lambda = ") != std::string::npos);

  const std::string stats = coinfer::read_text_file((dir / "stats.json").string());
  const auto pos = stats.find("\"lambda\": ");
  REQUIRE(pos != std::string::npos);
  const double lambda = std::stod(stats.substr(pos + 10));
  CHECK(std::abs(lambda - 1.0) < 0.02);
  CHECK(fs::exists(dir / "histogram.csv"));
  CHECK(fs::exists(dir / "run_manifest.json"));
}

TEST_CASE("fit on a constant csv gives lambda = 2") {
  const fs::path dir = fresh_dir("fit_csv");
  coinfer::write_text_file((dir / "w.csv").string(), "0.5\n0.5\n-0.5\n");
  const RunResult result =
      run_cli("--out " + dir.string() + " fit " + (dir / "w.csv").string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("lambda = 2") != std::string::npos);
}

TEST_CASE("fit on a missing file fails with a nonzero exit") {
  const RunResult result = run_cli("fit /nonexistent/weights.f32");
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("error") != std::string::npos);
}

TEST_CASE("rd writes the documented header and row count") {
  const fs::path dir = fresh_dir("rd");
  const RunResult result =
      run_cli("--out " + dir.string() + " rd --lambda 1 --r-min 0.5 --r-max 8 --points 40");
  CHECK(result.exit_code == 0);
  const std::string csv = coinfer::read_text_file((dir / "rd_curve.csv").string());
  CHECK(csv.rfind("rate_bits,distortion,provenance\n", 0) == 0);
  CHECK(count_lines(csv) == 81);  // header + 40 lower + 40 upper

  // Row-wise sandwich: at each tabulated rate the lower bound sits below the
  // upper bound.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::vector<double> lower, upper;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double d = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    if (line.find("lower_bound") != std::string::npos) lower.push_back(d);
    if (line.find("upper_bound") != std::string::npos) upper.push_back(d);
  }
  REQUIRE(lower.size() == 40);
  REQUIRE(upper.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) CHECK(lower[i] < upper[i]);
}

TEST_CASE("rd rejects a zero lower rate when the upper bound is requested") {
  const fs::path dir = fresh_dir("rd_pole");
  const RunResult result =
      run_cli("--out " + dir.string() + " rd --lambda 1 --r-min 0 --r-max 4");
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("pole") != std::string::npos);
}

TEST_CASE("plan methods agree on the bundled problem") {
  const fs::path dir = fresh_dir("plan");
  coinfer::write_text_file((dir / "problem.json").string(), problem_json());

  const RunResult oracle = run_cli("--out " + (dir / "oracle").string() + " plan " +
                                   (dir / "problem.json").string() + " --method oracle");
  CHECK(oracle.exit_code == 0);
  CHECK(oracle.output.find("\"b_hat\": 3") != std::string::npos);

  const RunResult sca = run_cli("--out " + (dir / "sca").string() + " plan " +
                                (dir / "problem.json").string() +
                                " --method sca --delta 1e-12 --max-iters 200");
  CHECK(sca.exit_code == 0);
  CHECK(sca.output.find("\"b_hat\": 3") != std::string::npos);
  CHECK(sca.output.find("\"sca_trace\"") != std::string::npos);

  const RunResult fixed = run_cli("--out " + (dir / "fixed").string() + " plan " +
                                  (dir / "problem.json").string() + " --method fixed-freq");
  CHECK(fixed.exit_code == 0);
}

TEST_CASE("plan respects --format csv for single solves") {
  const fs::path dir = fresh_dir("plan_csv");
  coinfer::write_text_file((dir / "problem.json").string(), problem_json());
  const RunResult result = run_cli("--format csv --out " + dir.string() + " plan " +
                                   (dir / "problem.json").string() + " --method oracle");
  CHECK(result.exit_code == 0);
  const std::string csv = coinfer::read_text_file((dir / "plan.csv").string());
  CHECK(csv.rfind("t0,e0,b_hat,f,f_tilde,delay,energy,gap,status\n", 0) == 0);
  CHECK(csv.find(",optimal") != std::string::npos);
}

TEST_CASE("infeasible budgets are an analysis outcome, not an error") {
  const fs::path dir = fresh_dir("plan_infeasible");
  std::string text = problem_json();
  text.replace(text.find("\"t0_s\": 2.0"), 11, "\"t0_s\": 1e-6");
  coinfer::write_text_file((dir / "problem.json").string(), text);
  const RunResult result =
      run_cli("--out " + dir.string() + " plan " + (dir / "problem.json").string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("infeasible") != std::string::npos);
}

TEST_CASE("schema violations list the offending fields and fail") {
  const fs::path dir = fresh_dir("plan_schema");
  coinfer::write_text_file((dir / "problem.json").string(), R"({"workload": {}})");
  const RunResult result =
      run_cli("--out " + dir.string() + " plan " + (dir / "problem.json").string());
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("workload.agent_gflops") != std::string::npos);
  CHECK(result.output.find("t0_s") != std::string::npos);
}

TEST_CASE("plan sweep emits the documented csv") {
  const fs::path dir = fresh_dir("plan_sweep");
  coinfer::write_text_file((dir / "problem.json").string(), problem_json());
  const RunResult result = run_cli("--out " + dir.string() + " plan " +
                                   (dir / "problem.json").string() +
                                   " --method oracle --sweep-t0 0.5:3.0:4 --sweep-e0 1:4:3");
  CHECK(result.exit_code == 0);
  const std::string csv = coinfer::read_text_file((dir / "sweep.csv").string());
  CHECK(csv.rfind("t0,e0,b_hat,f,f_tilde,delay,energy,gap,status\n", 0) == 0);
  CHECK(count_lines(csv) == 13);
}

TEST_CASE("verify-prop1 reports a held bound on every row") {
  const fs::path dir = fresh_dir("verify");
  const RunResult result = run_cli("--seed 9 --out " + dir.string() +
                                   " verify-prop1 --random --dims 24,32,16 --scheme both");
  CHECK(result.exit_code == 0);
  const std::string csv = coinfer::read_text_file((dir / "prop1_report.csv").string());
  CHECK(csv.rfind("bit_width,scheme,measured,prop1_bound,surrogate_H_bound\n", 0) == 0);
  CHECK(count_lines(csv) == 15);  // header + 7 bit-widths x 2 schemes

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::vector<double> cols;
    std::size_t start = line.find(',', line.find(',') + 1) + 1;  // skip width, scheme
    std::string tail = line.substr(start);
    std::size_t pos = 0;
    while (pos != std::string::npos) {
      cols.push_back(std::stod(tail.substr(pos == 0 ? 0 : pos + 1)));
      pos = tail.find(',', pos == 0 ? 0 : pos + 1);
    }
    REQUIRE(cols.size() == 3);
    CHECK(cols[0] <= cols[1] * (1.0 + 1e-9));  // measured <= prop1 bound
    CHECK(cols[0] <= cols[2] * (1.0 + 1e-9));  // measured <= surrogate bound
  }
}

TEST_CASE("identical seed and config reproduce byte-identical outputs") {
  const fs::path dir_a = fresh_dir("determinism_a");
  const fs::path dir_b = fresh_dir("determinism_b");
  for (const fs::path& dir : {dir_a, dir_b}) {
    const RunResult fit = run_cli("--seed 5 --out " + (dir / "fit").string() +
                                  " verify-prop1 --random --dims 16,12,8");
    CHECK(fit.exit_code == 0);
    const RunResult rd = run_cli("--seed 5 --out " + (dir / "rd").string() +
                                 " rd --lambda 2 --r-min 1 --r-max 6 --points 11");
    CHECK(rd.exit_code == 0);
  }
  for (const std::string rel : {"fit/prop1_report.csv", "fit/run_manifest.json",
                                "rd/rd_curve.csv", "rd/run_manifest.json"}) {
    const std::string a = coinfer::read_text_file((dir_a / rel).string());
    const std::string b = coinfer::read_text_file((dir_b / rel).string());
    CHECK(a == b);
  }
}

}  // TEST_SUITE
