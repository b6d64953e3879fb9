// coinfer: planning and analysis front end for quantization-aware split
// inference. Subcommands:
//   fit           fit the exponential magnitude model to a weight file
//   rd            tabulate rate-distortion bounds (optionally with the
//                 Blahut-Arimoto numerical curve)
//   plan          solve the joint bit-width / frequency problem
//   verify-prop1  check the layer-propagation distortion bound on a model
//
// Analysis outcomes (e.g. an infeasible plan) exit 0; contract violations
// (bound breach, schema error, I/O failure) exit nonzero.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coinfer/blahut_arimoto.hpp"
#include "coinfer/dnn.hpp"
#include "coinfer/errors.hpp"
#include "coinfer/io.hpp"
#include "coinfer/planner.hpp"
#include "coinfer/quantizers.hpp"
#include "coinfer/rate_distortion.hpp"
#include "coinfer/rng.hpp"
#include "coinfer/weight_stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

int log_level() {
  const char* env = std::getenv("COINFER_LOG");
  if (env == nullptr) return 1;
  const std::string value(env);
  if (value == "quiet" || value == "0") return 0;
  if (value == "debug" || value == "2") return 2;
  return 1;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::cerr << "coinfer: " << message << "\n";
}

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string format = "json";
};

std::string canonical_config(const json& config) { return config.dump(); }

void write_run_manifest(const GlobalOptions& opts, const std::string& command,
                        const json& config, const std::vector<std::string>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = coinfer::fnv1a_hex(canonical_config(config));
  manifest["seed"] = opts.seed;
  manifest["tool_version"] = kToolVersion;
  // File names, not paths: manifests must be byte-identical for identical
  // config + seed regardless of where the run directory lives.
  json names = json::array();
  for (const std::string& path : outputs) names.push_back(fs::path(path).filename().string());
  manifest["outputs"] = names;
  coinfer::write_text_file((fs::path(opts.out_dir) / "run_manifest.json").string(),
                           manifest.dump(2) + "\n");
}

void ensure_out_dir(const GlobalOptions& opts) {
  fs::create_directories(opts.out_dir);
}

std::string out_path(const GlobalOptions& opts, const std::string& name) {
  return (fs::path(opts.out_dir) / name).string();
}

// ---------------------------------------------------------------- fit

int cmd_fit(const GlobalOptions& opts, const std::string& weights_path,
            const std::string& format_name, int bins) {
  coinfer::MagnitudeFormat format;
  if (format_name == "auto") {
    format = coinfer::format_from_extension(weights_path);
  } else if (format_name == "raw-f32-le") {
    format = coinfer::MagnitudeFormat::RawF32LE;
  } else {
    format = coinfer::MagnitudeFormat::Csv;
  }

  const coinfer::MagnitudeSample sample = coinfer::load_magnitudes_file(weights_path, format);
  const coinfer::WeightStats stats = coinfer::fit_exponential(sample);
  const std::vector<coinfer::HistogramBin> hist = coinfer::histogram(sample, bins);

  ensure_out_dir(opts);
  json stats_json;
  stats_json["lambda"] = stats.lambda;
  stats_json["mean_magnitude"] = stats.mean_magnitude;
  stats_json["n_params"] = stats.n_params;
  stats_json["differential_entropy_bits"] = stats.differential_entropy_bits;
  const std::string stats_path = out_path(opts, "stats.json");
  coinfer::write_text_file(stats_path, stats_json.dump(2) + "\n");

  std::string csv = "bin_center,density\n";
  for (const auto& bin : hist) {
    csv += coinfer::format_full(bin.center) + "," + coinfer::format_full(bin.density) + "\n";
  }
  const std::string hist_path = out_path(opts, "histogram.csv");
  coinfer::write_text_file(hist_path, csv);

  json config{{"command", "fit"}, {"weights", weights_path},
              {"format", format_name}, {"bins", bins}, {"seed", opts.seed}};
  write_run_manifest(opts, "fit", config, {stats_path, hist_path});

  std::printf("lambda = %s (n = %zu)\n", coinfer::format_full(stats.lambda).c_str(),
              stats.n_params);
  return 0;
}

// ---------------------------------------------------------------- rd

coinfer::BaConfig parse_ba_config(const std::string& path) {
  coinfer::BaConfig config;
  if (path.empty()) return config;
  json doc;
  try {
    doc = json::parse(coinfer::read_text_file(path));
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("invalid BA config JSON: ") + err.what());
  }
  if (doc.contains("grid_points")) config.grid_points = doc["grid_points"].get<int>();
  if (doc.contains("theta_max_multiplier")) {
    config.theta_max_multiplier = doc["theta_max_multiplier"].get<double>();
  }
  if (doc.contains("slope_sweep")) {
    config.slope_sweep = doc["slope_sweep"].get<std::vector<double>>();
  }
  if (doc.contains("convergence_tol")) {
    config.convergence_tol = doc["convergence_tol"].get<double>();
  }
  if (doc.contains("max_iters")) config.max_iters = doc["max_iters"].get<int>();
  return config;
}

int cmd_rd(const GlobalOptions& opts, double lambda, double r_min, double r_max, int points,
           bool with_ba, const std::string& ba_config_path) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (points < 2) throw std::invalid_argument("points must be >= 2");
  if (!(r_max > r_min)) throw std::invalid_argument("r-max must exceed r-min");
  if (!(r_min > 0.0)) {
    throw std::invalid_argument("r-min must be positive: the upper bound has a pole at rate 0");
  }

  std::string csv = "rate_bits,distortion,provenance\n";
  const auto emit = [&](double rate, double distortion, coinfer::RdProvenance prov) {
    csv += coinfer::format_full(rate) + "," + coinfer::format_full(distortion) + "," +
           coinfer::to_string(prov) + "\n";
  };
  for (int i = 0; i < points; ++i) {
    const double rate = r_min + (r_max - r_min) * i / (points - 1);
    emit(rate, coinfer::d_lower(rate, lambda), coinfer::RdProvenance::LowerBound);
  }
  for (int i = 0; i < points; ++i) {
    const double rate = r_min + (r_max - r_min) * i / (points - 1);
    emit(rate, coinfer::d_upper(rate, lambda), coinfer::RdProvenance::UpperBound);
  }

  int dropped = 0;
  if (with_ba) {
    const coinfer::BaConfig config = parse_ba_config(ba_config_path);
    const coinfer::RdCurve curve = coinfer::ba_distortion_rate(lambda, config);
    for (const coinfer::RdPoint& pt : curve.points) {
      emit(pt.rate, pt.distortion, coinfer::RdProvenance::BlahutArimoto);
    }
    dropped = curve.dropped_slopes;
    if (dropped > 0) {
      log_info(std::to_string(dropped) + " BA slope(s) dropped for non-convergence");
    }
  }

  ensure_out_dir(opts);
  const std::string curve_path = out_path(opts, "rd_curve.csv");
  coinfer::write_text_file(curve_path, csv);

  json config{{"command", "rd"},      {"lambda", lambda}, {"r_min", r_min},
              {"r_max", r_max},       {"points", points}, {"with_ba", with_ba},
              {"ba_config", ba_config_path}, {"seed", opts.seed}};
  write_run_manifest(opts, "rd", config, {curve_path});
  std::printf("wrote %s (%d analytic rows%s)\n", curve_path.c_str(), 2 * points,
              with_ba ? (", BA rows appended, dropped " + std::to_string(dropped)).c_str() : "");
  return 0;
}

// ---------------------------------------------------------------- plan

struct SweepSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

SweepSpec parse_sweep(const std::string& text) {
  SweepSpec spec;
  if (text.empty()) return spec;
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw std::invalid_argument("sweep spec must be lo:hi:count, got '" + text + "'");
  }
  spec.lo = std::stod(text.substr(0, first));
  spec.hi = std::stod(text.substr(first + 1, second - first - 1));
  spec.count = std::stoi(text.substr(second + 1));
  if (spec.count < 1 || !(spec.hi >= spec.lo)) {
    throw std::invalid_argument("sweep spec must satisfy lo <= hi, count >= 1");
  }
  return spec;
}

coinfer::Plan run_method(const std::string& method, const coinfer::PlanProblem& problem,
                         const GlobalOptions& opts, double delta, int max_iters, int trials,
                         coinfer::ScaTrace* trace_out) {
  if (method == "sca") {
    auto [plan, trace] = coinfer::sca_plan(problem, delta, max_iters);
    if (trace_out != nullptr) *trace_out = std::move(trace);
    return plan;
  }
  if (method == "oracle") return coinfer::brute_force_plan(problem);
  if (method == "fixed-freq") return coinfer::fixed_frequency_plan(problem);
  if (method == "random") return coinfer::feasible_random_plan(problem, trials, opts.seed);
  throw std::invalid_argument("unknown method '" + method + "'");
}

int cmd_plan(const GlobalOptions& opts, const std::string& problem_path,
             const std::string& method, const std::string& sweep_t0,
             const std::string& sweep_e0, double delta, int max_iters, int trials) {
  const coinfer::PlanProblem base =
      coinfer::parse_plan_problem(coinfer::read_text_file(problem_path));

  ensure_out_dir(opts);
  json config{{"command", "plan"},   {"problem", problem_path}, {"method", method},
              {"sweep_t0", sweep_t0}, {"sweep_e0", sweep_e0},   {"delta", delta},
              {"max_iters", max_iters}, {"trials", trials},     {"seed", opts.seed}};

  const auto plan_csv_row = [](double t0, double e0, const coinfer::Plan& plan) {
    std::string row = coinfer::format_full(t0) + "," + coinfer::format_full(e0) + ",";
    if (plan.status == coinfer::PlanStatus::Optimal) {
      row += std::to_string(plan.b_hat) + "," + coinfer::format_full(plan.f) + "," +
             coinfer::format_full(plan.f_tilde) + "," + coinfer::format_full(plan.delay) +
             "," + coinfer::format_full(plan.energy) + "," +
             coinfer::format_full(plan.objective_gap) + ",optimal\n";
    } else {
      row += ",,,,,,infeasible\n";
    }
    return row;
  };

  if (sweep_t0.empty() && sweep_e0.empty()) {
    coinfer::ScaTrace trace;
    const coinfer::Plan plan =
        run_method(method, base, opts, delta, max_iters, trials, &trace);
    std::string plan_path, body;
    if (opts.format == "csv") {
      plan_path = out_path(opts, "plan.csv");
      body = "t0,e0,b_hat,f,f_tilde,delay,energy,gap,status\n" +
             plan_csv_row(base.t0, base.e0, plan);
      coinfer::write_text_file(plan_path, body);
    } else {
      plan_path = out_path(opts, "plan.json");
      body = method == "sca" ? coinfer::to_json(plan, trace) : coinfer::to_json(plan);
      coinfer::write_text_file(plan_path, body + "\n");
    }
    write_run_manifest(opts, "plan", config, {plan_path});
    std::printf("%s\n", body.c_str());
    return 0;
  }

  const SweepSpec t0s = sweep_t0.empty() ? SweepSpec{base.t0, base.t0, 1}
                                         : parse_sweep(sweep_t0);
  const SweepSpec e0s = sweep_e0.empty() ? SweepSpec{base.e0, base.e0, 1}
                                         : parse_sweep(sweep_e0);
  std::string csv = "t0,e0,b_hat,f,f_tilde,delay,energy,gap,status\n";
  for (int i = 0; i < t0s.count; ++i) {
    for (int j = 0; j < e0s.count; ++j) {
      coinfer::PlanProblem problem = base;
      problem.t0 =
          t0s.count == 1 ? t0s.lo : t0s.lo + (t0s.hi - t0s.lo) * i / (t0s.count - 1);
      problem.e0 =
          e0s.count == 1 ? e0s.lo : e0s.lo + (e0s.hi - e0s.lo) * j / (e0s.count - 1);
      const coinfer::Plan plan =
          run_method(method, problem, opts, delta, max_iters, trials, nullptr);
      csv += plan_csv_row(problem.t0, problem.e0, plan);
    }
  }
  const std::string sweep_path = out_path(opts, "sweep.csv");
  coinfer::write_text_file(sweep_path, csv);
  write_run_manifest(opts, "plan", config, {sweep_path});
  std::printf("wrote %s (%d rows)\n", sweep_path.c_str(), t0s.count * e0s.count);
  return 0;
}

// ---------------------------------------------------------------- verify-prop1

std::vector<std::vector<double>> normalized_inputs(coinfer::Rng& rng, std::size_t dim,
                                                   int count) {
  std::vector<std::vector<double>> inputs(count, std::vector<double>(dim));
  for (auto& x : inputs) {
    double l1 = 0.0;
    for (double& v : x) {
      v = rng.sign() * rng.uniform01();
      l1 += std::abs(v);
    }
    if (l1 > 0.0) {
      for (double& v : x) v /= l1;
    }
  }
  return inputs;
}

int cmd_verify_prop1(const GlobalOptions& opts, const std::string& model_path,
                     bool random_model_flag, const std::string& dims_text,
                     const std::string& scheme_name, std::vector<int> bit_widths,
                     int n_inputs) {
  coinfer::DnnModel model;
  if (random_model_flag) {
    if (dims_text.empty()) {
      model = coinfer::fcdnn16(opts.seed);
    } else {
      std::vector<std::size_t> dims;
      std::string token;
      for (char c : dims_text + ",") {
        if (c == ',') {
          if (!token.empty()) dims.push_back(std::stoul(token));
          token.clear();
        } else {
          token += c;
        }
      }
      model = coinfer::random_model(dims, coinfer::Activation::ReLU, opts.seed);
    }
  } else {
    if (model_path.empty()) {
      throw std::invalid_argument("provide a model manifest or --random");
    }
    model = coinfer::load_model(model_path);
  }

  if (bit_widths.empty()) bit_widths = {2, 3, 4, 5, 6, 7, 8};
  std::vector<std::string> schemes;
  if (scheme_name == "both") {
    schemes = {"uniform", "pot-log"};
  } else {
    schemes = {scheme_name};
  }

  coinfer::Rng rng(opts.seed + 1);
  const auto inputs = normalized_inputs(rng, model.input_dim(), n_inputs);
  const double theta_max = coinfer::model_theta_max(model);
  const std::vector<double> flat = coinfer::model_weights(model);

  // Data-driven surrogate coefficient: the perturbation ensemble defaults to
  // the quantization errors at the requested bit-widths.
  std::vector<coinfer::DnnModel> candidates;
  for (const std::string& scheme : schemes) {
    for (int b : bit_widths) {
      coinfer::QuantScheme qs;
      qs.kind = scheme == "uniform" ? coinfer::QuantKind::Uniform : coinfer::QuantKind::PotLog;
      qs.bit_width_total = b;
      qs.theta_max = theta_max;
      candidates.push_back(coinfer::quantize_model(model, qs));
    }
  }
  const double h = coinfer::coefficient_h_for_models(model, candidates, inputs);

  std::string csv = "bit_width,scheme,measured,prop1_bound,surrogate_H_bound\n";
  bool violation = false;
  std::size_t idx = 0;
  for (const std::string& scheme : schemes) {
    for (int b : bit_widths) {
      const coinfer::DnnModel& quantized = candidates[idx++];
      const coinfer::BoundReport report = coinfer::prop1_bound(model, quantized);
      const double measured = coinfer::output_distortion(model, quantized, inputs);
      const double param_l1 =
          coinfer::param_distortion(flat, coinfer::model_weights(quantized)).total_l1;
      const double surrogate = h * param_l1;
      csv += std::to_string(b) + "," + scheme + "," + coinfer::format_full(measured) + "," +
             coinfer::format_full(report.bound) + "," + coinfer::format_full(surrogate) + "\n";
      if (measured > report.bound * (1.0 + 1e-9)) violation = true;
    }
  }

  ensure_out_dir(opts);
  const std::string report_path = out_path(opts, "prop1_report.csv");
  coinfer::write_text_file(report_path, csv);

  json config{{"command", "verify-prop1"}, {"model", model_path},
              {"random", random_model_flag}, {"dims", dims_text},
              {"scheme", scheme_name},       {"bit_widths", bit_widths},
              {"inputs", n_inputs},          {"seed", opts.seed}};
  write_run_manifest(opts, "verify-prop1", config, {report_path});

  if (violation) {
    std::fprintf(stderr, "BOUND VIOLATION: measured output distortion exceeds the bound\n");
    return 3;
  }
  std::printf("wrote %s (bound holds on every row)\n", report_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantization-aware co-inference planning toolkit"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--seed", opts.seed, "RNG seed for all stochastic steps");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--format", opts.format, "preferred report format")
      ->check(CLI::IsMember({"json", "csv"}));

  // fit
  auto* fit = app.add_subcommand("fit", "fit the exponential magnitude model");
  std::string weights_path;
  std::string weights_format = "auto";
  int bins = 100;
  fit->add_option("weights", weights_path, "weight file (.f32 or .csv)")->required();
  fit->add_option("--weights-format", weights_format, "input format")
      ->check(CLI::IsMember({"auto", "raw-f32-le", "csv"}));
  fit->add_option("--bins", bins, "histogram bin count");

  // rd
  auto* rd = app.add_subcommand("rd", "tabulate rate-distortion bounds");
  double lambda = 1.0, r_min = 0.5, r_max = 8.0;
  int points = 40;
  bool with_ba = false;
  std::string ba_config_path;
  rd->add_option("--lambda", lambda, "source rate parameter");
  rd->add_option("--r-min", r_min, "smallest rate (bits), must be > 0");
  rd->add_option("--r-max", r_max, "largest rate (bits)");
  rd->add_option("--points", points, "analytic sample count");
  rd->add_flag("--with-ba", with_ba, "append the Blahut-Arimoto numerical curve");
  rd->add_option("--ba-config", ba_config_path, "BA configuration JSON");

  // plan
  auto* plan = app.add_subcommand("plan", "solve the joint bit-width/frequency problem");
  std::string problem_path, method = "sca", sweep_t0, sweep_e0;
  double delta = 1e-6;
  int max_iters = 50, trials = 400;
  plan->add_option("problem", problem_path, "problem JSON")->required();
  plan->add_option("--method", method, "solver")
      ->check(CLI::IsMember({"sca", "oracle", "fixed-freq", "random"}));
  plan->add_option("--sweep-t0", sweep_t0, "delay-budget sweep lo:hi:count");
  plan->add_option("--sweep-e0", sweep_e0, "energy-budget sweep lo:hi:count");
  plan->add_option("--delta", delta, "SCA convergence threshold");
  plan->add_option("--max-iters", max_iters, "SCA iteration cap");
  plan->add_option("--trials", trials, "random-baseline trial count");

  // verify-prop1
  auto* verify = app.add_subcommand("verify-prop1", "check the distortion bound on a model");
  std::string model_path, dims_text, scheme_name = "uniform";
  bool random_flag = false;
  std::vector<int> bit_widths;
  int n_inputs = 32;
  verify->add_option("model", model_path, "model manifest JSON");
  verify->add_flag("--random", random_flag, "use a seeded random model instead of a file");
  verify->add_option("--dims", dims_text, "comma-separated widths for --random");
  verify->add_option("--scheme", scheme_name, "quantizer")
      ->check(CLI::IsMember({"uniform", "pot-log", "both"}));
  verify->add_option("--bits", bit_widths, "bit-widths to test (default 2..8)");
  verify->add_option("--inputs", n_inputs, "number of normalized probe inputs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(opts, weights_path, weights_format, bins);
    if (rd->parsed()) {
      return cmd_rd(opts, lambda, r_min, r_max, points, with_ba, ba_config_path);
    }
    if (plan->parsed()) {
      return cmd_plan(opts, problem_path, method, sweep_t0, sweep_e0, delta, max_iters,
                      trials);
    }
    if (verify->parsed()) {
      return cmd_verify_prop1(opts, model_path, random_flag, dims_text, scheme_name,
                              bit_widths, n_inputs);
    }
  } catch (const coinfer::parse_error& err) {
    std::fprintf(stderr, "parse error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
  return 0;
}
