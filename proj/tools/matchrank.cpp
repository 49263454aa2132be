// Command-line front end: generate markets, optimize ranking policies,
// evaluate them exactly and by simulation, and sweep experiment grids.
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchrank/analysis.hpp"
#include "matchrank/errors.hpp"
#include "matchrank/market.hpp"
#include "matchrank/objective.hpp"
#include "matchrank/optimize.hpp"
#include "matchrank/policy.hpp"
#include "matchrank/simulate.hpp"

namespace {

using namespace matchrank;

ExaminationModel exam_from_flag(const std::string& name) {
  if (name == "inv") return ExaminationModel::inverse_rank();
  if (name == "invlog") return ExaminationModel::inverse_log();
  if (name == "invexp") return ExaminationModel::inverse_exp();
  throw std::invalid_argument("unknown exam model: " + name +
                              " (expected inv, invlog or invexp)");
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct GenerateArgs {
  std::size_t n = 100;
  double ratio = 1.5;
  double lambda = 0.5;
  std::string structure = "random";
  double noise_sd = 0.2;
  std::string exam = "inv";
  std::string fixture;
  std::size_t cutoff = 2;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& args) {
  Market market = [&] {
    if (args.fixture == "proposition5") return proposition5_instance();
    if (args.fixture == "theorem2") return theorem2_instance(args.n, args.cutoff);
    if (!args.fixture.empty())
      throw std::invalid_argument("unknown fixture: " + args.fixture);
    SyntheticSpec spec;
    spec.n = args.n;
    spec.candidate_ratio = args.ratio;
    spec.lambda = args.lambda;
    spec.structure = structure_from_name(args.structure);
    spec.noise_sd = args.noise_sd;
    spec.seed = args.seed;
    const ExaminationModel exam = exam_from_flag(args.exam);
    return generate_synthetic(spec, exam, exam);
  }();
  save_market(market, args.out);
  std::cout << "market " << market.num_candidates() << "x" << market.num_employers()
            << " written to " << args.out << "\n";
  return 0;
}

struct OptimizeArgs {
  std::string market_path;
  std::string method = "fw";
  std::size_t steps = 50;
  double lr = 0.2;
  bool lr_decay = false;
  double eps = 1e-3;
  std::size_t shortlist = 0;  // 0 = full optimization
  std::uint64_t seed = 0;
  std::string out;
  std::string trace_path;
};

OptimizerConfig config_from_args(const std::string& method, std::size_t steps, double lr,
                                 bool lr_decay, double eps, std::uint64_t seed) {
  OptimizerConfig config;
  if (method == "fw")
    config.method = OptimizeMethod::FrankWolfe;
  else if (method == "pgd")
    config.method = OptimizeMethod::ProjectedGradient;
  else
    throw std::invalid_argument("unknown method: " + method + " (expected fw or pgd)");
  config.steps = steps;
  config.learning_rate = lr_decay ? LearningRate::decaying() : LearningRate::constant(lr);
  config.stop_epsilon = eps;
  config.seed = seed;
  return config;
}

int cmd_optimize(const OptimizeArgs& args) {
  const Market market = load_market(args.market_path);
  const OptimizerConfig config =
      config_from_args(args.method, args.steps, args.lr, args.lr_decay, args.eps, args.seed);

  const OptimizeResult result = args.shortlist > 0
      ? two_stage_rerank(market, args.shortlist, config)
      : optimize(market, config);

  save_policy(result.policy, args.out);
  const std::string trace_path =
      args.trace_path.empty() ? args.out + ".trace.csv" : args.trace_path;
  write_trace_csv(result.trace, trace_path);
  const double lb =
      result.trace.entries.empty() ? 0.0 : result.trace.entries.back().lower_bound;
  std::cout << "policy written to " << args.out << " (lower bound " << format_double(lb)
            << ", trace " << trace_path << ")\n";
  return 0;
}

struct EvaluateArgs {
  std::string market_path;
  std::vector<std::string> policy_paths;
  bool include_naive = false;
  bool include_reciprocal = false;
  std::size_t mc_samples = 10000;
  std::size_t mc_runs = 10;
  std::uint64_t seed = 0;
  std::string out_json;
  std::string out_csv;
  std::string gains_prefix;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const Market market = load_market(args.market_path);

  std::vector<std::pair<std::string, Policy>> policies;
  if (args.include_naive) policies.emplace_back("naive", naive_policy(market));
  if (args.include_reciprocal)
    policies.emplace_back("reciprocal", reciprocal_policy(market));
  for (const std::string& path : args.policy_paths)
    policies.emplace_back(std::filesystem::path(path).stem().string(), load_policy(path));
  if (policies.empty())
    throw std::invalid_argument(
        "evaluate: select at least one policy (--naive, --reciprocal or policy files)");

  nlohmann::json out{{"market", args.market_path}, {"policies", nlohmann::json::array()}};
  std::ostringstream csv;
  csv << "policy,sw_exact,sw_lower_bound,sw_mc_mean,sw_mc_2stderr\n";
  std::printf("%-18s %14s %14s %14s %14s\n", "policy", "sw_exact", "sw_lower", "mc_mean",
              "mc_2stderr");

  for (const auto& [name, policy] : policies) {
    if (policy.num_candidates() != market.num_candidates() ||
        policy.num_employers() != market.num_employers())
      throw std::invalid_argument("policy '" + name + "' does not match market dimensions");
    const EvaluationReport report = evaluate_policy(market, policy);
    nlohmann::json entry{{"name", name},
                         {"sw_exact", report.sw_exact},
                         {"candidate_utilities", report.candidate_utilities},
                         {"employer_utilities", report.employer_utilities}};
    entry["sw_lower_bound"] =
        report.sw_lower_bound ? nlohmann::json(*report.sw_lower_bound) : nlohmann::json();

    std::string mc_mean = "-", mc_2stderr = "-";
    if (args.mc_samples > 0) {
      SimulationConfig sim;
      sim.num_samples = args.mc_samples;
      sim.num_runs = args.mc_runs;
      sim.seed = args.seed;
      const SimulationResult mc = simulate_market(market, policy, sim);
      entry["sw_mc_mean"] = mc.mean_matches;
      entry["sw_mc_2stderr"] = 2.0 * mc.stderr_of_mean;
      mc_mean = format_double(mc.mean_matches);
      mc_2stderr = format_double(2.0 * mc.stderr_of_mean);
    } else {
      entry["sw_mc_mean"] = nullptr;
      entry["sw_mc_2stderr"] = nullptr;
    }
    out["policies"].push_back(entry);

    const std::string lower =
        report.sw_lower_bound ? format_double(*report.sw_lower_bound) : std::string("-");
    csv << name << "," << format_double(report.sw_exact) << "," << lower << "," << mc_mean
        << "," << mc_2stderr << "\n";
    std::printf("%-18s %14.6f %14s %14s %14s\n", name.c_str(), report.sw_exact,
                lower.c_str(), mc_mean.c_str(), mc_2stderr.c_str());
  }

  // Gains relative to the first listed policy.
  if (!args.gains_prefix.empty()) {
    if (policies.size() < 2)
      throw std::invalid_argument("evaluate --gains needs at least two policies");
    const Policy& base = policies.front().second;
    std::vector<std::pair<std::string, GainReport>> reports;
    for (std::size_t i = 1; i < policies.size(); ++i) {
      const std::string& name = policies[i].first;
      reports.emplace_back("switch/" + name, switch_gain(market, base, policies[i].second));
      reports.emplace_back("adoption/" + name,
                           adoption_gain(market, policies[i].second, base));
      reports.emplace_back("retention/" + name,
                           retention_gain(market, policies[i].second, base));
    }
    std::vector<std::pair<std::string, const GainReport*>> named;
    std::vector<std::pair<std::string, const Histogram*>> hists;
    for (const auto& [name, report] : reports) {
      named.emplace_back(name, &report);
      hists.emplace_back(name, &report.histogram);
    }
    write_gains_csv(args.gains_prefix + "_gains.csv", named);
    write_histogram_csv(args.gains_prefix + "_hist.csv", hists);
  }

  if (!args.out_json.empty()) {
    std::ofstream f(args.out_json, std::ios::binary);
    if (!f) throw IoError("cannot write report file: " + args.out_json);
    f << out.dump(2) << "\n";
  }
  if (!args.out_csv.empty()) {
    std::ofstream f(args.out_csv, std::ios::binary);
    if (!f) throw IoError("cannot write report file: " + args.out_csv);
    f << csv.str();
  }
  return 0;
}

struct SweepArgs {
  std::vector<std::size_t> sizes{20};
  std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::string> structures{"random"};
  std::vector<std::string> exams{"inv"};
  double ratio = 1.5;
  std::string method = "fw";
  std::size_t steps = 50;
  double lr = 0.2;
  bool lr_decay = false;
  double eps = 1e-3;
  std::size_t mc_samples = 0;
  std::size_t mc_runs = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  std::string out;
};

struct SweepCell {
  std::size_t n;
  double lambda;
  std::string structure;
  std::string exam;
  std::uint64_t seed;
};

int cmd_sweep(const SweepArgs& args) {
  std::vector<SweepCell> cells;
  const RngStream master(args.seed);
  for (const std::size_t n : args.sizes)
    for (const double lambda : args.lambdas)
      for (const std::string& structure : args.structures)
        for (const std::string& exam : args.exams) {
          RngStream cell_stream = master.fork(cells.size());
          cells.push_back({n, lambda, structure, exam, cell_stream.next_u64()});
        }

  const OptimizerConfig config =
      config_from_args(args.method, args.steps, args.lr, args.lr_decay, args.eps, args.seed);

  // One result blob per cell, filled by a worker pool and written in cell
  // order so the output is deterministic regardless of scheduling.
  std::vector<std::string> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const auto run_cell = [&](std::size_t idx) {
    const SweepCell& cell = cells[idx];
    std::ostringstream row;
    const auto emit = [&](const std::string& policy, const std::string& metric,
                          const std::string& value, const std::string& status) {
      row << cell.n << "," << args.ratio << "," << cell.lambda << "," << cell.structure
          << "," << cell.exam << "," << cell.seed << "," << policy << "," << metric << ","
          << value << "," << status << "\n";
    };
    try {
      SyntheticSpec spec;
      spec.n = cell.n;
      spec.candidate_ratio = args.ratio;
      spec.lambda = cell.lambda;
      spec.structure = structure_from_name(cell.structure);
      spec.seed = cell.seed;
      const ExaminationModel exam = exam_from_flag(cell.exam);
      const Market market = generate_synthetic(spec, exam, exam);

      std::vector<std::pair<std::string, Policy>> policies;
      policies.emplace_back("naive", naive_policy(market));
      policies.emplace_back("reciprocal", reciprocal_policy(market));
      policies.emplace_back("social_welfare", optimize(market, config).policy);

      for (const auto& [name, policy] : policies) {
        emit(name, "sw_exact", format_double(social_welfare_exact(market, policy)), "ok");
        if (args.mc_samples > 0) {
          SimulationConfig sim;
          sim.num_samples = args.mc_samples;
          sim.num_runs = args.mc_runs;
          sim.seed = cell.seed;
          const SimulationResult mc = simulate_market(market, policy, sim);
          emit(name, "sw_mc_mean", format_double(mc.mean_matches), "ok");
          emit(name, "sw_mc_stderr", format_double(mc.stderr_of_mean), "ok");
        }
      }
    } catch (const std::exception& e) {
      std::string what = e.what();
      for (char& ch : what)
        if (ch == ',' || ch == '\n') ch = ';';
      emit("-", "error", what, "failed");
    }
    rows[idx] = row.str();
  };

  std::size_t workers = args.jobs > 0 ? args.jobs : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, cells.size()));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t idx = next.fetch_add(1); idx < cells.size(); idx = next.fetch_add(1))
        run_cell(idx);
    });
  for (std::thread& t : pool) t.join();

  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw IoError("cannot write sweep file: " + args.out);
  out << "n,candidate_ratio,lambda,structure,exam,seed,policy,metric,value,status\n";
  for (const std::string& row : rows) out << row;
  if (!out) throw IoError("failed writing sweep file: " + args.out);
  std::cout << "sweep of " << cells.size() << " cells written to " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-welfare ranking policies for two-sided matching markets"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a market JSON file");
  generate->add_option("--n", gen.n, "Employer count (synthetic or theorem2)");
  generate->add_option("--ratio", gen.ratio, "Candidates per employer (default 1.5)");
  generate->add_option("--lambda", gen.lambda, "Crowding level in [0,1]");
  generate->add_option("--structure", gen.structure, "random|similar|reversed");
  generate->add_option("--noise-sd", gen.noise_sd, "Similar/reversed noise sd");
  generate->add_option("--exam", gen.exam, "inv|invlog|invexp (both sides)");
  generate->add_option("--fixture", gen.fixture, "theorem2|proposition5");
  generate->add_option("--m", gen.cutoff, "theorem2 examination cutoff (default 2)");
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--out", gen.out, "Output market JSON")->required();

  OptimizeArgs opt;
  CLI::App* optimize_cmd =
      app.add_subcommand("optimize", "Maximize the welfare lower bound over policies");
  optimize_cmd->add_option("--market", opt.market_path, "Market JSON")->required();
  optimize_cmd->add_option("--method", opt.method, "fw|pgd (default fw)");
  optimize_cmd->add_option("--steps", opt.steps, "Iterations (default 50)");
  optimize_cmd->add_option("--lr", opt.lr, "Constant learning rate (default 0.2)");
  optimize_cmd->add_flag("--lr-decay", opt.lr_decay, "Use the 1/(t+2) decaying rate");
  optimize_cmd->add_option("--eps", opt.eps, "Stopping criterion (default 1e-3)");
  optimize_cmd->add_option("--shortlist", opt.shortlist,
                           "Two-stage re-ranking shortlist size (0 = full)");
  optimize_cmd->add_option("--seed", opt.seed, "RNG seed");
  optimize_cmd->add_option("--out", opt.out, "Output policy JSON")->required();
  optimize_cmd->add_option(
      "--trace", opt.trace_path,
      "Trace CSV path (default <out>.trace.csv; wall_ms varies run to run)");

  EvaluateArgs eval;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Exact and Monte-Carlo policy evaluation");
  evaluate_cmd->add_option("--market", eval.market_path, "Market JSON")->required();
  evaluate_cmd->add_option("policies", eval.policy_paths, "Policy JSON files");
  evaluate_cmd->add_flag("--naive", eval.include_naive, "Include the naive baseline");
  evaluate_cmd->add_flag("--reciprocal", eval.include_reciprocal,
                         "Include the reciprocal baseline");
  evaluate_cmd->add_option("--mc-samples", eval.mc_samples,
                           "Monte-Carlo samples per run (0 disables, default 10000)");
  evaluate_cmd->add_option("--mc-runs", eval.mc_runs, "Monte-Carlo runs (default 10)");
  evaluate_cmd->add_option("--seed", eval.seed, "Simulation seed");
  evaluate_cmd->add_option("--out", eval.out_json, "Report JSON path");
  evaluate_cmd->add_option("--csv", eval.out_csv,
                           "Report CSV path (columns: policy,sw_exact,sw_lower_bound,"
                           "sw_mc_mean,sw_mc_2stderr)");
  evaluate_cmd->add_option("--gains", eval.gains_prefix,
                           "Write <prefix>_gains.csv and <prefix>_hist.csv of "
                           "switch/adoption/retention gains vs the first policy");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid to CSV");
  sweep_cmd->add_option("--sizes", sweep.sizes, "Employer counts (default 20)");
  sweep_cmd->add_option("--lambdas", sweep.lambdas,
                        "Crowding levels (default 0,0.25,0.5,0.75,1)");
  sweep_cmd->add_option("--structures", sweep.structures, "Structures (default random)");
  sweep_cmd->add_option("--exams", sweep.exams, "Exam models (default inv)");
  sweep_cmd->add_option("--ratio", sweep.ratio, "Candidates per employer (default 1.5)");
  sweep_cmd->add_option("--method", sweep.method, "fw|pgd (default fw)");
  sweep_cmd->add_option("--steps", sweep.steps, "Optimizer iterations (default 50)");
  sweep_cmd->add_option("--lr", sweep.lr, "Constant learning rate (default 0.2)");
  sweep_cmd->add_flag("--lr-decay", sweep.lr_decay, "Use the 1/(t+2) decaying rate");
  sweep_cmd->add_option("--eps", sweep.eps, "Stopping criterion (default 1e-3)");
  sweep_cmd->add_option("--mc-samples", sweep.mc_samples,
                        "Monte-Carlo samples (0 = exact only, default)");
  sweep_cmd->add_option("--mc-runs", sweep.mc_runs, "Monte-Carlo runs (default 10)");
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed; cells fork their own");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (default: hardware)");
  sweep_cmd
      ->add_option("--out", sweep.out,
                   "Output CSV (columns: n,candidate_ratio,lambda,structure,exam,seed,"
                   "policy,metric,value,status)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (optimize_cmd->parsed()) return cmd_optimize(opt);
    if (evaluate_cmd->parsed()) return cmd_evaluate(eval);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
