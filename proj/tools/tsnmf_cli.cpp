// tsnmf command-line front end. Exit codes: 0 success, 1 usage error,
// 2 data error.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tsnmf/tsnmf.hpp"

using namespace tsnmf;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Dataset2D read_dataset(const std::string& path, const std::string& format, bool labels) {
  return load_dataset(path, parse_format(format), labels);
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view body = detail::trim(line);
    if (!body.empty()) out.push_back(static_cast<int>(detail::parse_integer(body, path)));
  }
  return out;
}

/// Writes to `path`, or to stdout when it is empty.
template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty()) {
    writer(std::cout);
    std::cout.flush();
  } else {
    write_file(path, writer);
  }
}

// Experiment flags carry ExperimentConfig field names and are applied on top
// of the optional --config file, so anything given on the command line wins.
struct ExperimentFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value file; flags override its entries");
    for (const char* key : {"dataset", "format", "N_values", "subsets_per_N", "lambdas", "ranks",
                            "m_neighbors", "t_max", "rel_tol", "restarts", "seed", "method", "jobs",
                            "record_timing"})
      options.emplace_back(key, cmd->add_option(std::string("--") + key, values[key])
                                     ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast));
  }

  ExperimentConfig resolve(std::vector<int> default_ranks = {}) const {
    ExperimentConfig config;
    if (!default_ranks.empty()) config.ranks = std::move(default_ranks);
    if (!config_path.empty()) config = with_file(config);
    std::map<std::string, std::string> given;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) given[key] = values.at(key);
    try {
      apply_config(config, given);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    if (config.dataset.empty()) throw UsageError("a dataset is required (--dataset or config file)");
    config.validate();
    return config;
  }

 private:
  ExperimentConfig with_file(ExperimentConfig config) const {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot read config " + config_path);
    apply_config(config, parse_key_values(in, config_path));
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sided projected Semi-NMF clustering"};
  app.require_subcommand(1);

  // synth
  SynthOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic bundle");
  synth_cmd->add_option("--k", synth.k, "Number of clusters")->capture_default_str();
  synth_cmd->add_option("--n_per", synth.n_per, "Samples per cluster")->capture_default_str();
  synth_cmd->add_option("--rows", synth.rows, "Sample rows (a)")->capture_default_str();
  synth_cmd->add_option("--cols", synth.cols, "Sample columns (b)")->capture_default_str();
  synth_cmd->add_option("--noise_sigma", synth.noise_sigma, "Gaussian noise level")->capture_default_str();
  synth_cmd->add_option("--jitter", synth.jitter, "Template scale jitter")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output bundle")->required();

  // corrupt
  std::string corrupt_in, corrupt_format = "bundle", corrupt_out;
  double corrupt_fraction = 0.0;
  std::uint64_t corrupt_seed = 0;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Zero a fixed fraction of entries per sample");
  corrupt_cmd->add_option("--dataset", corrupt_in)->required();
  corrupt_cmd->add_option("--format", corrupt_format)->capture_default_str();
  corrupt_cmd->add_option("--fraction", corrupt_fraction)->required();
  corrupt_cmd->add_option("--seed", corrupt_seed)->capture_default_str();
  corrupt_cmd->add_option("--out", corrupt_out, "Output bundle")->required();

  // fit
  SolverConfig solver;
  std::string fit_in, fit_format = "bundle", fit_model;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model and save it");
  fit_cmd->add_option("--dataset", fit_in)->required();
  fit_cmd->add_option("--format", fit_format)->capture_default_str();
  fit_cmd->add_option("--k", solver.k)->capture_default_str();
  fit_cmd->add_option("--r", solver.r)->capture_default_str();
  fit_cmd->add_option("--lambda1", solver.lambda1)->capture_default_str();
  fit_cmd->add_option("--lambda2", solver.lambda2)->capture_default_str();
  fit_cmd->add_option("--t_max", solver.t_max)->capture_default_str();
  fit_cmd->add_option("--rel_tol", solver.rel_tol)->capture_default_str();
  fit_cmd->add_option("--m_neighbors", solver.m_neighbors)->capture_default_str();
  fit_cmd->add_option("--restarts", solver.kmeans_restarts)->capture_default_str();
  fit_cmd->add_option("--seed", solver.seed)->capture_default_str();
  fit_cmd->add_option("--model", fit_model, "Output model file")->required();

  // predict
  std::string predict_model, predict_out;
  int predict_restarts = 10;
  std::uint64_t predict_seed = 0;
  auto* predict_cmd = app.add_subcommand("predict", "Cluster labels from a saved model, one per line");
  predict_cmd->add_option("--model", predict_model)->required();
  predict_cmd->add_option("--restarts", predict_restarts)->capture_default_str();
  predict_cmd->add_option("--seed", predict_seed)->capture_default_str();
  predict_cmd->add_option("--out", predict_out, "Labels file (default stdout)");

  // eval
  std::string eval_pred, eval_truth, eval_dataset, eval_format = "bundle";
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted labels: acc,nmi,purity");
  eval_cmd->add_option("--pred", eval_pred, "Predicted labels file")->required();
  auto* truth_opt = eval_cmd->add_option("--truth", eval_truth, "True labels file");
  auto* eval_data_opt = eval_cmd->add_option("--dataset", eval_dataset, "Labeled dataset");
  eval_cmd->add_option("--format", eval_format)->capture_default_str();
  truth_opt->excludes(eval_data_opt);

  // experiment, r-curve, lambda-surface
  ExperimentFlags exp_flags, curve_flags, surface_flags;
  std::string exp_out, exp_summary, curve_out, curve_raw, surface_out, surface_raw;
  auto* exp_cmd = app.add_subcommand("experiment", "Subset x grid protocol with raw and summary CSVs");
  exp_flags.attach(exp_cmd);
  exp_cmd->add_option("--out", exp_out, "Raw rows CSV")->required();
  exp_cmd->add_option("--summary", exp_summary, "Summary CSV")->required();
  auto* curve_cmd = app.add_subcommand("r-curve", "Best-over-lambda scores per rank");
  curve_flags.attach(curve_cmd);
  curve_cmd->add_option("--out", curve_out, "Curve CSV (default stdout)");
  curve_cmd->add_option("--raw", curve_raw, "Also write every run");
  auto* surface_cmd = app.add_subcommand("lambda-surface", "Best-over-rank scores per (lambda1, lambda2)");
  surface_flags.attach(surface_cmd);
  surface_cmd->add_option("--out", surface_out, "Surface CSV (default stdout)");
  surface_cmd->add_option("--raw", surface_raw, "Also write every run");

  // bench
  std::vector<Index> bench_sizes{200, 400, 800};
  BenchOptions bench;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Time one outer iteration per sample count");
  bench_cmd->add_option("--sizes", bench_sizes)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--rows", bench.rows)->capture_default_str();
  bench_cmd->add_option("--cols", bench.cols)->capture_default_str();
  bench_cmd->add_option("--k", bench.k)->capture_default_str();
  bench_cmd->add_option("--r", bench.r)->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Bench CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) {
      save_bundle(synth_out, synth_clusters(synth));
    } else if (corrupt_cmd->parsed()) {
      save_bundle(corrupt_out, corrupt(read_dataset(corrupt_in, corrupt_format, false),
                                       corrupt_fraction, corrupt_seed));
    } else if (fit_cmd->parsed()) {
      const Dataset2D data = read_dataset(fit_in, fit_format, false);
      const FitResult res = fit(data, solver);
      save_model(fit_model, res.model, solver);
      std::cerr << "iterations " << res.iterations << (res.converged ? " (converged)" : "")
                << ", objective " << format_double(res.trace.back()) << "\n";
      if (res.degenerate_columns > 0)
        std::cerr << "warning: " << res.degenerate_columns << " empty coefficient column(s)\n";
    } else if (predict_cmd->parsed()) {
      const StoredModel stored = load_model(predict_model);
      const auto labels = predict_labels(stored.model, stored.config.k, predict_restarts, predict_seed);
      emit(predict_out, [&](std::ostream& out) {
        for (int l : labels) out << l << "\n";
      });
    } else if (eval_cmd->parsed()) {
      if (truth_opt->count() == 0 && eval_data_opt->count() == 0)
        throw UsageError("eval needs --truth or --dataset");
      const auto pred = read_labels(eval_pred);
      const auto truth = truth_opt->count() > 0
                             ? read_labels(eval_truth)
                             : read_dataset(eval_dataset, eval_format, true).labels();
      if (pred.size() != truth.size())
        throw DataError("eval: " + std::to_string(pred.size()) + " predictions for " +
                        std::to_string(truth.size()) + " labels");
      const Scores s = score(pred, truth);
      std::cout << "acc,nmi,purity\n"
                << format_double(s.acc) << "," << format_double(s.nmi) << ","
                << format_double(s.purity) << "\n";
    } else if (exp_cmd->parsed()) {
      const ExperimentConfig config = exp_flags.resolve();
      const ExperimentResults res =
          run_experiment(read_dataset(config.dataset, config.format, true), config);
      write_file(exp_out, [&](std::ostream& out) { write_rows_csv(out, res.rows); });
      write_file(exp_summary, [&](std::ostream& out) { write_summary_csv(out, res.summary); });
    } else if (curve_cmd->parsed()) {
      const ExperimentConfig config = curve_flags.resolve(extended_rank_grid());
      std::vector<ResultRow> raw;
      const auto rows = emit_r_curve(read_dataset(config.dataset, config.format, true), config, &raw);
      emit(curve_out, [&](std::ostream& out) { write_r_curve_csv(out, rows); });
      if (!curve_raw.empty()) write_file(curve_raw, [&](std::ostream& out) { write_rows_csv(out, raw); });
    } else if (surface_cmd->parsed()) {
      const ExperimentConfig config = surface_flags.resolve();
      std::vector<ResultRow> raw;
      const auto cells =
          emit_lambda_surface(read_dataset(config.dataset, config.format, true), config, &raw);
      emit(surface_out, [&](std::ostream& out) { write_lambda_surface_csv(out, cells); });
      if (!surface_raw.empty())
        write_file(surface_raw, [&](std::ostream& out) { write_rows_csv(out, raw); });
    } else if (bench_cmd->parsed()) {
      const auto rows = bench_scaling(bench_sizes, bench);
      emit(bench_out, [&](std::ostream& out) { write_bench_csv(out, rows); });
      if (rows.size() >= 2) std::cerr << "log-log slope " << format_double(loglog_slope(rows)) << "\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
