#ifndef TSNMF_EXPERIMENT_HPP
#define TSNMF_EXPERIMENT_HPP

// Grid-search experiment runner and CSV reports.
//
// For every class count N and every seeded class subset, each grid point of
// the selected method is fitted, clustered and scored. Raw rows keep every
// run; summaries keep, per (method, N), the grid point with the best mean
// accuracy over subsets (ties go to the lexicographically smallest
// (lambda1, lambda2, r)), reported as mean and sample standard deviation.

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "tsnmf/baselines.hpp"
#include "tsnmf/data.hpp"
#include "tsnmf/io.hpp"
#include "tsnmf/metrics.hpp"
#include "tsnmf/solver.hpp"

namespace tsnmf {

enum class Method { tsnmf, seminmf, kmeans, twodpca_kmeans };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::tsnmf: return "tsnmf";
    case Method::seminmf: return "seminmf";
    case Method::kmeans: return "kmeans";
    case Method::twodpca_kmeans: return "twodpca+kmeans";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "tsnmf") return Method::tsnmf;
  if (s == "seminmf") return Method::seminmf;
  if (s == "kmeans") return Method::kmeans;
  if (s == "twodpca+kmeans") return Method::twodpca_kmeans;
  throw DimensionError("unknown method '" + s + "' (tsnmf, seminmf, kmeans, twodpca+kmeans)");
}

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  return grid;
}

struct ExperimentConfig {
  std::string dataset;
  std::string format = "bundle";
  std::vector<int> N_values;
  int subsets_per_N = 10;
  std::vector<double> lambdas = default_lambda_grid();
  std::vector<int> ranks{1, 3, 5, 7, 9};
  int m_neighbors = 5;
  int t_max = 100;
  double rel_tol = 1e-6;
  int restarts = 10;
  std::uint64_t seed = 0;
  Method method = Method::tsnmf;
  int jobs = 1;
  bool record_timing = true;  // false writes wall_ms = 0 for reproducible files

  void validate() const {
    require(!N_values.empty(), "experiment: N_values must not be empty");
    require(subsets_per_N >= 1, "experiment: subsets_per_N must be at least 1");
    require(!lambdas.empty(), "experiment: lambda grid must not be empty");
    require(!ranks.empty(), "experiment: rank grid must not be empty");
    for (double l : lambdas) require(l >= 0.0, "experiment: lambdas must be nonnegative");
    for (int r : ranks) require(r >= 1, "experiment: ranks must be positive");
    require(t_max >= 1 && restarts >= 1 && m_neighbors >= 1 && jobs >= 1,
            "experiment: t_max, restarts, m_neighbors and jobs must be positive");
  }
};

struct GridPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int r = 0;

  auto key() const { return std::tie(lambda1, lambda2, r); }
  bool operator<(const GridPoint& o) const { return key() < o.key(); }
  bool operator==(const GridPoint& o) const { return key() == o.key(); }
};

struct ResultRow {
  std::string method;
  int N = 0;
  int subset = 0;  // ordinal of the subset within its N
  std::uint64_t subset_seed = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int r = 0;
  double acc = 0.0;
  double nmi = 0.0;
  double purity = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;

  GridPoint point() const { return {lambda1, lambda2, r}; }
};

struct SummaryRow {
  std::string method;
  int N = 0;
  GridPoint point;
  int subsets = 0;
  double acc_mean = 0.0, acc_std = 0.0;
  double nmi_mean = 0.0, nmi_std = 0.0;
  double purity_mean = 0.0, purity_std = 0.0;
};

/// Grid for a method, sorted by (lambda1, lambda2, r). Ranks above `max_rank`
/// are dropped.
inline std::vector<GridPoint> method_grid(Method method, const std::vector<double>& lambdas,
                                          const std::vector<int>& ranks, Index max_rank) {
  std::vector<GridPoint> grid;
  switch (method) {
    case Method::tsnmf:
      for (double l1 : lambdas)
        for (double l2 : lambdas)
          for (int r : ranks)
            if (r <= max_rank) grid.push_back({l1, l2, r});
      break;
    case Method::twodpca_kmeans:
      for (int r : ranks)
        if (r <= max_rank) grid.push_back({0.0, 0.0, r});
      break;
    case Method::seminmf:
    case Method::kmeans:
      grid.push_back({});
      break;
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct RunSettings {
  int m_neighbors = 5;
  int t_max = 100;
  double rel_tol = 1e-6;
  int restarts = 10;
};

/// Fits one method at one grid point on a labeled dataset and scores the
/// resulting partition against its labels. k equals the number of classes.
inline ResultRow run_single(const Dataset2D& data, int k, Method method, const GridPoint& point,
                            const RunSettings& settings, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row;
  row.method = method_name(method);
  row.lambda1 = point.lambda1;
  row.lambda2 = point.lambda2;
  row.r = point.r;
  Partition pred;
  switch (method) {
    case Method::tsnmf: {
      SolverConfig config;
      config.k = k;
      config.r = point.r;
      config.lambda1 = point.lambda1;
      config.lambda2 = point.lambda2;
      config.t_max = settings.t_max;
      config.rel_tol = settings.rel_tol;
      config.m_neighbors = settings.m_neighbors;
      config.seed = seed;
      config.kmeans_restarts = settings.restarts;
      const FitResult result = fit(data, config);
      row.iterations = result.iterations;
      pred = predict_labels(result.model, k, settings.restarts, derive_seed(seed, 1));
      break;
    }
    case Method::seminmf: {
      const SemiNmfResult result = seminmf_fit(vectorize(data), k, settings.t_max, seed, settings.restarts);
      row.iterations = settings.t_max;
      pred = kmeans(result.coefficients, k, settings.restarts, 300, derive_seed(seed, 1)).labels;
      break;
    }
    case Method::kmeans:
      pred = kmeans(vectorize(data).transpose(), k, settings.restarts, 300, seed).labels;
      break;
    case Method::twodpca_kmeans: {
      const TwoDpcaResult pca = twodpca_fit(data, point.r);
      pred = kmeans(twodpca_features(data, pca.basis), k, settings.restarts, 300, seed).labels;
      break;
    }
  }
  const Scores s = score(pred, data.labels());
  row.acc = s.acc;
  row.nmi = s.nmi;
  row.purity = s.purity;
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Runs `count` independent jobs on up to `workers` threads. Job i writes only
/// its own output slot, so results do not depend on the worker count.
template <typename Job>
void run_jobs(std::size_t count, int workers, Job&& job) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Every (N, subset, grid point) run for one method, ordered by N, subset
/// ordinal, then grid point.
inline std::vector<ResultRow> run_grid(const Dataset2D& data, const ExperimentConfig& config,
                                       const std::vector<GridPoint>& grid) {
  config.validate();
  if (!data.has_labels()) throw DataError("experiment: dataset must be labeled");
  struct Subset {
    int N;
    int ordinal;
    std::uint64_t seed;
    Dataset2D data;
  };
  std::vector<Subset> subsets;
  for (int N : config.N_values)
    for (int s = 0; s < config.subsets_per_N; ++s) {
      const std::uint64_t seed = derive_seed(config.seed, N, s);
      subsets.push_back({N, s, seed, sample_subset(data, N, seed)});
    }

  const RunSettings settings{config.m_neighbors, config.t_max, config.rel_tol, config.restarts};
  std::vector<ResultRow> rows(subsets.size() * grid.size());
  run_jobs(rows.size(), config.jobs, [&](std::size_t idx) {
    const Subset& sub = subsets[idx / grid.size()];
    const std::size_t g = idx % grid.size();
    ResultRow row = run_single(sub.data, sub.N, config.method, grid[g], settings,
                               derive_seed(config.seed, sub.N, sub.ordinal, g));
    row.N = sub.N;
    row.subset = sub.ordinal;
    row.subset_seed = sub.seed;
    if (!config.record_timing) row.wall_ms = 0.0;
    rows[idx] = std::move(row);
  });
  return rows;
}

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
inline double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline SummaryRow summarize_point(const std::vector<const ResultRow*>& rows) {
  SummaryRow out;
  std::vector<double> acc, nmi, pur;
  for (const ResultRow* r : rows) {
    acc.push_back(r->acc);
    nmi.push_back(r->nmi);
    pur.push_back(r->purity);
  }
  out.method = rows.front()->method;
  out.N = rows.front()->N;
  out.point = rows.front()->point();
  out.subsets = static_cast<int>(rows.size());
  out.acc_mean = mean_of(acc);
  out.acc_std = std_of(acc);
  out.nmi_mean = mean_of(nmi);
  out.nmi_std = std_of(nmi);
  out.purity_mean = mean_of(pur);
  out.purity_std = std_of(pur);
  return out;
}

}  // namespace detail

/// Groups rows by `group_key`, and within each group keeps the grid point with
/// the highest mean accuracy (smallest grid point on ties).
template <typename KeyFn>
auto best_per_group(const std::vector<ResultRow>& rows, KeyFn group_key) {
  using Key = decltype(group_key(rows.front()));
  std::map<Key, std::map<GridPoint, std::vector<const ResultRow*>>> groups;
  for (const ResultRow& r : rows) groups[group_key(r)][r.point()].push_back(&r);
  std::vector<std::pair<Key, SummaryRow>> out;
  for (const auto& [key, points] : groups) {
    SummaryRow best;
    bool have = false;
    for (const auto& [point, members] : points) {
      SummaryRow s = detail::summarize_point(members);
      if (!have || s.acc_mean > best.acc_mean) {
        best = std::move(s);
        have = true;
      }
    }
    out.emplace_back(key, std::move(best));
  }
  return out;
}

inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  if (rows.empty()) return out;
  for (auto& [key, s] : best_per_group(rows, [](const ResultRow& r) { return std::make_pair(r.method, r.N); }))
    out.push_back(std::move(s));
  return out;
}

struct ExperimentResults {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
};

inline ExperimentResults run_experiment(const Dataset2D& data, const ExperimentConfig& config) {
  const Index max_rank = std::min(data.rows(), data.cols());
  const auto grid = method_grid(config.method, config.lambdas, config.ranks, max_rank);
  if (grid.empty()) throw DimensionError("experiment: no rank in the grid fits the data");
  ExperimentResults out;
  out.rows = run_grid(data, config, grid);
  out.summary = summarize(out.rows);
  return out;
}

struct RCurveRow {
  int r = 0;
  double acc = 0.0, nmi = 0.0, purity = 0.0;
};

inline std::vector<int> extended_rank_grid() { return {1, 3, 5, 7, 9, 11, 13, 15, 17, 19}; }

/// TS-NMF scores per projection rank, with (lambda1, lambda2) tuned over the
/// full lambda grid for each rank. Uses the first entry of N_values.
inline std::vector<RCurveRow> emit_r_curve(const Dataset2D& data, ExperimentConfig config,
                                           std::vector<ResultRow>* raw = nullptr) {
  config.method = Method::tsnmf;
  config.N_values.resize(std::min<std::size_t>(config.N_values.size(), 1));
  const auto grid = method_grid(Method::tsnmf, config.lambdas, config.ranks,
                                std::min(data.rows(), data.cols()));
  if (grid.empty()) throw DimensionError("r-curve: no rank in the grid fits the data");
  std::vector<ResultRow> rows = run_grid(data, config, grid);
  std::vector<RCurveRow> out;
  for (auto& [r, s] : best_per_group(rows, [](const ResultRow& row) { return row.r; }))
    out.push_back({r, s.acc_mean, s.nmi_mean, s.purity_mean});
  if (raw) *raw = std::move(rows);
  return out;
}

struct LambdaCell {
  double lambda1 = 0.0, lambda2 = 0.0;
  double acc = 0.0, nmi = 0.0, purity = 0.0;
};

/// TS-NMF scores on the full lambda x lambda grid, with r tuned per cell.
/// Uses the first entry of N_values.
inline std::vector<LambdaCell> emit_lambda_surface(const Dataset2D& data, ExperimentConfig config,
                                                   std::vector<ResultRow>* raw = nullptr) {
  config.method = Method::tsnmf;
  config.N_values.resize(std::min<std::size_t>(config.N_values.size(), 1));
  const auto grid = method_grid(Method::tsnmf, config.lambdas, config.ranks,
                                std::min(data.rows(), data.cols()));
  if (grid.empty()) throw DimensionError("lambda-surface: no rank in the grid fits the data");
  std::vector<ResultRow> rows = run_grid(data, config, grid);
  std::vector<LambdaCell> out;
  for (auto& [key, s] : best_per_group(rows, [](const ResultRow& row) {
         return std::make_pair(row.lambda1, row.lambda2);
       }))
    out.push_back({key.first, key.second, s.acc_mean, s.nmi_mean, s.purity_mean});
  if (raw) *raw = std::move(rows);
  return out;
}

struct BenchRow {
  Index n = 0;
  Index d = 0;
  double wall_ms = 0.0;  // fastest of the timed outer iterations
};

struct BenchOptions {
  Index rows = 16;
  Index cols = 16;
  int k = 3;
  int r = 3;
  int repeats = 3;
  std::uint64_t seed = 0;
};

/// Wall time of one outer TS-NMF iteration for each sample count.
inline std::vector<BenchRow> bench_scaling(const std::vector<Index>& sizes, const BenchOptions& opt) {
  std::vector<BenchRow> out;
  for (Index n : sizes) {
    require(n >= opt.k && n >= 2, "bench: sample count too small");
    SynthOptions synth;
    synth.k = opt.k;
    synth.n_per = static_cast<int>((n + opt.k - 1) / opt.k);
    synth.rows = opt.rows;
    synth.cols = opt.cols;
    synth.noise_sigma = 0.1;
    synth.seed = derive_seed(opt.seed, n);
    const Dataset2D full = synth_clusters(synth);
    const Dataset2D data(std::vector<Matrix>(full.samples().begin(), full.samples().begin() + n));

    SolverConfig config;
    config.k = opt.k;
    config.r = opt.r;
    config.lambda1 = 1.0;
    config.lambda2 = 1.0;
    config.seed = opt.seed;
    config.kmeans_restarts = 1;
    Solver solver(data, config);
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < std::max(1, opt.repeats); ++rep) {
      const auto start = std::chrono::steady_clock::now();
      solver.step();
      best = std::min(best, std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start).count());
    }
    out.push_back({n, data.dim(), best});
  }
  return out;
}

/// Least-squares slope of log(time) against log(n).
inline double loglog_slope(const std::vector<BenchRow>& rows) {
  require(rows.size() >= 2, "loglog_slope: need at least two sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(rows.size());
  for (const BenchRow& r : rows) {
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.wall_ms);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// CSV output: comma separated, '.' decimals, LF line endings, header first.

inline void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,N,subset_seed,lambda1,lambda2,r,acc,nmi,purity,iterations,wall_ms\n";
  for (const ResultRow& r : rows)
    out << r.method << ',' << r.N << ',' << r.subset_seed << ',' << format_double(r.lambda1) << ','
        << format_double(r.lambda2) << ',' << r.r << ',' << format_double(r.acc) << ','
        << format_double(r.nmi) << ',' << format_double(r.purity) << ',' << r.iterations << ','
        << format_double(r.wall_ms) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,N,lambda1,lambda2,r,subsets,acc_mean,acc_std,nmi_mean,nmi_std,purity_mean,purity_std\n";
  for (const SummaryRow& s : rows)
    out << s.method << ',' << s.N << ',' << format_double(s.point.lambda1) << ','
        << format_double(s.point.lambda2) << ',' << s.point.r << ',' << s.subsets << ','
        << format_double(s.acc_mean) << ',' << format_double(s.acc_std) << ','
        << format_double(s.nmi_mean) << ',' << format_double(s.nmi_std) << ','
        << format_double(s.purity_mean) << ',' << format_double(s.purity_std) << '\n';
}

inline void write_r_curve_csv(std::ostream& out, const std::vector<RCurveRow>& rows) {
  out << "r,acc,nmi,purity\n";
  for (const RCurveRow& r : rows)
    out << r.r << ',' << format_double(r.acc) << ',' << format_double(r.nmi) << ','
        << format_double(r.purity) << '\n';
}

inline void write_lambda_surface_csv(std::ostream& out, const std::vector<LambdaCell>& rows) {
  out << "lambda1,lambda2,acc,nmi,purity\n";
  for (const LambdaCell& c : rows)
    out << format_double(c.lambda1) << ',' << format_double(c.lambda2) << ','
        << format_double(c.acc) << ',' << format_double(c.nmi) << ',' << format_double(c.purity)
        << '\n';
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "n,d,wall_ms\n";
  for (const BenchRow& r : rows) out << r.n << ',' << r.d << ',' << format_double(r.wall_ms) << '\n';
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  writer(out);
  if (!out) throw DataError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Config files: one `key = value` per line, '#' starts a comment.

inline std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& name) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw DimensionError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key(detail::trim(body.substr(0, eq)));
    if (key.empty()) throw DimensionError(name + ":" + std::to_string(lineno) + ": empty key");
    out[key] = std::string(detail::trim(body.substr(eq + 1)));
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::vector<T> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view token = detail::trim(rest.substr(0, comma));
    if (!token.empty()) {
      if constexpr (std::is_floating_point_v<T>)
        out.push_back(detail::parse_double(token, key));
      else
        out.push_back(static_cast<T>(detail::parse_integer(token, key)));
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

/// Applies recognized keys to `config`; unknown keys are rejected.
inline void apply_config(ExperimentConfig& config, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "dataset") config.dataset = value;
    else if (key == "format") config.format = value;
    else if (key == "N_values") config.N_values = parse_list<int>(value, key);
    else if (key == "subsets_per_N") config.subsets_per_N = static_cast<int>(detail::parse_integer(value, key));
    else if (key == "lambdas") config.lambdas = parse_list<double>(value, key);
    else if (key == "ranks") config.ranks = parse_list<int>(value, key);
    else if (key == "m_neighbors") config.m_neighbors = static_cast<int>(detail::parse_integer(value, key));
    else if (key == "t_max") config.t_max = static_cast<int>(detail::parse_integer(value, key));
    else if (key == "rel_tol") config.rel_tol = detail::parse_double(value, key);
    else if (key == "restarts") config.restarts = static_cast<int>(detail::parse_integer(value, key));
    else if (key == "seed") config.seed = detail::parse_unsigned(value, key);
    else if (key == "method") config.method = parse_method(value);
    else if (key == "jobs") config.jobs = static_cast<int>(detail::parse_integer(value, key));
    else if (key == "record_timing") config.record_timing = value == "1" || value == "true";
    else throw DimensionError("unknown config key '" + key + "'");
  }
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config " + path);
  ExperimentConfig config;
  apply_config(config, parse_key_values(in, path));
  return config;
}

}  // namespace tsnmf

#endif  // TSNMF_EXPERIMENT_HPP
