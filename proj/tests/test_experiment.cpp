#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"

using namespace tsnmf;
using Catch::Approx;

namespace {

Dataset2D separated(int n_per = 20, std::uint64_t seed = 1) {
  SynthOptions opt;
  opt.k = 3;
  opt.n_per = n_per;
  opt.rows = 8;
  opt.cols = 8;
  opt.seed = seed;
  return synth_clusters(opt);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.N_values = {2, 3};
  c.subsets_per_N = 2;
  c.lambdas = {0.01, 1.0};
  c.ranks = {2, 3};
  c.t_max = 20;
  c.restarts = 2;
  c.seed = 17;
  c.record_timing = false;
  return c;
}

template <typename Writer, typename Rows>
std::string render(Writer writer, const Rows& rows) {
  std::ostringstream out;
  writer(out, rows);
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::tsnmf, Method::seminmf, Method::kmeans, Method::twodpca_kmeans})
    CHECK(parse_method(method_name(m)) == m);
  CHECK(method_name(Method::twodpca_kmeans) == "twodpca+kmeans");
  CHECK_THROWS_AS(parse_method("pca"), DimensionError);
}

TEST_CASE("method grids are sorted, deduplicated and rank-capped") {
  const auto g = method_grid(Method::tsnmf, {1.0, 0.1}, {5, 1, 3}, 4);
  REQUIRE(g.size() == 8);
  CHECK(std::is_sorted(g.begin(), g.end()));
  for (const GridPoint& p : g) CHECK(p.r <= 4);
  CHECK(g.front().lambda1 == 0.1);
  CHECK(method_grid(Method::kmeans, {1.0, 2.0}, {1, 3}, 5).size() == 1);
  CHECK(method_grid(Method::seminmf, {1.0}, {1}, 5).size() == 1);
  CHECK(method_grid(Method::twodpca_kmeans, {1.0, 2.0}, {1, 3, 9}, 5).size() == 2);
  CHECK(method_grid(Method::tsnmf, default_lambda_grid(), {1, 3, 5, 7, 9}, 10).size() == 245);
}

TEST_CASE("one grid point, one subset, one N gives one row") {
  const Dataset2D d = separated();
  ExperimentConfig c = small_config();
  c.N_values = {3};
  c.subsets_per_N = 1;
  c.lambdas = {1.0};
  c.ranks = {3};
  const ExperimentResults res = run_experiment(d, c);
  REQUIRE(res.rows.size() == 1);
  REQUIRE(res.summary.size() == 1);
  const ResultRow& r = res.rows[0];
  CHECK(r.method == "tsnmf");
  CHECK(r.N == 3);
  CHECK(r.wall_ms == 0.0);
  CHECK((r.acc >= 0.0 && r.acc <= 1.0));
  CHECK(r.iterations >= 1);
}

TEST_CASE("row counts follow N x subsets x grid") {
  const Dataset2D d = separated(10);
  const ExperimentResults res = run_experiment(d, small_config());
  CHECK(res.rows.size() == 2u * 2u * 8u);
  CHECK(res.summary.size() == 2);
  for (const ResultRow& r : res.rows) {
    CHECK((r.acc >= 0.0 && r.acc <= 1.0));
    CHECK((r.nmi >= 0.0 && r.nmi <= 1.0));
    CHECK((r.purity > 0.0 && r.purity <= 1.0));
  }
}

TEST_CASE("experiment CSVs are byte-identical across reruns and worker counts") {
  const Dataset2D d = separated(10);
  ExperimentConfig c = small_config();
  const ExperimentResults a = run_experiment(d, c);
  const ExperimentResults b = run_experiment(d, c);
  c.jobs = 3;
  const ExperimentResults p = run_experiment(d, c);
  const std::string raw = render(write_rows_csv, a.rows);
  CHECK(raw == render(write_rows_csv, b.rows));
  CHECK(raw == render(write_rows_csv, p.rows));
  CHECK(render(write_summary_csv, a.summary) == render(write_summary_csv, p.summary));
  CHECK(raw.find('\r') == std::string::npos);
  CHECK(raw.substr(0, raw.find('\n')) ==
        "method,N,subset_seed,lambda1,lambda2,r,acc,nmi,purity,iterations,wall_ms");
}

TEST_CASE("summary matches a recomputation from the raw CSV") {
  const Dataset2D d = separated(10, 3);
  ExperimentConfig c = small_config();
  c.subsets_per_N = 3;
  const ExperimentResults res = run_experiment(d, c);
  const auto table = parse_csv(render(write_rows_csv, res.rows));

  // (N, lambda1, lambda2, r) -> accuracies, nmis, purities
  std::map<std::tuple<int, double, double, int>, std::array<std::vector<double>, 3>> groups;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& row = table[i];
    auto& g = groups[{std::stoi(row[1]), std::stod(row[3]), std::stod(row[4]), std::stoi(row[5])}];
    for (int m = 0; m < 3; ++m) g[static_cast<std::size_t>(m)].push_back(std::stod(row[6 + static_cast<std::size_t>(m)]));
  }
  auto mean = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  auto sd = [&](const std::vector<double>& xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
  };
  for (const SummaryRow& s : res.summary) {
    double best = -1.0;
    std::tuple<int, double, double, int> best_key;
    for (const auto& [key, g] : groups)
      if (std::get<0>(key) == s.N && mean(g[0]) > best) {
        best = mean(g[0]);
        best_key = key;
      }
    CHECK(s.point.lambda1 == std::get<1>(best_key));
    CHECK(s.point.lambda2 == std::get<2>(best_key));
    CHECK(s.point.r == std::get<3>(best_key));
    const auto& g = groups[best_key];
    CHECK(s.subsets == 3);
    CHECK(s.acc_mean == Approx(mean(g[0])).epsilon(1e-12));
    CHECK(s.acc_std == Approx(sd(g[0])).margin(1e-12));
    CHECK(s.nmi_mean == Approx(mean(g[1])).epsilon(1e-12));
    CHECK(s.nmi_std == Approx(sd(g[1])).margin(1e-12));
    CHECK(s.purity_mean == Approx(mean(g[2])).epsilon(1e-12));
    CHECK(s.purity_std == Approx(sd(g[2])).margin(1e-12));
  }
}

TEST_CASE("summary ties go to the smallest grid point") {
  std::vector<ResultRow> rows;
  for (double l1 : {1.0, 0.5})
    for (int r : {3, 1}) {
      ResultRow row;
      row.method = "tsnmf";
      row.N = 2;
      row.lambda1 = l1;
      row.r = r;
      row.acc = 0.75;
      rows.push_back(row);
    }
  const auto s = summarize(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].point.lambda1 == 0.5);
  CHECK(s[0].point.r == 1);
}

TEST_CASE("separated synthetic clusters reach high summary accuracy") {
  const Dataset2D d = separated(30, 5);
  ExperimentConfig c = small_config();
  c.N_values = {3};
  c.subsets_per_N = 1;
  c.t_max = 100;
  c.restarts = 10;
  const ExperimentResults res = run_experiment(d, c);
  CHECK(res.summary[0].acc_mean >= 0.95);
}

TEST_CASE("baseline methods run through the same harness") {
  const Dataset2D d = separated(10);
  for (Method m : {Method::seminmf, Method::kmeans, Method::twodpca_kmeans}) {
    ExperimentConfig c = small_config();
    c.method = m;
    const ExperimentResults res = run_experiment(d, c);
    const std::size_t grid = m == Method::twodpca_kmeans ? 2 : 1;
    CHECK(res.rows.size() == 4 * grid);
    for (const ResultRow& r : res.rows) {
      CHECK(r.method == method_name(m));
      CHECK((r.acc > 0.0 && r.acc <= 1.0));
    }
  }
}

TEST_CASE("experiment rejects unlabeled data and infeasible N") {
  const Dataset2D d = separated(5);
  ExperimentConfig c = small_config();
  CHECK_THROWS_AS(run_experiment(Dataset2D(d.samples()), c), DataError);
  c.N_values = {4};
  CHECK_THROWS_AS(run_experiment(d, c), DataError);
  c.N_values = {};
  CHECK_THROWS_AS(run_experiment(d, c), DimensionError);
  c = small_config();
  c.ranks = {20};
  CHECK_THROWS_AS(run_experiment(d, c), DimensionError);
}

TEST_CASE("r-curve has one row per feasible rank and is reproducible") {
  const Dataset2D d = separated(8);
  ExperimentConfig c = small_config();
  c.ranks = extended_rank_grid();
  const auto a = emit_r_curve(d, c);
  const auto b = emit_r_curve(d, c);
  REQUIRE(a.size() == 4);  // 1, 3, 5, 7 fit an 8 x 8 sample
  CHECK(a[0].r == 1);
  CHECK(a[3].r == 7);
  const std::string text = render(write_r_curve_csv, a);
  CHECK(text == render(write_r_curve_csv, b));
  CHECK(text.substr(0, text.find('\n')) == "r,acc,nmi,purity");
}

TEST_CASE("lambda surface covers the full grid and is flat on separated data") {
  const Dataset2D d = separated(15, 7);
  ExperimentConfig c;
  c.N_values = {3};
  c.subsets_per_N = 2;
  c.ranks = {3};
  c.t_max = 50;
  c.restarts = 3;
  c.seed = 2;
  c.record_timing = false;
  const auto cells = emit_lambda_surface(d, c);
  REQUIRE(cells.size() == 49);
  const std::string text = render(write_lambda_surface_csv, cells);
  CHECK(text == render(write_lambda_surface_csv, emit_lambda_surface(d, c)));
  CHECK(text.substr(0, text.find('\n')) == "lambda1,lambda2,acc,nmi,purity");
  double best = 0.0;
  for (const LambdaCell& cell : cells) best = std::max(best, cell.acc);
  const auto close = std::count_if(cells.begin(), cells.end(),
                                   [&](const LambdaCell& cell) { return cell.acc >= best - 0.05; });
  CHECK(static_cast<double>(close) >= 0.8 * 49.0);
}

TEST_CASE("bench emits one row per size with growing times") {
  BenchOptions opt;
  opt.rows = 8;
  opt.cols = 8;
  opt.repeats = 2;
  const auto rows = bench_scaling({60, 240}, opt);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].d == 64);
  CHECK(rows[1].n == 240);
  CHECK(rows[1].wall_ms > rows[0].wall_ms);
  CHECK(render(write_bench_csv, rows).substr(0, 12) == "n,d,wall_ms\n");
}

TEST_CASE("loglog slope recovers a power law") {
  std::vector<BenchRow> rows;
  for (Index n : {100, 200, 400, 800}) rows.push_back({n, 1, 3e-4 * std::pow(static_cast<double>(n), 2.0)});
  CHECK(loglog_slope(rows) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({rows[0]}), DimensionError);
}

TEST_CASE("config files parse keys, lists and comments") {
  std::istringstream in(
      "# experiment\n"
      "dataset = data/faces.txt\n"
      "N_values = 2, 3,4\n"
      "lambdas = 1e-3, 1\n"
      "ranks = 1,3   # trailing comment\n"
      "seed = 18446744073709551615\n"
      "method = twodpca+kmeans\n"
      "record_timing = false\n");
  ExperimentConfig c;
  apply_config(c, parse_key_values(in, "cfg"));
  CHECK(c.dataset == "data/faces.txt");
  CHECK(c.N_values == std::vector<int>{2, 3, 4});
  CHECK(c.lambdas == std::vector<double>{1e-3, 1.0});
  CHECK(c.ranks == std::vector<int>{1, 3});
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.method == Method::twodpca_kmeans);
  CHECK(!c.record_timing);
  CHECK(c.subsets_per_N == 10);

  std::istringstream bad_key("colour = red\n");
  CHECK_THROWS_AS(apply_config(c, parse_key_values(bad_key, "cfg")), DimensionError);
  std::istringstream no_eq("just words\n");
  CHECK_THROWS_AS(parse_key_values(no_eq, "cfg"), DimensionError);
  std::istringstream bad_num("t_max = ten\n");
  CHECK_THROWS_AS(apply_config(c, parse_key_values(bad_num, "cfg")), DataError);
}
