#ifndef TSNMF_MODEL_IO_HPP
#define TSNMF_MODEL_IO_HPP

// Fitted-model text format:
//
//   TSNMF-MODEL 1
//   dims <n> <a> <b> <k> <r>
//   config k=.. r=.. lambda1=.. lambda2=.. t_max=.. rel_tol=.. m_neighbors=.. epsilon_div=.. seed=.. kmeans_restarts=..
//   centroid <j>        (k times, each followed by a rows of b values)
//   coefficients        (n rows of k values)
//   right               (b rows of r values)
//   left                (a rows of r values)
//
// Values are written row-major with 17 significant digits, so loading
// reproduces every double exactly.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "tsnmf/io.hpp"
#include "tsnmf/solver.hpp"

namespace tsnmf {

struct StoredModel {
  FactorModel model;
  SolverConfig config;
};

namespace detail {

inline void write_block(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline Matrix read_block(std::istream& in, Index rows, Index cols, const std::string& what) {
  Matrix m(rows, cols);
  std::string line;
  for (Index i = 0; i < rows; ++i) {
    if (!next_line(in, line)) throw DataError("model: truncated " + what);
    const auto tokens = split_ws(line);
    if (static_cast<Index>(tokens.size()) != cols)
      throw DataError("model: " + what + " row " + std::to_string(i) + " has wrong width");
    for (Index j = 0; j < cols; ++j) m(i, j) = parse_double(tokens[static_cast<std::size_t>(j)], what);
  }
  return m;
}

inline void expect_tag(std::istream& in, const std::string& tag) {
  std::string line;
  if (!next_line(in, line) || trim(line) != tag) throw DataError("model: expected '" + tag + "'");
}

}  // namespace detail

inline void write_model(std::ostream& out, const FactorModel& model, const SolverConfig& config) {
  const Index k = model.coefficients.cols();
  const Index a = model.left.rows();
  const Index b = model.right.rows();
  out << "TSNMF-MODEL 1\n";
  out << "dims " << model.coefficients.rows() << ' ' << a << ' ' << b << ' ' << k << ' '
      << model.right.cols() << '\n';
  out << "config k=" << config.k << " r=" << config.r
      << " lambda1=" << format_double(config.lambda1)
      << " lambda2=" << format_double(config.lambda2) << " t_max=" << config.t_max
      << " rel_tol=" << format_double(config.rel_tol) << " m_neighbors=" << config.m_neighbors
      << " epsilon_div=" << format_double(config.epsilon_div) << " seed=" << config.seed
      << " kmeans_restarts=" << config.kmeans_restarts << '\n';
  for (Index j = 0; j < k; ++j) {
    out << "centroid " << j << '\n';
    detail::write_block(out, model.centroids[static_cast<std::size_t>(j)]);
  }
  out << "coefficients\n";
  detail::write_block(out, model.coefficients);
  out << "right\n";
  detail::write_block(out, model.right);
  out << "left\n";
  detail::write_block(out, model.left);
}

inline StoredModel read_model(std::istream& in) {
  std::string line;
  if (!detail::next_line(in, line) || detail::trim(line) != "TSNMF-MODEL 1")
    throw DataError("model: missing 'TSNMF-MODEL 1' header");

  if (!detail::next_line(in, line)) throw DataError("model: missing dims line");
  const auto dims = detail::split_ws(line);
  if (dims.size() != 6 || dims[0] != "dims") throw DataError("model: malformed dims line");
  Index shape[5];
  for (int i = 0; i < 5; ++i) {
    shape[i] = static_cast<Index>(detail::parse_integer(dims[static_cast<std::size_t>(i + 1)], "dims"));
    if (shape[i] < 1) throw DataError("model: dimensions must be positive");
  }
  const Index n = shape[0], a = shape[1], b = shape[2], k = shape[3], r = shape[4];

  if (!detail::next_line(in, line)) throw DataError("model: missing config line");
  const auto cfg_tokens = detail::split_ws(line);
  if (cfg_tokens.empty() || cfg_tokens[0] != "config") throw DataError("model: malformed config line");
  std::map<std::string, std::string_view, std::less<>> kv;
  for (std::size_t i = 1; i < cfg_tokens.size(); ++i) {
    const auto eq = cfg_tokens[i].find('=');
    if (eq == std::string_view::npos) throw DataError("model: malformed config entry");
    kv.emplace(std::string(cfg_tokens[i].substr(0, eq)), cfg_tokens[i].substr(eq + 1));
  }
  auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError(std::string("model: config lacks ") + key);
    return it->second;
  };
  StoredModel stored;
  SolverConfig& c = stored.config;
  c.k = static_cast<int>(detail::parse_integer(get("k"), "k"));
  c.r = static_cast<int>(detail::parse_integer(get("r"), "r"));
  c.lambda1 = detail::parse_double(get("lambda1"), "lambda1");
  c.lambda2 = detail::parse_double(get("lambda2"), "lambda2");
  c.t_max = static_cast<int>(detail::parse_integer(get("t_max"), "t_max"));
  c.rel_tol = detail::parse_double(get("rel_tol"), "rel_tol");
  c.m_neighbors = static_cast<int>(detail::parse_integer(get("m_neighbors"), "m_neighbors"));
  c.epsilon_div = detail::parse_double(get("epsilon_div"), "epsilon_div");
  c.seed = detail::parse_unsigned(get("seed"), "seed");
  c.kmeans_restarts = static_cast<int>(detail::parse_integer(get("kmeans_restarts"), "kmeans_restarts"));

  FactorModel& m = stored.model;
  for (Index j = 0; j < k; ++j) {
    detail::expect_tag(in, "centroid " + std::to_string(j));
    m.centroids.push_back(detail::read_block(in, a, b, "centroid"));
  }
  detail::expect_tag(in, "coefficients");
  m.coefficients = detail::read_block(in, n, k, "coefficients");
  detail::expect_tag(in, "right");
  m.right = detail::read_block(in, b, r, "right");
  detail::expect_tag(in, "left");
  m.left = detail::read_block(in, a, r, "left");
  if (detail::next_line(in, line)) throw DataError("model: unexpected trailing content");
  return stored;
}

inline void save_model(const std::filesystem::path& path, const FactorModel& model,
                       const SolverConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, model, config);
  if (!out) throw DataError("failed writing " + path.string());
}

inline StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return read_model(in);
}

}  // namespace tsnmf

#endif  // TSNMF_MODEL_IO_HPP
