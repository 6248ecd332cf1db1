#ifndef TSNMF_IO_HPP
#define TSNMF_IO_HPP

// Dataset files.
//
// Bundle (text):
//   TSNMF-BUNDLE 1
//   n a b labels={0|1}
//   n blocks of a lines, b space-separated values each (17 significant digits)
//   [one line of n space-separated integer labels]
//
// CSV directory: one numeric CSV matrix per file, read in lexicographic
// filename order, plus an optional labels.csv holding one label per line.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tsnmf/dataset.hpp"

namespace tsnmf {

/// Shortest round-trip-safe decimal (17 significant digits).
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view token, const std::string& where) {
  token = trim(token);
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"')
    token = trim(token.substr(1, token.size() - 2));
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw DataError(where + ": cannot parse number '" + std::string(token) + "'");
  return value;
}

inline long long parse_integer(std::string_view token, const std::string& where) {
  token = trim(token);
  long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw DataError(where + ": cannot parse integer '" + std::string(token) + "'");
  return value;
}

inline std::uint64_t parse_unsigned(std::string_view token, const std::string& where) {
  token = trim(token);
  std::uint64_t value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw DataError(where + ": cannot parse unsigned integer '" + std::string(token) + "'");
  return value;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    if (pos >= line.size()) break;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    out.push_back(line.substr(start, pos - start));
  }
  return out;
}

inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line))
    if (!trim(line).empty()) return true;
  return false;
}

}  // namespace detail

inline void write_bundle(std::ostream& out, const Dataset2D& data) {
  out << "TSNMF-BUNDLE 1\n";
  out << data.size() << ' ' << data.rows() << ' ' << data.cols()
      << " labels=" << (data.has_labels() ? 1 : 0) << '\n';
  for (const Matrix& x : data.samples())
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) {
        if (j) out << ' ';
        out << format_double(x(i, j));
      }
      out << '\n';
    }
  if (data.has_labels()) {
    const auto& labels = data.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? " " : "") << labels[i];
    out << '\n';
  }
}

inline Dataset2D read_bundle(std::istream& in, const std::string& name = "bundle") {
  std::string line;
  if (!detail::next_line(in, line) || detail::trim(line) != "TSNMF-BUNDLE 1")
    throw DataError(name + ": missing 'TSNMF-BUNDLE 1' header");
  if (!detail::next_line(in, line)) throw DataError(name + ": missing dimension line");
  const auto head = detail::split_ws(line);
  if (head.size() != 4 || head[3].substr(0, 7) != "labels=")
    throw DataError(name + ": dimension line must read 'n a b labels={0|1}'");
  const long long n = detail::parse_integer(head[0], name);
  const long long a = detail::parse_integer(head[1], name);
  const long long b = detail::parse_integer(head[2], name);
  const long long flag = detail::parse_integer(head[3].substr(7), name);
  if (n < 1 || a < 1 || b < 1 || (flag != 0 && flag != 1))
    throw DataError(name + ": invalid dimensions or label flag");

  std::vector<Matrix> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (long long s = 0; s < n; ++s) {
    Matrix x(a, b);
    for (long long i = 0; i < a; ++i) {
      if (!detail::next_line(in, line))
        throw DataError(name + ": truncated at sample " + std::to_string(s));
      const auto tokens = detail::split_ws(line);
      if (static_cast<long long>(tokens.size()) != b)
        throw DataError(name + ": sample " + std::to_string(s) + " row " + std::to_string(i) +
                        " has " + std::to_string(tokens.size()) + " values, expected " +
                        std::to_string(b));
      for (long long j = 0; j < b; ++j)
        x(i, j) = detail::parse_double(tokens[static_cast<std::size_t>(j)], name);
    }
    samples.push_back(std::move(x));
  }
  std::optional<std::vector<int>> labels;
  if (flag == 1) {
    if (!detail::next_line(in, line)) throw DataError(name + ": missing label line");
    const auto tokens = detail::split_ws(line);
    if (static_cast<long long>(tokens.size()) != n)
      throw DataError(name + ": expected " + std::to_string(n) + " labels");
    labels.emplace();
    for (auto t : tokens) labels->push_back(static_cast<int>(detail::parse_integer(t, name)));
  }
  if (detail::next_line(in, line)) throw DataError(name + ": unexpected trailing content");
  return Dataset2D(std::move(samples), std::move(labels));
}

inline void save_bundle(const std::filesystem::path& path, const Dataset2D& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_bundle(out, data);
  if (!out) throw DataError("failed writing " + path.string());
}

inline Dataset2D load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return read_bundle(in, path.string());
}

/// One numeric CSV matrix (comma separated, optional double quotes).
inline Matrix read_csv_matrix(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (detail::next_line(in, line)) {
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(detail::parse_double(rest.substr(0, comma), name));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(name + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(name + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

inline Dataset2D load_csv_dir(const std::filesystem::path& dir, bool require_labels = false) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename() != "labels.csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& x, const fs::path& y) { return x.filename().string() < y.filename().string(); });
  if (files.empty()) throw DataError(dir.string() + ": no CSV matrices found");

  std::vector<Matrix> samples;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw DataError("cannot read " + f.string());
    samples.push_back(read_csv_matrix(in, f.string()));
  }

  std::optional<std::vector<int>> labels;
  const fs::path label_file = dir / "labels.csv";
  if (fs::exists(label_file)) {
    std::ifstream in(label_file, std::ios::binary);
    std::string line;
    labels.emplace();
    while (detail::next_line(in, line))
      labels->push_back(static_cast<int>(detail::parse_integer(line, label_file.string())));
  } else if (require_labels) {
    throw DataError(dir.string() + ": labels.csv is missing");
  }
  return Dataset2D(std::move(samples), std::move(labels));
}

enum class DatasetFormat { bundle, csv_dir };

inline DatasetFormat parse_format(const std::string& s) {
  if (s == "bundle") return DatasetFormat::bundle;
  if (s == "csv-dir") return DatasetFormat::csv_dir;
  throw DimensionError("unknown dataset format '" + s + "' (expected bundle or csv-dir)");
}

inline Dataset2D load_dataset(const std::filesystem::path& path, DatasetFormat format,
                              bool require_labels = false) {
  Dataset2D data = format == DatasetFormat::bundle ? load_bundle(path) : load_csv_dir(path, require_labels);
  if (require_labels && !data.has_labels()) throw DataError(path.string() + ": dataset has no labels");
  return data;
}

}  // namespace tsnmf

#endif  // TSNMF_IO_HPP
