#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "causalreg/errors.hpp"
#include "causalreg/sem.hpp"
#include "causalreg/table.hpp"

namespace causalreg {

/// Two-environment CSV layout: header x1..xp,y,env; comma separated, '.'
/// decimal, UTF-8.
inline void write_env_pair_csv(std::ostream& os, const EnvPair& pair) {
  check_env_pair(pair);
  const int p = pair.obs.p();
  for (int j = 0; j < p; ++j) os << 'x' << (j + 1) << ',';
  os << "y,env\n";
  const auto write_rows = [&](const Dataset& d) {
    for (long i = 0; i < d.n(); ++i) {
      for (int j = 0; j < p; ++j) os << format_value(d.x(i, j)) << ',';
      os << format_value(d.y(i)) << ',' << d.label << '\n';
    }
  };
  write_rows(pair.obs);
  write_rows(pair.shifted);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw NonNumericCell(row, col, "non-numeric cell at row " + std::to_string(row) +
                                       ", column " + std::to_string(col));
  }
  return v;
}

inline Dataset collect(const std::vector<std::vector<double>>& x,
                       const std::vector<double>& y, const std::string& label,
                       bool center) {
  Dataset d;
  d.label = label;
  const long n = static_cast<long>(y.size());
  const int p = n > 0 ? static_cast<int>(x.front().size()) : 0;
  d.x.resize(n, p);
  d.y.resize(n);
  for (long i = 0; i < n; ++i) {
    d.y(i) = y[static_cast<std::size_t>(i)];
    for (int j = 0; j < p; ++j) d.x(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (center && n > 0) {
    d.y.array() -= d.y.mean();
    const Eigen::RowVectorXd means = d.x.colwise().mean();
    d.x.rowwise() -= means;
  }
  return d;
}

}  // namespace detail

/// Parses a two-environment CSV. env_labels holds exactly two labels, the
/// observational one first. center applies per-environment mean-centering of
/// every column.
inline EnvPair ingest_csv(std::istream& is, const std::string& env_column,
                          const std::vector<std::string>& env_labels, bool center) {
  if (env_labels.size() != 2) throw InvalidInput("ingest_csv: exactly two environment labels");
  std::string line;
  if (!std::getline(is, line)) throw MissingColumn("ingest_csv: empty file, no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = detail::split_csv_line(line);
  long env_col = -1, y_col = -1;
  std::vector<std::size_t> x_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == env_column) {
      env_col = static_cast<long>(j);
    } else if (header[j] == "y") {
      y_col = static_cast<long>(j);
    } else {
      x_cols.push_back(j);
    }
  }
  if (env_col < 0) throw MissingColumn("ingest_csv: missing environment column '" + env_column + "'");
  if (y_col < 0) throw MissingColumn("ingest_csv: missing target column 'y'");

  std::vector<std::vector<double>> x_obs, x_shift;
  std::vector<double> y_obs, y_shift;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw NonNumericCell(row, cells.size(), "row " + std::to_string(row) +
                                                  " has a wrong number of fields");
    }
    const std::string& label = cells[static_cast<std::size_t>(env_col)];
    const bool observational = label == env_labels[0];
    if (!observational && label != env_labels[1]) {
      throw UnknownLabel("ingest_csv: unknown environment label '" + label + "' at row " +
                         std::to_string(row));
    }
    std::vector<double> xs;
    xs.reserve(x_cols.size());
    for (std::size_t j : x_cols) xs.push_back(detail::parse_cell(cells[j], row, j));
    const double y = detail::parse_cell(cells[static_cast<std::size_t>(y_col)], row,
                                        static_cast<std::size_t>(y_col));
    if (observational) {
      x_obs.push_back(std::move(xs));
      y_obs.push_back(y);
    } else {
      x_shift.push_back(std::move(xs));
      y_shift.push_back(y);
    }
  }
  if (y_obs.empty()) throw EmptyEnvironment("ingest_csv: no rows labelled '" + env_labels[0] + "'");
  if (y_shift.empty()) throw EmptyEnvironment("ingest_csv: no rows labelled '" + env_labels[1] + "'");

  EnvPair pair{detail::collect(x_obs, y_obs, env_labels[0], center),
               detail::collect(x_shift, y_shift, env_labels[1], center)};
  check_env_pair(pair);
  return pair;
}

inline EnvPair ingest_csv_file(const std::string& path, const std::string& env_column,
                               const std::vector<std::string>& env_labels, bool center) {
  std::ifstream in(path);
  if (!in) throw DataError("ingest_csv: cannot open '" + path + "'");
  return ingest_csv(in, env_column, env_labels, center);
}

}  // namespace causalreg
