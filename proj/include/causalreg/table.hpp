#pragma once

#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "causalreg/errors.hpp"

namespace causalreg {

/// 17 significant digits: enough to round-trip a double exactly.
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Shorter form for axis labels and names.
inline std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

/// Long-format result row. replication == kAggregate marks rows aggregated
/// over replications (means, medians, coverage rates).
struct ResultRow {
  std::string run_id;
  std::string experiment;
  long replication = 0;
  long n = 0;
  double lambda = 0;  // +inf for the causal-Dantzig endpoint
  std::string metric;
  double value = 0;
};

constexpr long kAggregate = -1;

class ResultTable {
 public:
  void add(ResultRow row) {
    auto key = std::make_tuple(row.run_id, row.experiment, row.replication, row.n,
                               format_value(row.lambda), row.metric);
    if (!keys_.insert(key).second) {
      throw InvalidInput("duplicate result key: " + row.experiment + "/" + row.metric);
    }
    rows_.push_back(std::move(row));
  }

  void add(const ResultTable& other) {
    for (const auto& row : other.rows_) add(row);
  }

  const std::vector<ResultRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  void write_csv(std::ostream& os) const {
    os << "run_id,experiment,replication,n,lambda,metric,value\n";
    for (const auto& r : rows_) {
      os << r.run_id << ',' << r.experiment << ',' << r.replication << ',' << r.n << ','
         << format_value(r.lambda) << ',' << r.metric << ',' << format_value(r.value)
         << '\n';
    }
  }

 private:
  std::vector<ResultRow> rows_;
  std::set<std::tuple<std::string, std::string, long, long, std::string, std::string>> keys_;
};

}  // namespace causalreg
