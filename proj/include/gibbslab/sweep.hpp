#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gibbslab {

// One measured quantity at one sweep point. std_err is empty for exact
// (non-Monte-Carlo) values.
struct SweepRow {
  double sweep_variable = 0.0;
  std::string quantity;
  double value = 0.0;
  std::optional<double> std_err;
  long n = 0;
  long m = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  void add(double sweep_variable, std::string quantity, double value,
           std::optional<double> std_err, long n, long m) {
    rows.push_back({sweep_variable, std::move(quantity), value, std_err, n, m});
  }

  // Stable sort by sweep variable; ties keep insertion order.
  void sort_rows();

  std::vector<const SweepRow*> rows_for(const std::string& quantity) const;
};

// Fixed schema: sweep_variable,quantity,value,std_err,n,m with floats at 17
// significant digits. Byte-identical for identical inputs.
void write_csv(std::ostream& out, const SweepResult& result);
void write_csv_file(const std::string& path, const SweepResult& result);
SweepResult read_csv_file(const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace gibbslab
