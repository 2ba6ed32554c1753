#include "gibbslab/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gibbslab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void SweepResult::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return a.sweep_variable < b.sweep_variable;
                   });
}

std::vector<const SweepRow*> SweepResult::rows_for(
    const std::string& quantity) const {
  std::vector<const SweepRow*> out;
  for (const auto& r : rows)
    if (r.quantity == quantity) out.push_back(&r);
  return out;
}

void write_csv(std::ostream& out, const SweepResult& result) {
  out << "sweep_variable,quantity,value,std_err,n,m\n";
  for (const auto& r : result.rows) {
    out << format_double(r.sweep_variable) << ',' << r.quantity << ','
        << format_double(r.value) << ',';
    if (r.std_err) out << format_double(*r.std_err);
    out << ',' << r.n << ',' << r.m << '\n';
  }
}

void write_csv_file(const std::string& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(out, result);
}

SweepResult read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty sweep csv: " + path);
  SweepResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    SweepRow row;
    std::getline(ss, field, ',');
    row.sweep_variable = std::stod(field);
    std::getline(ss, row.quantity, ',');
    std::getline(ss, field, ',');
    row.value = std::stod(field);
    std::getline(ss, field, ',');
    if (!field.empty()) row.std_err = std::stod(field);
    std::getline(ss, field, ',');
    row.n = std::stol(field);
    std::getline(ss, field, ',');
    row.m = std::stol(field);
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace gibbslab
