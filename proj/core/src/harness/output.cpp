#include "ipmlab/harness/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ipmlab::harness {

namespace schemas {
CsvSchema convergence() {
  return {"convergence", {"k", "n", "R", "metric", "value", "ci_half_width", "seed"}};
}
CsvSchema transition_gap() {
  return {"transition_gap", {"x", "exact_estimate", "ipm_prediction", "gap", "ci_half_width"}};
}
CsvSchema eta_variance() {
  return {"eta_variance", {"N", "R", "var_eta", "cov_estimate", "cov_ci_half_width"}};
}
CsvSchema lln_dependence() {
  return {"lln_dependence",
          {"N", "R", "g_min", "g_max", "correlation", "ci_lo", "ci_hi", "mean_of_means",
           "mean_ci_half_width", "expected_mean"}};
}
CsvSchema ipm_grid() { return {"ipm_grid", {"generation", "bin", "bin_mid", "density"}}; }
CsvSchema population(std::size_t dim) {
  CsvSchema s{"population", {"n", "replicate", "generation", "slot", "fitness"}};
  for (std::size_t i = 0; i < dim; ++i) s.columns.push_back("x" + std::to_string(i));
  return s;
}
}  // namespace schemas

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_value(const CsvValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return std::to_string(x);
        }
      },
      v);
}

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::size_t emit_results(const std::vector<CsvRecord>& records, const CsvSchema& schema,
                         const std::filesystem::path& path) {
  for (const auto& r : records) {
    if (r.size() != schema.columns.size()) {
      throw std::invalid_argument("record width " + std::to_string(r.size()) +
                                  " does not match schema '" + schema.name + "'");
    }
  }
  auto out = open_for_write(path);
  write_row(out, schema.columns);
  std::vector<std::string> cells;
  for (const auto& r : records) {
    cells.clear();
    for (const auto& v : r) cells.push_back(format_value(v));
    write_row(out, cells);
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
  return records.size();
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  return std::strtod(cell.c_str(), nullptr);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV '" + path.string() + "'");
  t.header = split(line);
  while (std::getline(in, line)) {
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error("ragged row in '" + path.string() + "'");
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::vector<CsvRecord> convergence_records(const diagnostics::ConvergenceCurve& curve) {
  std::vector<CsvRecord> out;
  out.reserve(curve.size());
  for (const auto& r : curve.rows()) {
    out.push_back({static_cast<std::uint64_t>(r.k), static_cast<std::uint64_t>(r.n),
                   static_cast<std::uint64_t>(r.replicates), r.metric, r.value, r.ci_half_width,
                   r.seed});
  }
  return out;
}

diagnostics::ConvergenceCurve read_convergence_curve(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != schemas::convergence().columns) {
    throw std::runtime_error("'" + path.string() + "' does not have the convergence schema");
  }
  diagnostics::ConvergenceCurve curve;
  for (const auto& row : t.rows) {
    diagnostics::ConvergenceRow r;
    r.k = std::stoull(row[0]);
    r.n = std::stoull(row[1]);
    r.replicates = std::stoull(row[2]);
    r.metric = row[3];
    r.value = std::strtod(row[4].c_str(), nullptr);
    r.ci_half_width = std::strtod(row[5].c_str(), nullptr);
    r.seed = std::stoull(row[6]);
    curve.add(std::move(r));
  }
  return curve;
}

std::size_t emit_lines(const std::vector<std::string>& lines, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
  return lines.size();
}

}  // namespace ipmlab::harness
