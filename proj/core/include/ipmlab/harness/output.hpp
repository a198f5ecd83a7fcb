#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "ipmlab/diagnostics.hpp"

namespace ipmlab::harness {

struct CsvSchema {
  std::string name;
  std::vector<std::string> columns;
};

using CsvValue = std::variant<std::int64_t, std::uint64_t, double, std::string>;
using CsvRecord = std::vector<CsvValue>;

namespace schemas {
CsvSchema convergence();      // k,n,R,metric,value,ci_half_width,seed
CsvSchema transition_gap();   // x,exact_estimate,ipm_prediction,gap,ci_half_width
CsvSchema eta_variance();     // N,R,var_eta,cov_estimate,cov_ci_half_width
CsvSchema lln_dependence();   // one summary row of the y_l = z_l + y experiment
CsvSchema ipm_grid();         // generation,bin,bin_mid,density
CsvSchema population(std::size_t dim);  // n,replicate,generation,slot,fitness,x0..
}  // namespace schemas

/// %.17g-style text; round-trips exactly through strtod.
std::string format_double(double x);
std::string format_value(const CsvValue& v);

/// Writes header plus one line per record ("\n" endings) and returns the
/// number of data rows. Throws std::runtime_error when the path is not
/// writable and std::invalid_argument on a record of the wrong width.
std::size_t emit_results(const std::vector<CsvRecord>& records, const CsvSchema& schema,
                         const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<CsvRecord> convergence_records(const diagnostics::ConvergenceCurve& curve);
diagnostics::ConvergenceCurve read_convergence_curve(const std::filesystem::path& path);

/// Writes one line per entry; returns the line count.
std::size_t emit_lines(const std::vector<std::string>& lines, const std::filesystem::path& path);

}  // namespace ipmlab::harness
