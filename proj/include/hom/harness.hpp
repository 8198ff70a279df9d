#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hom/fitter.hpp"
#include "hom/records.hpp"

namespace hom::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_validation = 1,
  exit_runtime = 2,
  exit_fit = 3,
};

/// Worker cap from HOMBENCH_THREADS; 0 (OpenMP default) when unset or invalid.
int thread_cap_from_env();

/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_number(double value);

/// Accepts "1000000" as well as "1e6"; the value must be a positive integer.
std::uint64_t parse_count(const std::string& text);

/// delay_ps,gates,singles_a,singles_b,coincidences with one row per delay.
/// When `repeats` holds more than one run, the rows are totals over the runs
/// and mean,stddev of the coincidences across runs are appended.
std::string scan_csv(std::span<const ScanPoint> totals,
                     std::span<const std::vector<ScanPoint>> repeats = {});

nlohmann::ordered_json fit_to_json(const FitResult& fit);

struct CountsTable {
  std::vector<double> delays;
  std::vector<double> counts;
};

/// Reads a CSV with a header naming `delay_ps` and `coincidences` (or
/// `counts`); other columns are ignored.
CountsTable read_counts_csv(std::istream& in);

/// Entry point of the hombench tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hom::harness
