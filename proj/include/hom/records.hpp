#pragma once

#include <cstdint>
#include <vector>

namespace hom {

/// Click pattern of one gate as two bits: A = 1, B = 2.
enum Clicks : std::uint8_t { no_click = 0, click_a = 1, click_b = 2, click_both = 3 };

struct GateRecord {
  std::uint64_t gate_index = 0;
  bool click_a = false;
  bool click_b = false;
};

/// Aggregated counts of one delay setting.
struct ScanPoint {
  double delay_ps = 0.0;
  std::uint64_t gates = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
};

struct CarResult {
  double delay_ps = 0.0;
  std::uint64_t gates = 0;
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  std::uint64_t matched_coincidences = 0;
  /// Coincidences of A at gate g with B at gate g + k, for k = 1..K.
  std::vector<std::uint64_t> unmatched_coincidences;
  double unmatched_mean = 0.0;
  double car = 0.0;
  double p_estimate = 0.0;
};

}  // namespace hom
