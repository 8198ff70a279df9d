#pragma once

// Gate-batch kernels. Work is cut into fixed batches of kBatchGates gates;
// batch b of scan point j always draws from Rng(seed, {j, b}). The serial
// drivers are the reference: the OpenMP drivers must reproduce them exactly
// for any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "hom/gate_model.hpp"

namespace hom::kernels {

inline constexpr std::uint64_t kBatchGates = std::uint64_t{1} << 24;

enum class Sampler {
  sparse,    // jump between gates that carry a live pair or a dark click
  per_gate,  // simulate_gate on every gate
};

struct PointCounts {
  std::uint64_t gates = 0;
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  std::uint64_t coincidences = 0;

  void add(std::uint8_t clicks) {
    singles_a += clicks & click_a ? 1 : 0;
    singles_b += clicks & click_b ? 1 : 0;
    coincidences += clicks == click_both ? 1 : 0;
  }
  PointCounts& operator+=(const PointCounts& o);
  bool operator==(const PointCounts&) const = default;
};

struct ClickEvent {
  std::uint64_t gate = 0;
  std::uint8_t clicks = no_click;
  bool operator==(const ClickEvent&) const = default;
};

/// Simulates gates [first_gate, first_gate + n_gates). Gates with at least
/// one click are appended to `events` when it is non-null.
PointCounts run_batch(const GateModel& model, Sampler sampler, std::uint64_t first_gate,
                      std::uint64_t n_gates, Rng& rng, std::vector<ClickEvent>* events = nullptr);

std::uint64_t batch_count(std::uint64_t gates);

std::vector<PointCounts> count_serial(std::span<const GateModel> models,
                                      std::uint64_t gates_per_point, std::uint64_t seed,
                                      Sampler sampler = Sampler::sparse);

/// `threads` <= 0 means the OpenMP default.
std::vector<PointCounts> count_parallel(std::span<const GateModel> models,
                                        std::uint64_t gates_per_point, std::uint64_t seed,
                                        int threads, Sampler sampler = Sampler::sparse);

/// Click events of one long run, in gate order, plus its totals.
struct EventStream {
  PointCounts counts;
  std::vector<ClickEvent> events;
};

EventStream events_serial(const GateModel& model, std::uint64_t gates, std::uint64_t seed,
                          Sampler sampler = Sampler::sparse);
EventStream events_parallel(const GateModel& model, std::uint64_t gates, std::uint64_t seed,
                            int threads, Sampler sampler = Sampler::sparse);

/// Coincidences between A at gate g and B at gate g + k for k = 1..max_offset.
/// `events` must be sorted by gate.
std::vector<std::uint64_t> offset_coincidences(std::span<const ClickEvent> events,
                                               int max_offset);

}  // namespace hom::kernels
