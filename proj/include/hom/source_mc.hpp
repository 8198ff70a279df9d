#pragma once

// Pulse-by-pulse Monte Carlo of the full experiment and the three
// measurements run on it: dip scan, CAR, and visibility against pair number.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hom/fitter.hpp"
#include "hom/gate_model.hpp"
#include "hom/kernels.hpp"
#include "hom/records.hpp"

namespace hom {

struct Execution {
  int threads = 0;  // <= 0: OpenMP default
  kernels::Sampler sampler = kernels::Sampler::sparse;
};

/// `steps` evenly spaced delays from `min_ps` to `max_ps` inclusive.
std::vector<double> linear_delays(double min_ps, double max_ps, int steps);

/// Counts per delay. Point j draws from the child streams (seed, j, batch),
/// so results do not depend on the thread count.
std::vector<ScanPoint> run_dip_scan(const ExperimentConfig& config, std::span<const double> delays,
                                    std::uint64_t gates_per_point, std::uint64_t seed,
                                    const Execution& exec = {});

/// Smallest |delay| for which the two photons overlap by less than
/// `max_indistinguishability`.
double off_dip_delay(double sigma_ps, double max_indistinguishability = 1e-6);

/// Matched vs unmatched-gate coincidences with the delay far off the dip.
/// Throws InvalidParameter if the configured delay is still on the dip and
/// StatisticsError if no unmatched coincidence was seen.
CarResult run_car(const ExperimentConfig& config, std::uint64_t gates, int n_offset_slots,
                  std::uint64_t seed, const Execution& exec = {});

/// p for which car_prediction_hom reproduces `car`. CAR(p) rises and then
/// falls when dark counts are present; the root whose predicted singles rates
/// are closest to the measured ones is returned.
double estimate_p_from_car(double car, double singles_a_rate, double singles_b_rate,
                           const ExperimentConfig& config);

struct SweepRow {
  double p = 0.0;
  double v_predicted = 0.0;  // noise budget at this p
  std::vector<ScanPoint> points;
  std::optional<FitResult> fit;
  std::string error;  // set when the fit failed; the sweep carries on
};

std::vector<SweepRow> run_visibility_sweep(const ExperimentConfig& base,
                                           std::span<const double> p_values,
                                           std::span<const double> delays,
                                           std::uint64_t gates_per_point, std::uint64_t seed,
                                           const Execution& exec = {});

}  // namespace hom
