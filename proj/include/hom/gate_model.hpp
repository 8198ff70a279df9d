#pragma once

#include <array>
#include <vector>

#include "hom/model.hpp"
#include "hom/records.hpp"
#include "hom/rng.hpp"

namespace hom {

/// Probabilities of the four click patterns, indexed by Clicks.
using PatternTable = std::array<double, 4>;

/// Photons of one pair (or one pulse) per input port after leakage and loss.
struct PortCount {
  int signal_port = 0;
  int idler_port = 0;
};

/// Everything a gate sampler needs for one configuration at one delay,
/// precomputed once. Immutable after construction, so it can be shared by
/// worker threads.
class GateModel {
 public:
  explicit GateModel(const ExperimentConfig& config);

  const ExperimentConfig& config() const { return config_; }
  double kappa() const { return kappa_; }
  double pairs_per_pulse() const { return config_.source.mean_pairs_per_pulse; }
  int max_pairs() const { return config_.source.max_pairs; }
  double leak() const { return leak_; }
  double survival_signal() const { return survive_s_; }
  double survival_idler() const { return survive_i_; }
  double dark_a() const { return config_.detector_a.dark_prob_per_gate; }
  double dark_b() const { return config_.detector_b.dark_prob_per_gate; }
  MultiPairModel multi_pair() const { return config_.multi_pair; }

  /// Photon-caused click pattern for a given port occupation.
  const PatternTable& port_table(PortCount ports) const;

  /// Probability that a pair leaves at least one photon at the splitter.
  double live_probability() const { return live_; }
  /// Port occupation of a pair, conditioned on it being live.
  const std::vector<std::pair<PortCount, double>>& live_ports() const { return live_ports_; }
  /// Click pattern of a live pair on its own (independent-pairs model).
  const PatternTable& live_pattern() const { return live_pattern_; }

  static std::uint8_t sample(const PatternTable& table, Rng& rng);

 private:
  int max_photons() const;

  ExperimentConfig config_;
  double kappa_ = 0.0;
  double leak_ = 0.0;
  double survive_s_ = 0.0;
  double survive_i_ = 0.0;
  double live_ = 0.0;
  std::vector<PatternTable> tables_;  // indexed [signal_port][idler_port]
  std::vector<std::pair<PortCount, double>> live_ports_;
  PatternTable live_pattern_{};
};

/// Pairs emitted in one pulse: Poisson(p), with the mass above `max_pairs`
/// folded onto `max_pairs`.
int sample_pair_count(double p, int max_pairs, Rng& rng);

/// Reference gate simulation, photon by photon: pair number, leakage, loss,
/// oracle click pattern per pair (or per pulse in the coherent model), then
/// dark clicks OR-ed in.
GateRecord simulate_gate(const GateModel& model, Rng& rng, std::uint64_t gate_index = 0);
GateRecord simulate_gate(const ExperimentConfig& config, Rng& rng);

}  // namespace hom
