#pragma once

// Shared domain types for the HOM experiment simulator.
//
// Units: time in picoseconds, rates in Hz, every loss or ratio as a linear
// power fraction unless a name says "db".

#include <stdexcept>
#include <string>
#include <vector>

namespace hom {

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Photon budget of the few-photon oracle exceeded.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Not enough events to form an estimate.
class StatisticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceParams {
  double mean_pairs_per_pulse = 0.03;
  double extinction_ratio = 1000.0;  // linear, >= 1
  int max_pairs = 3;
};

struct WavepacketShape {
  double sigma_ps = 1.7;  // 1/e half-width of the field amplitude
};

enum class ChannelLabel { signal, idler };

/// End-to-end per-photon detection probability of one arm (coupling, filters
/// and detector quantum efficiency lumped together).
struct OpticalChannel {
  double transmittance = 0.1;
  ChannelLabel label = ChannelLabel::signal;
};

/// Lossy two-port coupler. Power fractions; T + R may be below one.
struct BeamSplitter {
  double transmittance = 0.5;
  double reflectance = 0.5;

  double survival() const { return transmittance + reflectance; }
  double excess_loss() const { return 1.0 - survival(); }
  /// Lossless splitter left after the excess loss is commuted in front of it.
  BeamSplitter normalized() const;
};

enum class DetectorLabel { a, b };

struct DetectorParams {
  double dark_prob_per_gate = 0.0;
  DetectorLabel label = DetectorLabel::a;
};

struct TimingConfig {
  double pulse_rate_hz = 100e6;
  double gate_rate_hz = 5e6;

  /// Pulses per gate; throws InvalidParameter unless the ratio is a positive integer.
  long gate_divider() const;
};

/// How several pairs emitted in one pulse relate to each other.
enum class MultiPairModel {
  independent,  // each pair in its own temporal mode (multimode pump pulse)
  coherent,     // all pairs share the matched/orthogonal mode pair
};

struct ExperimentConfig {
  SourceParams source;
  WavepacketShape wavepacket;
  OpticalChannel channel_s{0.1, ChannelLabel::signal};
  OpticalChannel channel_i{0.1, ChannelLabel::idler};
  BeamSplitter splitter;
  DetectorParams detector_a{0.0, DetectorLabel::a};
  DetectorParams detector_b{0.0, DetectorLabel::b};
  TimingConfig timing;
  double delay_ps = 0.0;  // applied to the signal arm
  MultiPairModel multi_pair = MultiPairModel::independent;
};

double db_to_linear(double value_db);
double linear_to_db(double ratio);

/// Intensity FWHM -> 1/e field half-width.
double fwhm_to_sigma(double fwhm_ps);
double sigma_to_fwhm(double sigma_ps);

/// D*t for a detector with dark rate `rate_hz` and an acceptance window of
/// `window_s` seconds.
double dark_prob_from_rate(double rate_hz, double window_s);

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

/// Collects every violated invariant, not just the first.
ValidationResult validate(const ExperimentConfig& config);

class ConfigError : public InvalidParameter {
 public:
  explicit ConfigError(ValidationResult result);
  const ValidationResult& result() const { return result_; }

 private:
  ValidationResult result_;
};

/// Returns `config` unchanged or throws ConfigError listing all violations.
const ExperimentConfig& require_valid(const ExperimentConfig& config);

/// Values stated for the apparatus: p = 0.03, xi = 30 dB, T/R = -3.3/-3.6 dB,
/// 4 ps FWHM, 10% QE as arm transmittance, 544/1596 Hz dark counts at 5 MHz
/// gating. Arm transmittance is not calibrated here.
ExperimentConfig apparatus_config();

}  // namespace hom
