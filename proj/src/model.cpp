#include "hom/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hom {

namespace {

double fwhm_factor() { return 2.0 * std::sqrt(2.0 * std::numbers::ln2); }

bool is_probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

BeamSplitter BeamSplitter::normalized() const {
  const double s = survival();
  if (!(s > 0.0)) throw InvalidParameter("beam splitter transmits nothing (T+R=0)");
  return {transmittance / s, reflectance / s};
}

long TimingConfig::gate_divider() const {
  if (!(pulse_rate_hz > 0.0) || !(gate_rate_hz > 0.0))
    throw InvalidParameter("pulse and gate rates must be positive");
  const double ratio = pulse_rate_hz / gate_rate_hz;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
    throw InvalidParameter("pulse_rate / gate_rate must be a positive integer");
  return static_cast<long>(rounded);
}

double db_to_linear(double value_db) { return std::pow(10.0, value_db / 10.0); }

double linear_to_db(double ratio) {
  if (!(ratio >= 0.0)) throw InvalidParameter("power ratio must be non-negative");
  return 10.0 * std::log10(ratio);
}

double fwhm_to_sigma(double fwhm_ps) {
  if (!(fwhm_ps > 0.0) || !std::isfinite(fwhm_ps))
    throw InvalidParameter("FWHM must be positive");
  return fwhm_ps / fwhm_factor();
}

double sigma_to_fwhm(double sigma_ps) {
  if (!(sigma_ps > 0.0)) throw InvalidParameter("sigma must be positive");
  return sigma_ps * fwhm_factor();
}

double dark_prob_from_rate(double rate_hz, double window_s) {
  if (!(rate_hz >= 0.0) || !(window_s >= 0.0))
    throw InvalidParameter("dark rate and window must be non-negative");
  return rate_hz * window_s;
}

std::string ValidationResult::describe() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < violations.size(); ++k) {
    if (k) os << "; ";
    os << violations[k].field << ": " << violations[k].message;
  }
  return os.str();
}

ValidationResult validate(const ExperimentConfig& c) {
  ValidationResult r;
  auto fail = [&r](std::string field, std::string msg) {
    r.violations.push_back({std::move(field), std::move(msg)});
  };

  const double p = c.source.mean_pairs_per_pulse;
  if (!std::isfinite(p) || p < 0.0) fail("source.mean_pairs_per_pulse", "p<0");
  if (!(c.source.extinction_ratio >= 1.0)) fail("source.extinction_ratio", "xi<1");
  if (c.source.max_pairs < 2) fail("source.max_pairs", "N_max<2");

  if (!(c.wavepacket.sigma_ps > 0.0) || !std::isfinite(c.wavepacket.sigma_ps))
    fail("wavepacket.sigma_ps", "sigma<=0");

  if (!is_probability(c.channel_s.transmittance))
    fail("channel_s.transmittance", "eta outside [0,1]");
  if (!is_probability(c.channel_i.transmittance))
    fail("channel_i.transmittance", "eta outside [0,1]");

  const double t = c.splitter.transmittance;
  const double rr = c.splitter.reflectance;
  if (!(t >= 0.0)) fail("splitter.transmittance", "T<0");
  if (!(rr >= 0.0)) fail("splitter.reflectance", "R<0");
  if (t + rr > 1.0 + 1e-12) fail("splitter", "T+R>1");
  if (t >= 0.0 && rr >= 0.0 && t + rr == 0.0) fail("splitter", "T+R=0");

  for (const auto* d : {&c.detector_a, &c.detector_b}) {
    const std::string name = d == &c.detector_a ? "detector_a" : "detector_b";
    const double v = d->dark_prob_per_gate;
    if (!std::isfinite(v) || v < 0.0 || v >= 1.0)
      fail(name + ".dark_prob_per_gate", "dark probability outside [0,1)");
  }

  try {
    (void)c.timing.gate_divider();
  } catch (const InvalidParameter& e) {
    fail("timing", e.what());
  }

  if (!std::isfinite(c.delay_ps)) fail("delay_ps", "delay not finite");
  return r;
}

ConfigError::ConfigError(ValidationResult result)
    : InvalidParameter("invalid configuration: " + result.describe()),
      result_(std::move(result)) {}

const ExperimentConfig& require_valid(const ExperimentConfig& config) {
  auto r = validate(config);
  if (!r.ok()) throw ConfigError(std::move(r));
  return config;
}

ExperimentConfig apparatus_config() {
  ExperimentConfig c;
  c.source.mean_pairs_per_pulse = 0.03;
  c.source.extinction_ratio = db_to_linear(30.0);
  c.source.max_pairs = 3;
  c.wavepacket.sigma_ps = fwhm_to_sigma(4.0);
  c.channel_s = {0.1, ChannelLabel::signal};
  c.channel_i = {0.1, ChannelLabel::idler};
  c.splitter = {db_to_linear(-3.3), db_to_linear(-3.6)};
  c.timing = {100e6, 5e6};
  c.detector_a = {dark_prob_from_rate(544.0, 1.0 / c.timing.gate_rate_hz), DetectorLabel::a};
  c.detector_b = {dark_prob_from_rate(1596.0, 1.0 / c.timing.gate_rate_hz), DetectorLabel::b};
  c.delay_ps = 0.0;
  return c;
}

}  // namespace hom
