#include "hom/config_io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "hom/analytics.hpp"

namespace hom {

namespace {

constexpr std::array kKnownKeys{
    "pairs_per_pulse", "extinction_ratio_db", "sigma_ps",      "fwhm_ps",
    "eta_signal",      "eta_idler",           "splitter_t_db", "splitter_r_db",
    "dark_prob_a",     "dark_prob_b",         "pulse_rate_hz", "gate_rate_hz",
    "delay_ps",        "max_pairs",           "multi_pair_model"};

}  // namespace

ExperimentConfig default_config() { return calibrate_config(apparatus_config(), 0.80); }

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["pairs_per_pulse"] = c.source.mean_pairs_per_pulse;
  if (std::isinf(c.source.extinction_ratio))
    j["extinction_ratio_db"] = "inf";
  else
    j["extinction_ratio_db"] = linear_to_db(c.source.extinction_ratio);
  j["sigma_ps"] = c.wavepacket.sigma_ps;
  j["eta_signal"] = c.channel_s.transmittance;
  j["eta_idler"] = c.channel_i.transmittance;
  j["splitter_t_db"] = linear_to_db(c.splitter.transmittance);
  j["splitter_r_db"] = linear_to_db(c.splitter.reflectance);
  j["dark_prob_a"] = c.detector_a.dark_prob_per_gate;
  j["dark_prob_b"] = c.detector_b.dark_prob_per_gate;
  j["pulse_rate_hz"] = c.timing.pulse_rate_hz;
  j["gate_rate_hz"] = c.timing.gate_rate_hz;
  j["delay_ps"] = c.delay_ps;
  j["max_pairs"] = c.source.max_pairs;
  j["multi_pair_model"] = c.multi_pair == MultiPairModel::coherent ? "coherent" : "independent";
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& defaults) {
  ValidationResult problems;
  auto bad = [&problems](const std::string& key, const std::string& msg) {
    problems.violations.push_back({key, msg});
  };
  if (!j.is_object()) {
    bad("<root>", "configuration must be a JSON object");
    throw ConfigError(problems);
  }

  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      bad(key, "unknown key");
  }
  if (j.contains("sigma_ps") && j.contains("fwhm_ps"))
    bad("sigma_ps/fwhm_ps", "give exactly one of sigma_ps and fwhm_ps");

  ExperimentConfig c = defaults;
  auto number = [&](const char* key, auto&& assign) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      bad(key, "expected a finite number");
      return;
    }
    try {
      assign(v.get<double>());
    } catch (const InvalidParameter& e) {
      bad(key, e.what());
    }
  };

  number("pairs_per_pulse", [&](double v) { c.source.mean_pairs_per_pulse = v; });
  if (j.contains("extinction_ratio_db") && j.at("extinction_ratio_db") == "inf")
    c.source.extinction_ratio = std::numeric_limits<double>::infinity();
  else
    number("extinction_ratio_db", [&](double v) { c.source.extinction_ratio = db_to_linear(v); });
  number("sigma_ps", [&](double v) { c.wavepacket.sigma_ps = v; });
  number("fwhm_ps", [&](double v) { c.wavepacket.sigma_ps = fwhm_to_sigma(v); });
  number("eta_signal", [&](double v) { c.channel_s.transmittance = v; });
  number("eta_idler", [&](double v) { c.channel_i.transmittance = v; });
  number("splitter_t_db", [&](double v) { c.splitter.transmittance = db_to_linear(v); });
  number("splitter_r_db", [&](double v) { c.splitter.reflectance = db_to_linear(v); });
  number("dark_prob_a", [&](double v) { c.detector_a.dark_prob_per_gate = v; });
  number("dark_prob_b", [&](double v) { c.detector_b.dark_prob_per_gate = v; });
  number("pulse_rate_hz", [&](double v) { c.timing.pulse_rate_hz = v; });
  number("gate_rate_hz", [&](double v) { c.timing.gate_rate_hz = v; });
  number("delay_ps", [&](double v) { c.delay_ps = v; });

  if (j.contains("max_pairs")) {
    const auto& v = j.at("max_pairs");
    if (v.is_number_integer())
      c.source.max_pairs = v.get<int>();
    else
      bad("max_pairs", "expected an integer");
  }
  if (j.contains("multi_pair_model")) {
    const auto& v = j.at("multi_pair_model");
    if (v == "independent")
      c.multi_pair = MultiPairModel::independent;
    else if (v == "coherent")
      c.multi_pair = MultiPairModel::coherent;
    else
      bad("multi_pair_model", "expected \"independent\" or \"coherent\"");
  }

  if (!problems.ok()) throw ConfigError(problems);
  return require_valid(c);
}

ExperimentConfig apply_override(const ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    ValidationResult r;
    r.violations.push_back({std::string(assignment), "override must look like key=value"});
    throw ConfigError(r);
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;  // bare strings such as coherent

  nlohmann::json patch = nlohmann::json::object();
  patch[key] = value;
  if (key == "fwhm_ps" || key == "sigma_ps") {
    // the override replaces whichever width the base config carried
    ExperimentConfig c = config;
    return config_from_json(patch, c);
  }
  return config_from_json(patch, config);
}

ExperimentConfig load_config(const std::filesystem::path& path, const ExperimentConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    ValidationResult r;
    r.violations.push_back({path.string(), "not valid JSON"});
    throw ConfigError(r);
  }
  return config_from_json(j, defaults);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << config_to_json(config).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace hom
