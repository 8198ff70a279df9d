#pragma once

// Flat JSON experiment configuration:
//
//   pairs_per_pulse, extinction_ratio_db, sigma_ps | fwhm_ps (not both),
//   eta_signal, eta_idler, splitter_t_db, splitter_r_db, dark_prob_a,
//   dark_prob_b, pulse_rate_hz, gate_rate_hz, delay_ps
//
// plus the optional extensions max_pairs and multi_pair_model
// ("independent" | "coherent"). extinction_ratio_db also accepts the string
// "inf" for perfect demultiplexing. Missing keys keep their defaults; unknown keys
// are rejected.

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "hom/model.hpp"

namespace hom {

/// Apparatus values with both arm transmittances calibrated so that the
/// noise budget predicts V = 0.80.
ExperimentConfig default_config();

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

/// Applies the keys present in `j` on top of `defaults`. Throws ConfigError
/// listing every bad key; the result is validated.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& defaults);

/// Single `key=value` override, value parsed as JSON.
ExperimentConfig apply_override(const ExperimentConfig& config, std::string_view assignment);

ExperimentConfig load_config(const std::filesystem::path& path, const ExperimentConfig& defaults);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

}  // namespace hom
