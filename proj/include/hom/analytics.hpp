#pragma once

// Closed-form side of the model: Gaussian overlap, the dip curve, the
// visibility noise budget and a coincidence-to-accidental predictor.

#include <array>
#include <optional>

#include "hom/model.hpp"

namespace hom {

/// I(dt) = exp(-dt^2 / (2 sigma^2)), the squared temporal-mode overlap.
double indistinguishability(double delta_ps, double sigma_ps);

/// kappa = sqrt(I), the field-amplitude overlap.
double overlap_amplitude(double delta_ps, double sigma_ps);

/// 2RT / (R^2 + T^2); equals one for a balanced coupler.
double splitter_contrast(const BeamSplitter& splitter);

struct DipModelParams {
  double baseline = 1.0;    // C, counts far from the dip
  double visibility = 1.0;  // V
  double sigma_ps = 1.7;
  BeamSplitter splitter;    // held fixed
  double center_ps = 0.0;   // dip position on the scan axis
};

/// N(dt) = C * (1 - 2VRT/(R^2+T^2) * exp(-(dt-c)^2 / (2 sigma^2))).
double dip_model(double delta_ps, const DipModelParams& params);

/// Partial derivatives of dip_model with respect to (C, V, sigma, center).
std::array<double, 4> dip_model_gradient(double delta_ps, const DipModelParams& params);

/// Inputs of the visibility noise budget. `dark_dt` is the dark-click
/// probability per coincidence window; `xi` may be +infinity.
struct VisibilityBudget {
  double p = 0.0;
  double eta = 0.0;
  double dark_dt = 0.0;
  double xi = 1000.0;
};

/// V = 1 - (2 p eta + 4 Dt + eta/xi) / (eta + 3 p eta + 4 Dt + eta/xi).
double visibility_prediction(const VisibilityBudget& budget);

/// Single-eta, single-D reduction of a two-arm, two-detector configuration:
/// eta = mean arm transmittance times splitter survival (T+R), Dt = mean dark
/// probability.
VisibilityBudget budget_from_config(const ExperimentConfig& config);

class InfeasibleTarget : public InvalidParameter {
 public:
  InfeasibleTarget(double target, double v_min, double v_max);
  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }

 private:
  double v_min_;
  double v_max_;
};

/// End-to-end eta in (0, 1] for which visibility_prediction hits `target_v`,
/// found by bisection. Throws InfeasibleTarget when out of reach.
double calibrate_eta(double target_v, double p, double dark_dt, double xi);

/// Copy of `base` with both arm transmittances set so that the budget of the
/// result predicts `target_v`.
ExperimentConfig calibrate_config(const ExperimentConfig& base, double target_v);

/// Per-gate click probabilities of a pair source seen by two threshold
/// detectors.
struct CarPrediction {
  double singles_a = 0.0;
  double singles_b = 0.0;
  double matched = 0.0;     // P(A and B in the same gate)
  double accidental = 0.0;  // P(A) P(B), i.e. A and B in unrelated gates

  double true_coincidence() const { return matched - accidental; }
  bool no_accidentals() const { return accidental <= 0.0; }
  /// matched / accidental; empty when there are no accidentals.
  std::optional<double> car() const;
};

/// Signal arm on detector A, idler arm on detector B, Poisson pair number.
CarPrediction car_prediction(double p, double eta_s, double eta_i, double dark_a,
                             double dark_b);

/// Same measurement behind the beam splitter with the delay far off the dip,
/// including demultiplexer leakage and splitter loss. Uses `p` in place of the
/// configured pair number.
CarPrediction car_prediction_hom(double p, const ExperimentConfig& config);

/// (1 - n_dip/n_baseline) (R^2+T^2)/(2RT).
double visibility_from_counts(double n_dip, double n_baseline, const BeamSplitter& splitter);

}  // namespace hom
