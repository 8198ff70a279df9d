#include "hom/analytics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hom {

namespace {

double ratio_term(double eta, double xi) { return std::isinf(xi) ? 0.0 : eta / xi; }

// Exact per-gate click statistics for a Poisson number of mutually
// independent pairs. g_a, g_b: probability that one pair leaves detector A
// (resp. B) dark; g_0: probability that it leaves both dark.
CarPrediction from_pair_probabilities(double p, double g_a, double g_b, double g_0,
                                      double dark_a, double dark_b) {
  const double la = std::log1p(-dark_a);
  const double lb = std::log1p(-dark_b);
  const double xa = p * (1.0 - g_a);
  const double xb = p * (1.0 - g_b);
  const double x0 = p * (1.0 - g_0);

  CarPrediction out;
  out.singles_a = -std::expm1(la - xa);
  out.singles_b = -std::expm1(lb - xb);
  out.accidental = out.singles_a * out.singles_b;
  // P(!A !B) - P(!A) P(!B), written to avoid cancellation.
  const double joint_dark = std::exp(la + lb - x0);
  const double excess = -joint_dark * std::expm1(-p * (1.0 - g_a - g_b + g_0));
  out.matched = out.accidental + excess;
  return out;
}

}  // namespace

double indistinguishability(double delta_ps, double sigma_ps) {
  if (!(sigma_ps > 0.0)) throw InvalidParameter("sigma must be positive");
  return std::exp(-delta_ps * delta_ps / (2.0 * sigma_ps * sigma_ps));
}

double overlap_amplitude(double delta_ps, double sigma_ps) {
  if (!(sigma_ps > 0.0)) throw InvalidParameter("sigma must be positive");
  return std::exp(-delta_ps * delta_ps / (4.0 * sigma_ps * sigma_ps));
}

double splitter_contrast(const BeamSplitter& s) {
  const double t = s.transmittance;
  const double r = s.reflectance;
  const double den = r * r + t * t;
  if (!(den > 0.0)) throw InvalidParameter("R^2+T^2 must be positive");
  return 2.0 * r * t / den;
}

double dip_model(double delta_ps, const DipModelParams& m) {
  const double k = splitter_contrast(m.splitter);
  return m.baseline * (1.0 - k * m.visibility *
                                 indistinguishability(delta_ps - m.center_ps, m.sigma_ps));
}

std::array<double, 4> dip_model_gradient(double delta_ps, const DipModelParams& m) {
  const double k = splitter_contrast(m.splitter);
  const double d = delta_ps - m.center_ps;
  const double s2 = m.sigma_ps * m.sigma_ps;
  const double g = indistinguishability(d, m.sigma_ps);
  const double depth = m.baseline * k * m.visibility * g;
  return {
      1.0 - k * m.visibility * g,
      -m.baseline * k * g,
      -depth * d * d / (s2 * m.sigma_ps),
      -depth * d / s2,
  };
}

double visibility_prediction(const VisibilityBudget& b) {
  const double leak = ratio_term(b.eta, b.xi);
  const double num = 2.0 * b.p * b.eta + 4.0 * b.dark_dt + leak;
  const double den = b.eta + 3.0 * b.p * b.eta + 4.0 * b.dark_dt + leak;
  if (!(den > 0.0)) throw InvalidParameter("visibility budget has zero denominator");
  return 1.0 - num / den;
}

VisibilityBudget budget_from_config(const ExperimentConfig& c) {
  VisibilityBudget b;
  b.p = c.source.mean_pairs_per_pulse;
  b.eta = 0.5 * (c.channel_s.transmittance + c.channel_i.transmittance) * c.splitter.survival();
  b.dark_dt = 0.5 * (c.detector_a.dark_prob_per_gate + c.detector_b.dark_prob_per_gate);
  b.xi = c.source.extinction_ratio;
  return b;
}

InfeasibleTarget::InfeasibleTarget(double target, double v_min, double v_max)
    : InvalidParameter([&] {
        std::ostringstream os;
        os << "target visibility " << target << " not reachable; achievable range ("
           << v_min << ", " << v_max << "]";
        return os.str();
      }()),
      v_min_(v_min),
      v_max_(v_max) {}

double calibrate_eta(double target_v, double p, double dark_dt, double xi) {
  auto v_of = [&](double eta) { return visibility_prediction({p, eta, dark_dt, xi}); };

  const double v_top = v_of(1.0);
  if (dark_dt <= 0.0) {
    // eta cancels: the budget is flat.
    if (std::abs(v_top - target_v) <= 1e-10) return 1.0;
    throw InfeasibleTarget(target_v, v_top, v_top);
  }
  const double v_floor = 0.0;  // eta -> 0 leaves only dark counts
  if (!(target_v > v_floor) || target_v > v_top) throw InfeasibleTarget(target_v, v_floor, v_top);

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = v_of(mid);
    if (std::abs(v - target_v) <= 1e-13 || hi - lo <= 1e-300) return mid;
    (v < target_v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ExperimentConfig calibrate_config(const ExperimentConfig& base, double target_v) {
  const VisibilityBudget b = budget_from_config(base);
  const double end_to_end = calibrate_eta(target_v, b.p, b.dark_dt, b.xi);
  const double arm = end_to_end / base.splitter.survival();
  if (arm > 1.0) throw InfeasibleTarget(target_v, 0.0, visibility_prediction({b.p, base.splitter.survival(), b.dark_dt, b.xi}));
  ExperimentConfig out = base;
  out.channel_s.transmittance = arm;
  out.channel_i.transmittance = arm;
  return out;
}

std::optional<double> CarPrediction::car() const {
  if (no_accidentals()) return std::nullopt;
  return matched / accidental;
}

CarPrediction car_prediction(double p, double eta_s, double eta_i, double dark_a, double dark_b) {
  if (!(p >= 0.0)) throw InvalidParameter("p must be non-negative");
  for (double v : {eta_s, eta_i})
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter("eta outside [0,1]");
  for (double v : {dark_a, dark_b})
    if (!(v >= 0.0 && v < 1.0)) throw InvalidParameter("dark probability outside [0,1)");
  return from_pair_probabilities(p, 1.0 - eta_s, 1.0 - eta_i, (1.0 - eta_s) * (1.0 - eta_i),
                                 dark_a, dark_b);
}

CarPrediction car_prediction_hom(double p, const ExperimentConfig& c) {
  if (!(p >= 0.0)) throw InvalidParameter("p must be non-negative");
  const BeamSplitter bs = c.splitter.normalized();
  const double leak = 1.0 / c.source.extinction_ratio;
  const double u_s = c.channel_s.transmittance * c.splitter.survival();
  const double u_i = c.channel_i.transmittance * c.splitter.survival();
  // Off the dip every photon is routed independently.
  const double to_a_s = (1.0 - leak) * bs.transmittance + leak * bs.reflectance;
  const double to_a_i = (1.0 - leak) * bs.reflectance + leak * bs.transmittance;
  const double g_a = (1.0 - u_s * to_a_s) * (1.0 - u_i * to_a_i);
  const double g_b = (1.0 - u_s * (1.0 - to_a_s)) * (1.0 - u_i * (1.0 - to_a_i));
  const double g_0 = (1.0 - u_s) * (1.0 - u_i);
  return from_pair_probabilities(p, g_a, g_b, g_0, c.detector_a.dark_prob_per_gate,
                                 c.detector_b.dark_prob_per_gate);
}

double visibility_from_counts(double n_dip, double n_baseline, const BeamSplitter& splitter) {
  if (!(n_baseline > 0.0)) throw InvalidParameter("baseline counts must be positive");
  return (1.0 - n_dip / n_baseline) / splitter_contrast(splitter);
}

}  // namespace hom
