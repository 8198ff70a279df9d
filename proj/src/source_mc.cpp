#include "hom/source_mc.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hom/analytics.hpp"

namespace hom {

std::vector<double> linear_delays(double min_ps, double max_ps, int steps) {
  if (steps < 1) throw InvalidParameter("need at least one delay step");
  if (steps == 1) return {min_ps};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    out[k] = min_ps + (max_ps - min_ps) * static_cast<double>(k) / (steps - 1);
  return out;
}

std::vector<ScanPoint> run_dip_scan(const ExperimentConfig& config, std::span<const double> delays,
                                    std::uint64_t gates_per_point, std::uint64_t seed,
                                    const Execution& exec) {
  if (delays.empty()) throw InvalidParameter("delay list is empty");
  if (gates_per_point < 1) throw InvalidParameter("gates_per_point must be >= 1");

  std::vector<GateModel> models;
  models.reserve(delays.size());
  for (double d : delays) {
    ExperimentConfig c = config;
    c.delay_ps = d;
    models.emplace_back(c);
  }
  const auto counts = kernels::count_parallel(models, gates_per_point, seed, exec.threads, exec.sampler);

  std::vector<ScanPoint> out(delays.size());
  for (std::size_t j = 0; j < delays.size(); ++j)
    out[j] = {delays[j], counts[j].gates, counts[j].coincidences, counts[j].singles_a,
              counts[j].singles_b};
  return out;
}

double off_dip_delay(double sigma_ps, double max_indistinguishability) {
  if (!(sigma_ps > 0.0)) throw InvalidParameter("sigma must be positive");
  // exp(-d^2 / (2 sigma^2)) < I_max
  return sigma_ps * std::sqrt(-2.0 * std::log(max_indistinguishability)) * (1.0 + 1e-9);
}

CarResult run_car(const ExperimentConfig& config, std::uint64_t gates, int n_offset_slots,
                  std::uint64_t seed, const Execution& exec) {
  require_valid(config);
  if (n_offset_slots < 1) throw InvalidParameter("need at least one unmatched slot");
  if (indistinguishability(config.delay_ps, config.wavepacket.sigma_ps) >= 1e-6)
    throw InvalidParameter("CAR needs the delay off the dip (indistinguishability < 1e-6)");

  const GateModel model(config);
  const auto stream = kernels::events_parallel(model, gates, seed, exec.threads, exec.sampler);

  CarResult r;
  r.delay_ps = config.delay_ps;
  r.gates = stream.counts.gates;
  r.singles_a = stream.counts.singles_a;
  r.singles_b = stream.counts.singles_b;
  r.matched_coincidences = stream.counts.coincidences;
  r.unmatched_coincidences = kernels::offset_coincidences(stream.events, n_offset_slots);
  const auto unmatched_total = std::accumulate(r.unmatched_coincidences.begin(),
                                               r.unmatched_coincidences.end(), std::uint64_t{0});
  if (unmatched_total == 0) {
    std::ostringstream os;
    os << "insufficient statistics: no unmatched coincidences in " << gates << " gates";
    if (r.singles_a > 0 && r.singles_b > 0) {
      const double ra = static_cast<double>(r.singles_a) / r.gates;
      const double rb = static_cast<double>(r.singles_b) / r.gates;
      const double needed = 100.0 / (n_offset_slots * ra * rb);
      os << "; about " << static_cast<std::uint64_t>(std::ceil(needed))
         << " gates are needed for 100 accidentals";
    } else {
      os << "; a detector never clicked";
    }
    throw StatisticsError(os.str());
  }
  r.unmatched_mean = static_cast<double>(unmatched_total) / n_offset_slots;
  r.car = static_cast<double>(r.matched_coincidences) / r.unmatched_mean;
  r.p_estimate = estimate_p_from_car(r.car, static_cast<double>(r.singles_a) / r.gates,
                                     static_cast<double>(r.singles_b) / r.gates, config);
  return r;
}

double estimate_p_from_car(double car, double singles_a_rate, double singles_b_rate,
                           const ExperimentConfig& config) {
  auto car_at = [&](double p) {
    const auto pred = car_prediction_hom(p, config).car();
    return pred ? *pred : std::numeric_limits<double>::infinity();
  };
  auto mismatch = [&](double p) {
    const auto pred = car_prediction_hom(p, config);
    auto rel = [](double model, double seen) {
      const double scale = std::max(seen, 1e-300);
      return (model - seen) / scale;
    };
    const double ea = rel(pred.singles_a, singles_a_rate);
    const double eb = rel(pred.singles_b, singles_b_rate);
    return ea * ea + eb * eb;
  };

  constexpr int kGrid = 600;
  const double log_lo = std::log(1e-9);
  const double log_hi = std::log(5.0);
  auto p_of = [&](int k) { return std::exp(log_lo + (log_hi - log_lo) * k / kGrid); };

  std::vector<double> roots;
  double best_p = p_of(0);
  double best_gap = std::abs(car_at(best_p) - car);
  double prev_p = best_p;
  double prev_f = car_at(prev_p) - car;
  for (int k = 1; k <= kGrid; ++k) {
    const double p = p_of(k);
    const double f = car_at(p) - car;
    if (std::abs(f) < best_gap) {
      best_gap = std::abs(f);
      best_p = p;
    }
    if (f == 0.0) {
      roots.push_back(p);
    } else if ((prev_f < 0.0) != (f < 0.0)) {
      double lo = std::log(prev_p);
      double hi = std::log(p);
      const bool rising = prev_f < 0.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = car_at(std::exp(mid)) - car;
        ((fm < 0.0) == rising ? lo : hi) = mid;
      }
      roots.push_back(std::exp(0.5 * (lo + hi)));
    }
    prev_p = p;
    prev_f = f;
  }
  if (roots.empty()) return best_p;

  double chosen = roots.front();
  double chosen_mismatch = mismatch(chosen);
  for (double p : roots) {
    const double mm = mismatch(p);
    if (mm < chosen_mismatch) {
      chosen = p;
      chosen_mismatch = mm;
    }
  }
  return chosen;
}

std::vector<SweepRow> run_visibility_sweep(const ExperimentConfig& base,
                                           std::span<const double> p_values,
                                           std::span<const double> delays,
                                           std::uint64_t gates_per_point, std::uint64_t seed,
                                           const Execution& exec) {
  if (p_values.empty()) throw InvalidParameter("p list is empty");
  std::vector<SweepRow> rows;
  rows.reserve(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    ExperimentConfig c = base;
    c.source.mean_pairs_per_pulse = p_values[i];
    require_valid(c);

    SweepRow row;
    row.p = p_values[i];
    row.v_predicted = visibility_prediction(budget_from_config(c));
    const std::uint64_t row_seed = Rng(seed, {0x5eedu, i}).next();
    row.points = run_dip_scan(c, delays, gates_per_point, row_seed, exec);
    try {
      row.fit = fit_dip(row.points, c.splitter);
      if (!row.fit->converged) row.error = "fit did not converge: " + row.fit->message;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hom
