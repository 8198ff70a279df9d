#include "hom/gate_model.hpp"

#include "hom/analytics.hpp"
#include "hom/fock.hpp"

namespace hom {

GateModel::GateModel(const ExperimentConfig& config) : config_(require_valid(config)) {
  kappa_ = overlap_amplitude(config_.delay_ps, config_.wavepacket.sigma_ps);
  leak_ = 1.0 / config_.source.extinction_ratio;
  survive_s_ = config_.channel_s.transmittance * config_.splitter.survival();
  survive_i_ = config_.channel_i.transmittance * config_.splitter.survival();

  const int n = max_photons();
  const BeamSplitter lossless = config_.splitter.normalized();
  tables_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), PatternTable{1.0, 0.0, 0.0, 0.0});
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b) {
      if (a + b == 0) continue;
      const auto c = fock::port_clicks(a, b, kappa_, lossless, n);
      tables_[a * (n + 1) + b] = {c.none, c.a_only, c.b_only, c.both};
    }

  // One pair: each photon leaks to the other port with probability 1/xi,
  // then survives with its arm transmittance times the splitter survival.
  std::array<std::array<double, 3>, 3> joint{};
  for (int ls = 0; ls < 2; ++ls)
    for (int li = 0; li < 2; ++li) {
      const double p_leak = (ls ? leak_ : 1.0 - leak_) * (li ? leak_ : 1.0 - leak_);
      for (int ss = 0; ss < 2; ++ss)
        for (int si = 0; si < 2; ++si) {
          const double w = p_leak * (ss ? survive_s_ : 1.0 - survive_s_) *
                           (si ? survive_i_ : 1.0 - survive_i_);
          int in_s = 0;
          int in_i = 0;
          if (ss) (ls ? in_i : in_s) += 1;
          if (si) (li ? in_s : in_i) += 1;
          joint[in_s][in_i] += w;
        }
    }
  live_ = 1.0 - joint[0][0];
  live_pattern_ = {0.0, 0.0, 0.0, 0.0};
  if (live_ > 0.0) {
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; a + b <= 2; ++b) {
        if (a + b == 0 || joint[a][b] == 0.0) continue;
        const double w = joint[a][b] / live_;
        live_ports_.push_back({{a, b}, w});
        const auto& t = port_table({a, b});
        for (int k = 0; k < 4; ++k) live_pattern_[k] += w * t[k];
      }
  }
}

int GateModel::max_photons() const {
  return config_.multi_pair == MultiPairModel::coherent ? 2 * config_.source.max_pairs : 2;
}

const PatternTable& GateModel::port_table(PortCount ports) const {
  const int n = max_photons();
  if (ports.signal_port < 0 || ports.idler_port < 0 || ports.signal_port + ports.idler_port > n)
    throw CapacityError("port occupation outside the precomputed click tables");
  return tables_[ports.signal_port * (n + 1) + ports.idler_port];
}

std::uint8_t GateModel::sample(const PatternTable& table, Rng& rng) {
  double u = rng.uniform();
  for (std::uint8_t k = 0; k < 3; ++k) {
    if (u < table[k]) return k;
    u -= table[k];
  }
  return click_both;
}

int sample_pair_count(double p, int max_pairs, Rng& rng) { return rng.poisson(p, max_pairs); }

GateRecord simulate_gate(const GateModel& model, Rng& rng, std::uint64_t gate_index) {
  const int pairs = sample_pair_count(model.pairs_per_pulse(), model.max_pairs(), rng);
  const bool coherent = model.multi_pair() == MultiPairModel::coherent;

  std::uint8_t clicks = no_click;
  PortCount pulse;
  for (int k = 0; k < pairs; ++k) {
    PortCount pair;
    const bool leak_s = rng.bernoulli(model.leak());
    if (rng.bernoulli(model.survival_signal())) ++(leak_s ? pair.idler_port : pair.signal_port);
    const bool leak_i = rng.bernoulli(model.leak());
    if (rng.bernoulli(model.survival_idler())) ++(leak_i ? pair.signal_port : pair.idler_port);

    if (coherent) {
      pulse.signal_port += pair.signal_port;
      pulse.idler_port += pair.idler_port;
    } else if (pair.signal_port + pair.idler_port > 0) {
      clicks |= GateModel::sample(model.port_table(pair), rng);
    }
  }
  if (coherent && pulse.signal_port + pulse.idler_port > 0)
    clicks |= GateModel::sample(model.port_table(pulse), rng);

  if (rng.bernoulli(model.dark_a())) clicks |= click_a;
  if (rng.bernoulli(model.dark_b())) clicks |= click_b;
  return {gate_index, (clicks & click_a) != 0, (clicks & click_b) != 0};
}

GateRecord simulate_gate(const ExperimentConfig& config, Rng& rng) {
  return simulate_gate(GateModel(config), rng, 0);
}

}  // namespace hom
