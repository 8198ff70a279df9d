#include "hom/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace hom::kernels {

namespace {

// Live pairs in an active gate: Poisson(mean) conditioned on >= 1, capped.
int truncated_live_pairs(double mean, double p_any, int cap, Rng& rng) {
  double target = rng.uniform() * p_any;
  double term = std::exp(-mean) * mean;
  int k = 1;
  while (k < cap) {
    if (target < term) return k;
    target -= term;
    ++k;
    term *= mean / k;
  }
  return cap;
}

std::uint8_t live_pair_clicks(const GateModel& model, int pairs, Rng& rng) {
  std::uint8_t clicks = no_click;
  if (model.multi_pair() == MultiPairModel::independent) {
    for (int k = 0; k < pairs; ++k) clicks |= GateModel::sample(model.live_pattern(), rng);
    return clicks;
  }
  PortCount pulse;
  const auto& ports = model.live_ports();
  for (int k = 0; k < pairs; ++k) {
    double u = rng.uniform();
    std::size_t j = 0;
    while (j + 1 < ports.size() && u >= ports[j].second) u -= ports[j++].second;
    pulse.signal_port += ports[j].first.signal_port;
    pulse.idler_port += ports[j].first.idler_port;
  }
  return GateModel::sample(model.port_table(pulse), rng);
}

PointCounts sparse_batch(const GateModel& model, std::uint64_t first, std::uint64_t n, Rng& rng,
                         std::vector<ClickEvent>* events) {
  // Pairs that lose both photons leave no trace, so only live pairs are drawn
  // (Poisson thinning), and gates with neither a live pair nor a dark click
  // are skipped geometrically.
  const double mean_live = model.pairs_per_pulse() * model.live_probability();
  const double da = model.dark_a();
  const double db = model.dark_b();
  const double p_live = -std::expm1(-mean_live);
  const double p_active = -std::expm1(-mean_live + std::log1p(-da) + std::log1p(-db));
  const double quiet = std::exp(-mean_live);
  const double w_a = quiet * da * (1.0 - db);
  const double w_b = quiet * (1.0 - da) * db;

  PointCounts counts;
  counts.gates = n;
  if (!(p_active > 0.0)) return counts;

  std::uint64_t offset = 0;
  while (true) {
    const std::uint64_t skip = rng.geometric(p_active);
    if (skip >= n - offset) break;
    offset += skip;

    std::uint8_t clicks = no_click;
    double u = rng.uniform() * p_active;
    if (u < p_live) {
      clicks = live_pair_clicks(model, truncated_live_pairs(mean_live, p_live, model.max_pairs(), rng), rng);
      if (rng.bernoulli(da)) clicks |= click_a;
      if (rng.bernoulli(db)) clicks |= click_b;
    } else {
      u -= p_live;
      clicks = u < w_a ? click_a : (u < w_a + w_b ? click_b : click_both);
    }
    if (clicks != no_click) {
      counts.add(clicks);
      if (events) events->push_back({first + offset, clicks});
    }
    if (++offset >= n) break;
  }
  return counts;
}

PointCounts per_gate_batch(const GateModel& model, std::uint64_t first, std::uint64_t n, Rng& rng,
                           std::vector<ClickEvent>* events) {
  PointCounts counts;
  counts.gates = n;
  for (std::uint64_t g = first; g < first + n; ++g) {
    const GateRecord rec = simulate_gate(model, rng, g);
    const std::uint8_t clicks = (rec.click_a ? click_a : 0) | (rec.click_b ? click_b : 0);
    if (clicks == no_click) continue;
    counts.add(clicks);
    if (events) events->push_back({g, clicks});
  }
  return counts;
}

std::uint64_t batch_size(std::uint64_t gates, std::uint64_t batch) {
  return std::min(kBatchGates, gates - batch * kBatchGates);
}

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

}  // namespace

PointCounts& PointCounts::operator+=(const PointCounts& o) {
  gates += o.gates;
  singles_a += o.singles_a;
  singles_b += o.singles_b;
  coincidences += o.coincidences;
  return *this;
}

PointCounts run_batch(const GateModel& model, Sampler sampler, std::uint64_t first_gate,
                      std::uint64_t n_gates, Rng& rng, std::vector<ClickEvent>* events) {
  return sampler == Sampler::sparse ? sparse_batch(model, first_gate, n_gates, rng, events)
                                    : per_gate_batch(model, first_gate, n_gates, rng, events);
}

std::uint64_t batch_count(std::uint64_t gates) { return (gates + kBatchGates - 1) / kBatchGates; }

std::vector<PointCounts> count_serial(std::span<const GateModel> models,
                                      std::uint64_t gates_per_point, std::uint64_t seed,
                                      Sampler sampler) {
  std::vector<PointCounts> out(models.size());
  const std::uint64_t batches = batch_count(gates_per_point);
  for (std::size_t j = 0; j < models.size(); ++j)
    for (std::uint64_t b = 0; b < batches; ++b) {
      Rng rng(seed, {j, b});
      out[j] += run_batch(models[j], sampler, b * kBatchGates, batch_size(gates_per_point, b), rng);
    }
  return out;
}

std::vector<PointCounts> count_parallel(std::span<const GateModel> models,
                                        std::uint64_t gates_per_point, std::uint64_t seed,
                                        int threads, Sampler sampler) {
  const std::uint64_t batches = batch_count(gates_per_point);
  const auto tasks = static_cast<std::int64_t>(models.size() * batches);
  std::vector<PointCounts> partial(static_cast<std::size_t>(tasks));

#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
  for (std::int64_t t = 0; t < tasks; ++t) {
    const std::uint64_t j = static_cast<std::uint64_t>(t) / batches;
    const std::uint64_t b = static_cast<std::uint64_t>(t) % batches;
    Rng rng(seed, {j, b});
    partial[t] = run_batch(models[j], sampler, b * kBatchGates, batch_size(gates_per_point, b), rng);
  }

  std::vector<PointCounts> out(models.size());
  for (std::int64_t t = 0; t < tasks; ++t) out[static_cast<std::uint64_t>(t) / batches] += partial[t];
  return out;
}

EventStream events_serial(const GateModel& model, std::uint64_t gates, std::uint64_t seed,
                          Sampler sampler) {
  EventStream s;
  const std::uint64_t batches = batch_count(gates);
  for (std::uint64_t b = 0; b < batches; ++b) {
    Rng rng(seed, {0, b});
    s.counts += run_batch(model, sampler, b * kBatchGates, batch_size(gates, b), rng, &s.events);
  }
  return s;
}

EventStream events_parallel(const GateModel& model, std::uint64_t gates, std::uint64_t seed,
                            int threads, Sampler sampler) {
  const auto batches = static_cast<std::int64_t>(batch_count(gates));
  std::vector<PointCounts> counts(batches);
  std::vector<std::vector<ClickEvent>> events(batches);

#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
  for (std::int64_t b = 0; b < batches; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    Rng rng(seed, {0, ub});
    counts[b] = run_batch(model, sampler, ub * kBatchGates, batch_size(gates, ub), rng, &events[b]);
  }

  EventStream s;
  std::size_t total = 0;
  for (const auto& e : events) total += e.size();
  s.events.reserve(total);
  for (std::int64_t b = 0; b < batches; ++b) {
    s.counts += counts[b];
    s.events.insert(s.events.end(), events[b].begin(), events[b].end());
  }
  return s;
}

std::vector<std::uint64_t> offset_coincidences(std::span<const ClickEvent> events, int max_offset) {
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(std::max(max_offset, 0)), 0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!(events[i].clicks & click_a)) continue;
    const std::uint64_t g = events[i].gate;
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      const std::uint64_t d = events[j].gate - g;
      if (d > static_cast<std::uint64_t>(max_offset)) break;
      if (events[j].clicks & click_b) ++hits[d - 1];
    }
  }
  return hits;
}

}  // namespace hom::kernels
