#include "hom/fock.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hom::fock {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

void check_capacity(int photons, int capacity) {
  if (photons > capacity)
    throw CapacityError(std::to_string(photons) + " photons exceed oracle capacity " +
                        std::to_string(capacity));
}

int photon_number(const FockState& s) {
  int n = -1;
  for (const auto& [occ, amp] : s.terms) {
    if (n >= 0 && occ.total() != n)
      throw InvalidParameter("input superposition mixes photon numbers");
    n = occ.total();
  }
  return n < 0 ? 0 : n;
}

template <typename F>
void for_each_occupation(int photons, F&& f) {
  FockOccupation occ;
  for (int a = 0; a <= photons; ++a)
    for (int b = 0; a + b <= photons; ++b)
      for (int c = 0; a + b + c <= photons; ++c) {
        occ.n = {a, b, c, photons - a - b - c};
        f(occ);
      }
}

// Mode index of every photon, in mode order.
std::vector<int> expand(const FockOccupation& occ) {
  std::vector<int> idx;
  for (int m = 0; m < kModes; ++m)
    for (int k = 0; k < occ.n[m]; ++k) idx.push_back(m);
  return idx;
}

double occupation_factorials(const FockOccupation& occ) {
  double f = 1.0;
  for (int v : occ.n) f *= factorial(v);
  return f;
}

OutcomeDistribution to_distribution(const std::map<FockOccupation, Amplitude>& amps) {
  OutcomeDistribution d;
  for (const auto& [occ, a] : amps) {
    const double p = std::norm(a);
    if (p > 0.0) d.probabilities[occ] = p;
  }
  return d;
}

}  // namespace

double FockState::norm_squared() const {
  double s = 0.0;
  for (const auto& [occ, a] : terms) s += std::norm(a);
  return s;
}

double OutcomeDistribution::total() const {
  double s = 0.0;
  for (const auto& [occ, p] : probabilities) s += p;
  return s;
}

double OutcomeDistribution::probability(const FockOccupation& occ) const {
  auto it = probabilities.find(occ);
  return it == probabilities.end() ? 0.0 : it->second;
}

double ModeUnitary::unitarity_residual() const {
  return (matrix * matrix.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
}

FockState temporal_decompose(double kappa, int n_signal, int n_idler, int capacity) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidParameter("overlap kappa outside [0,1]");
  if (n_signal < 0 || n_idler < 0) throw InvalidParameter("negative photon number");
  check_capacity(n_signal + n_idler, capacity);

  const double ortho = std::sqrt(std::max(0.0, 1.0 - kappa * kappa));
  FockState s;
  for (int k = 0; k <= n_idler; ++k) {
    const double amp = std::sqrt(binomial(n_idler, k)) * std::pow(kappa, k) *
                       std::pow(ortho, n_idler - k);
    if (amp == 0.0) continue;
    FockOccupation occ;
    occ.n = {n_signal, 0, k, n_idler - k};
    s.terms[occ] = amp;
  }
  return s;
}

ModeUnitary splitter_unitary(double t_eff, double r_eff) {
  if (!(t_eff >= 0.0) || !(r_eff >= 0.0) || std::abs(t_eff + r_eff - 1.0) > 1e-12)
    throw InvalidParameter("lossless splitter needs T + R = 1");
  const std::complex<double> t(std::sqrt(t_eff), 0.0);
  const std::complex<double> r(0.0, std::sqrt(r_eff));
  ModeUnitary u;
  u.matrix.setZero();
  for (int tm = 0; tm < 2; ++tm) {
    // input signal port -> A (transmitted), B (reflected)
    u.matrix(0 * 2 + tm, 0 * 2 + tm) = t;
    u.matrix(1 * 2 + tm, 0 * 2 + tm) = r;
    // input idler port -> A (reflected), B (transmitted)
    u.matrix(0 * 2 + tm, 1 * 2 + tm) = r;
    u.matrix(1 * 2 + tm, 1 * 2 + tm) = t;
  }
  return u;
}

// Ryser's formula with Gray-code row-sum updates.
std::complex<double> permanent(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw InvalidParameter("permanent needs a square matrix");
  if (n == 0) return 1.0;

  std::vector<std::complex<double>> row_sums(n, 0.0);
  std::complex<double> total = 0.0;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < (std::uint64_t{1} << n); ++k) {
    const std::uint64_t next = k ^ (k >> 1);
    const int col = std::countr_zero(next ^ gray);
    const double sign = (next >> col) & 1 ? 1.0 : -1.0;
    for (int r = 0; r < n; ++r) row_sums[r] += sign * m(r, col);
    gray = next;

    std::complex<double> prod = 1.0;
    for (int r = 0; r < n; ++r) prod *= row_sums[r];
    const int bits = std::popcount(gray);
    total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
  }
  return total;
}

OutcomeDistribution evolve_fock(const FockState& input, const ModeUnitary& u, int capacity) {
  const int photons = photon_number(input);
  check_capacity(photons, capacity);

  std::map<FockOccupation, Amplitude> out;
  for_each_occupation(photons, [&](const FockOccupation& m_occ) {
    const auto rows = expand(m_occ);
    Amplitude amp = 0.0;
    for (const auto& [n_occ, in_amp] : input.terms) {
      const auto cols = expand(n_occ);
      Eigen::MatrixXcd sub(photons, photons);
      for (int r = 0; r < photons; ++r)
        for (int c = 0; c < photons; ++c) sub(r, c) = u.matrix(rows[r], cols[c]);
      amp += in_amp * permanent(sub) /
             std::sqrt(occupation_factorials(n_occ) * occupation_factorials(m_occ));
    }
    out[m_occ] = amp;
  });
  return to_distribution(out);
}

OutcomeDistribution evolve_fock_ladder(const FockState& input, const ModeUnitary& u,
                                       int capacity) {
  const int photons = photon_number(input);
  check_capacity(photons, capacity);

  // Polynomial in output creation operators: exponent vector -> coefficient.
  std::map<FockOccupation, Amplitude> total;
  for (const auto& [n_occ, in_amp] : input.terms) {
    std::map<FockOccupation, Amplitude> poly{{FockOccupation{}, 1.0}};
    for (int j : expand(n_occ)) {
      std::map<FockOccupation, Amplitude> next;
      for (const auto& [mono, coeff] : poly)
        for (int k = 0; k < kModes; ++k) {
          if (u.matrix(k, j) == 0.0) continue;
          FockOccupation m = mono;
          ++m.n[k];
          next[m] += coeff * u.matrix(k, j);
        }
      poly = std::move(next);
    }
    const double in_norm = std::sqrt(occupation_factorials(n_occ));
    for (const auto& [mono, coeff] : poly)
      total[mono] += in_amp * coeff * std::sqrt(occupation_factorials(mono)) / in_norm;
  }
  return to_distribution(total);
}

ClickProbabilities threshold_clicks(const OutcomeDistribution& dist) {
  ClickProbabilities c;
  for (const auto& [occ, p] : dist.probabilities) {
    const bool a = occ.port_a() > 0;
    const bool b = occ.port_b() > 0;
    if (a && b)
      c.both += p;
    else if (a)
      c.a_only += p;
    else if (b)
      c.b_only += p;
    else
      c.none += p;
  }
  return c;
}

ClickProbabilities port_clicks(int n_signal_port, int n_idler_port, double kappa,
                               const BeamSplitter& lossless, int capacity) {
  const auto u = splitter_unitary(lossless.transmittance, lossless.reflectance);
  return threshold_clicks(evolve_fock(temporal_decompose(kappa, n_signal_port, n_idler_port, capacity),
                                      u, capacity));
}

double coincidence_prob(int n_s, int n_i, double kappa, double t, double r, int capacity) {
  check_capacity(n_s + n_i, capacity);
  const BeamSplitter lossy{t, r};
  const double keep = lossy.survival();
  if (!(t >= 0.0 && r >= 0.0 && keep <= 1.0 + 1e-12 && keep > 0.0))
    throw InvalidParameter("splitter needs T, R >= 0 and 0 < T + R <= 1");
  const BeamSplitter eff = lossy.normalized();

  auto bin = [keep](int n, int k) {
    return binomial(n, k) * std::pow(keep, k) * std::pow(1.0 - keep, n - k);
  };
  double p = 0.0;
  for (int ks = 0; ks <= n_s; ++ks)
    for (int ki = 0; ki <= n_i; ++ki) {
      const double w = bin(n_s, ks) * bin(n_i, ki);
      if (w == 0.0 || ks + ki < 2) continue;
      p += w * port_clicks(ks, ki, kappa, eff, capacity).both;
    }
  return p;
}

}  // namespace hom::fock
