#pragma once

// Exact few-photon linear optics over four modes: two spatial ports times two
// temporal modes (matched to the reference photon, and orthogonal to it).
//
// Mode index = 2 * port + temporal. On the input side port 0 is the signal
// fibre and port 1 the idler fibre; on the output side port 0 is detector A
// and port 1 detector B.

#include <array>
#include <complex>
#include <compare>
#include <map>

#include <Eigen/Dense>

#include "hom/model.hpp"

namespace hom::fock {

inline constexpr int kModes = 4;
inline constexpr int kDefaultCapacity = 4;

enum Mode : int {
  signal_matched = 0,
  signal_orthogonal = 1,
  idler_matched = 2,
  idler_orthogonal = 3,
};

using Amplitude = std::complex<double>;

struct FockOccupation {
  std::array<int, kModes> n{};

  int total() const { return n[0] + n[1] + n[2] + n[3]; }
  int port_a() const { return n[0] + n[1]; }
  int port_b() const { return n[2] + n[3]; }
  auto operator<=>(const FockOccupation&) const = default;
};

/// Superposition of occupation-number states.
struct FockState {
  std::map<FockOccupation, Amplitude> terms;

  double norm_squared() const;
};

struct OutcomeDistribution {
  std::map<FockOccupation, double> probabilities;

  double total() const;
  double probability(const FockOccupation& occ) const;
};

/// Linear map on creation operators: a_j^dagger -> sum_k U(k, j) b_k^dagger.
struct ModeUnitary {
  Eigen::Matrix4cd matrix;

  /// max |U U^dagger - I|
  double unitarity_residual() const;
};

/// Signal photons in the matched mode; each idler photon in
/// kappa |matched> + sqrt(1 - kappa^2) |orthogonal>.
FockState temporal_decompose(double kappa, int n_signal, int n_idler,
                             int capacity = kDefaultCapacity);

/// Symmetric coupler [[sqrt T, i sqrt R], [i sqrt R, sqrt T]] on the ports,
/// identity on the temporal label. Requires T + R = 1.
ModeUnitary splitter_unitary(double t_eff, double r_eff);

std::complex<double> permanent(const Eigen::MatrixXcd& m);

/// Output distribution via permanents of U sub-matrices.
OutcomeDistribution evolve_fock(const FockState& input, const ModeUnitary& u,
                                int capacity = kDefaultCapacity);

/// Same result by expanding the product of transformed creation operators.
OutcomeDistribution evolve_fock_ladder(const FockState& input, const ModeUnitary& u,
                                       int capacity = kDefaultCapacity);

/// Threshold-detector view of an outcome distribution.
struct ClickProbabilities {
  double none = 0.0;
  double a_only = 0.0;
  double b_only = 0.0;
  double both = 0.0;
};

ClickProbabilities threshold_clicks(const OutcomeDistribution& dist);

/// Clicks for `n_signal_port` photons entering the signal port and
/// `n_idler_port` entering the idler port of a lossless coupler.
ClickProbabilities port_clicks(int n_signal_port, int n_idler_port, double kappa,
                               const BeamSplitter& lossless, int capacity = kDefaultCapacity);

/// P(>=1 photon at A and >=1 at B). Splitter excess loss 1 - T - R is applied
/// as per-photon survival in front of the normalized coupler.
double coincidence_prob(int n_s, int n_i, double kappa, double t, double r,
                        int capacity = kDefaultCapacity);

}  // namespace hom::fock
