#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "hom/analytics.hpp"
#include "hom/records.hpp"

namespace hom {

using ModelFn = std::function<double(double x, const Eigen::VectorXd& theta)>;
using GradientFn =
    std::function<void(double x, const Eigen::VectorXd& theta, Eigen::Ref<Eigen::VectorXd> grad)>;
using ProjectFn = std::function<void(Eigen::VectorXd& theta)>;

/// Weighted least squares: minimize sum_k w_k (y_k - model(x_k, theta))^2.
struct LmProblem {
  ModelFn model;
  GradientFn gradient;  // empty -> central finite differences
  ProjectFn project;    // optional box/feasibility projection
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> weights;
};

struct LmControls {
  int max_iterations = 200;
  double initial_damping = 1e-3;  // 0 gives plain Gauss-Newton steps
  double cost_tolerance = 1e-10;  // relative cost decrease
  double step_tolerance = 1e-12;  // step norm relative to |theta|
};

enum class LmStatus { converged, max_iterations, non_finite, singular };

struct LmResult {
  Eigen::VectorXd theta;
  Eigen::MatrixXd covariance;  // (J^T W J)^-1 at theta
  double cost = 0.0;
  int iterations = 0;
  LmStatus status = LmStatus::max_iterations;
  std::string message;

  bool converged() const { return status == LmStatus::converged; }
};

LmResult levenberg_marquardt(const LmProblem& problem, Eigen::VectorXd theta0,
                             const LmControls& controls = {});

/// Central differences with step h = rel_step * max(|theta_i|, 1).
Eigen::VectorXd finite_difference_gradient(const ModelFn& model, double x,
                                           const Eigen::VectorXd& theta, double rel_step = 1e-6);

struct FitOptions {
  bool fit_center = false;
  LmControls controls;
};

struct FitResult {
  DipModelParams params;
  /// 1-sigma errors of C, V, sigma (and center when fitted).
  std::vector<double> std_errors;
  Eigen::MatrixXd covariance;
  double chi_squared = 0.0;
  int dof = 0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  std::string message;

  double visibility_error() const { return std_errors.at(1); }
  double sigma_error() const { return std_errors.at(2); }
};

/// Starting point read off the data: C0 = max, V0 from the deepest point,
/// sigma0 = half-width of the region below the half-depth level.
DipModelParams initial_guess(std::span<const double> delays, std::span<const double> counts,
                             const BeamSplitter& splitter);

/// Poisson-weighted fit of the dip curve with T and R held fixed. Without
/// `init` the start comes from initial_guess, with sigma0 capped at a third of
/// the scan reach. An explicit `init` whose 2 sigma covers every point is
/// rejected, since the baseline would then be unconstrained.
FitResult fit_dip(std::span<const double> delays, std::span<const double> counts,
                  const BeamSplitter& splitter, std::optional<DipModelParams> init = std::nullopt,
                  const FitOptions& options = {});

FitResult fit_dip(std::span<const ScanPoint> points, const BeamSplitter& splitter,
                  std::optional<DipModelParams> init = std::nullopt, const FitOptions& options = {});

}  // namespace hom
