#include "hom/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hom {

namespace {

constexpr double kVisibilityCeiling = 1.02;
constexpr double kMinLogSigma = -9.2;  // ~1e-4 ps
constexpr double kMaxLogSigma = 9.2;

double weighted_cost(const LmProblem& p, const Eigen::VectorXd& theta, Eigen::VectorXd& resid) {
  double cost = 0.0;
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    const double f = p.model(p.x[k], theta);
    if (!std::isfinite(f)) return std::numeric_limits<double>::quiet_NaN();
    resid[k] = p.y[k] - f;
    cost += p.weights[k] * resid[k] * resid[k];
  }
  return cost;
}

void jacobian(const LmProblem& p, const Eigen::VectorXd& theta, Eigen::MatrixXd& jac) {
  Eigen::VectorXd row(theta.size());
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    if (p.gradient)
      p.gradient(p.x[k], theta, row);
    else
      row = finite_difference_gradient(p.model, p.x[k], theta);
    jac.row(static_cast<Eigen::Index>(k)) = row.transpose();
  }
}

bool is_singular(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return !(ev.minCoeff() > 1e-14 * std::max(ev.maxCoeff(), 0.0));
}

}  // namespace

Eigen::VectorXd finite_difference_gradient(const ModelFn& model, double x,
                                           const Eigen::VectorXd& theta, double rel_step) {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = rel_step * std::max(std::abs(theta[i]), 1.0);
    probe[i] = theta[i] + h;
    const double up = model(x, probe);
    probe[i] = theta[i] - h;
    const double down = model(x, probe);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

LmResult levenberg_marquardt(const LmProblem& problem, Eigen::VectorXd theta,
                             const LmControls& controls) {
  const auto n = static_cast<Eigen::Index>(problem.x.size());
  const Eigen::Index m = theta.size();
  if (problem.y.size() != problem.x.size() || problem.weights.size() != problem.x.size())
    throw InvalidParameter("x, y and weights must have equal length");
  if (n < m) throw InvalidParameter("fewer data points than parameters");
  for (double w : problem.weights)
    if (!(w > 0.0)) throw InvalidParameter("weights must be positive");

  if (problem.project) problem.project(theta);
  const Eigen::Map<const Eigen::VectorXd> w(problem.weights.data(), n);

  LmResult out;
  Eigen::VectorXd resid(n), trial_resid(n);
  Eigen::MatrixXd jac(n, m);
  double cost = weighted_cost(problem, theta, resid);
  double damping = controls.initial_damping;

  auto finish = [&](LmStatus status, std::string msg) {
    out.theta = theta;
    out.cost = cost;
    out.status = status;
    out.message = std::move(msg);
    return out;
  };

  if (!std::isfinite(cost)) return finish(LmStatus::non_finite, "model is not finite at the start point");

  LmStatus status = LmStatus::max_iterations;
  for (int it = 1; it <= controls.max_iterations; ++it) {
    out.iterations = it;
    if (cost == 0.0) {
      status = LmStatus::converged;
      break;
    }
    jacobian(problem, theta, jac);
    if (!jac.allFinite()) return finish(LmStatus::non_finite, "non-finite Jacobian");
    const Eigen::MatrixXd normal = jac.transpose() * w.asDiagonal() * jac;
    const Eigen::VectorXd grad = jac.transpose() * (w.array() * resid.array()).matrix();
    const double diag_floor = 1e-12 * std::max(normal.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_cost = cost;
    for (int attempt = 0; attempt < 64; ++attempt) {
      Eigen::MatrixXd lhs = normal;
      for (Eigen::Index i = 0; i < m; ++i)
        lhs(i, i) += damping * std::max(normal(i, i), diag_floor);
      const Eigen::VectorXd step = lhs.ldlt().solve(grad);
      if (step.allFinite()) {
        trial = theta + step;
        if (problem.project) problem.project(trial);
        trial_cost = weighted_cost(problem, trial, trial_resid);
        if (!std::isfinite(trial_cost))
          return finish(LmStatus::non_finite, "model produced a non-finite value during the search");
        if (trial_cost < cost) {
          accepted = true;
          break;
        }
      }
      damping = damping == 0.0 ? 1e-3 : damping * 10.0;
      if (damping > 1e20) break;
    }
    if (!accepted) {
      // No descent direction left: at a minimum to working precision.
      status = LmStatus::converged;
      break;
    }

    const double step_norm = (trial - theta).norm();
    const double rel_decrease = (cost - trial_cost) / cost;
    theta = trial;
    resid = trial_resid;
    cost = trial_cost;
    damping /= 10.0;
    if (rel_decrease < controls.cost_tolerance ||
        step_norm <= controls.step_tolerance * (theta.norm() + controls.step_tolerance)) {
      status = LmStatus::converged;
      break;
    }
  }

  jacobian(problem, theta, jac);
  const Eigen::MatrixXd a = jac.transpose() * w.asDiagonal() * jac;
  if (is_singular(a)) {
    if (status == LmStatus::converged)
      return finish(LmStatus::singular, "normal matrix is singular at the optimum");
    return finish(status, "iteration limit reached");
  }
  out.covariance = a.inverse();
  return finish(status, status == LmStatus::converged ? "converged" : "iteration limit reached");
}

DipModelParams initial_guess(std::span<const double> delays, std::span<const double> counts,
                             const BeamSplitter& splitter) {
  if (delays.empty() || delays.size() != counts.size())
    throw InvalidParameter("delays and counts must be non-empty and of equal length");
  const auto [lo_it, hi_it] = std::minmax_element(counts.begin(), counts.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  DipModelParams p;
  p.splitter = splitter;
  p.baseline = hi;
  p.visibility = hi > 0.0 ? std::clamp((1.0 - lo / hi) / splitter_contrast(splitter), 0.0, 1.0) : 0.0;

  const auto [dmin_it, dmax_it] = std::minmax_element(delays.begin(), delays.end());
  const double range = *dmax_it - *dmin_it;
  const double level = 0.5 * (hi + lo);
  double below_min = std::numeric_limits<double>::infinity();
  double below_max = -below_min;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] < level) {
      below_min = std::min(below_min, delays[k]);
      below_max = std::max(below_max, delays[k]);
    }
  double half_width = below_max >= below_min ? 0.5 * (below_max - below_min) : 0.25 * range;
  if (!(half_width > 0.0)) {
    std::vector<double> sorted(delays.begin(), delays.end());
    std::sort(sorted.begin(), sorted.end());
    double spacing = range > 0.0 ? range : 1.0;
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (sorted[k] > sorted[k - 1]) spacing = std::min(spacing, sorted[k] - sorted[k - 1]);
    half_width = 0.5 * spacing;
  }
  p.sigma_ps = half_width;
  return p;
}

FitResult fit_dip(std::span<const double> delays, std::span<const double> counts,
                  const BeamSplitter& splitter, std::optional<DipModelParams> init,
                  const FitOptions& options) {
  const std::size_t n_params = options.fit_center ? 4 : 3;
  if (delays.size() != counts.size()) throw InvalidParameter("delays and counts differ in length");
  if (delays.size() < n_params + 1)
    throw InvalidParameter("dip fit needs at least " + std::to_string(n_params + 1) + " points");
  for (double c : counts)
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParameter("counts must be finite and non-negative");

  DipModelParams start = init ? *init : initial_guess(delays, counts, splitter);
  start.splitter = splitter;
  if (!(start.sigma_ps > 0.0)) throw InvalidParameter("initial sigma must be positive");
  double reach = 0.0;
  for (double d : delays) reach = std::max(reach, std::abs(d - start.center_ps));
  if (!init) {
    // a noisy half-depth estimate can be wider than the scan itself
    start.sigma_ps = std::min(start.sigma_ps, reach / 3.0);
    if (!(start.sigma_ps > 0.0)) throw InvalidParameter("scan has no extent around the dip");
  } else if (!(reach > 2.0 * start.sigma_ps)) {
    throw InvalidParameter("no point lies beyond 2 sigma of the dip; baseline is unconstrained");
  }

  auto unpack = [&](const Eigen::VectorXd& t) {
    DipModelParams p = start;
    p.baseline = t[0];
    p.visibility = t[1];
    p.sigma_ps = std::exp(t[2]);
    p.center_ps = options.fit_center ? t[3] : start.center_ps;
    return p;
  };

  std::vector<double> weights(counts.size());
  std::transform(counts.begin(), counts.end(), weights.begin(),
                 [](double c) { return 1.0 / std::max(c, 1.0); });

  LmProblem problem;
  problem.x = delays;
  problem.y = counts;
  problem.weights = weights;
  problem.model = [&](double x, const Eigen::VectorXd& t) { return dip_model(x, unpack(t)); };
  problem.gradient = [&](double x, const Eigen::VectorXd& t, Eigen::Ref<Eigen::VectorXd> g) {
    const auto p = unpack(t);
    const auto d = dip_model_gradient(x, p);
    g[0] = d[0];
    g[1] = d[1];
    g[2] = d[2] * p.sigma_ps;  // log-sigma chain rule
    if (options.fit_center) g[3] = d[3];
  };
  problem.project = [&](Eigen::VectorXd& t) {
    t[1] = std::clamp(t[1], 0.0, kVisibilityCeiling);
    t[2] = std::clamp(t[2], kMinLogSigma, kMaxLogSigma);
  };

  Eigen::VectorXd theta0(static_cast<Eigen::Index>(n_params));
  theta0[0] = start.baseline;
  theta0[1] = start.visibility;
  theta0[2] = std::log(start.sigma_ps);
  if (options.fit_center) theta0[3] = start.center_ps;

  const LmResult lm = levenberg_marquardt(problem, theta0, options.controls);

  FitResult fit;
  fit.params = unpack(lm.theta);
  fit.iterations = lm.iterations;
  fit.converged = lm.converged();
  fit.degenerate = lm.status == LmStatus::singular;
  fit.message = lm.message;
  fit.dof = static_cast<int>(counts.size() - n_params);

  // Covariance in natural parameters (C, V, sigma[, center]).
  const auto m = static_cast<Eigen::Index>(n_params);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double r = counts[k] - dip_model(delays[k], fit.params);
    fit.chi_squared += weights[k] * r * r;
    const auto d = dip_model_gradient(delays[k], fit.params);
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(d.data(), m);
    normal += weights[k] * g * g.transpose();
  }
  if (is_singular(normal)) {
    fit.degenerate = true;
    fit.converged = false;
    fit.covariance = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  } else {
    fit.covariance = normal.inverse();
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());
  }
  fit.std_errors.resize(n_params);
  for (Eigen::Index i = 0; i < m; ++i) fit.std_errors[i] = std::sqrt(std::max(fit.covariance(i, i), 0.0));
  return fit;
}

FitResult fit_dip(std::span<const ScanPoint> points, const BeamSplitter& splitter,
                  std::optional<DipModelParams> init, const FitOptions& options) {
  std::vector<double> delays, counts;
  delays.reserve(points.size());
  counts.reserve(points.size());
  for (const auto& p : points) {
    delays.push_back(p.delay_ps);
    counts.push_back(static_cast<double>(p.coincidences));
  }
  return fit_dip(delays, counts, splitter, init, options);
}

}  // namespace hom
