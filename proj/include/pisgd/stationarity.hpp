#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pisgd/objective.hpp"

namespace pisgd {

// T-sample averaged perturbed gradient at x. Its conditional mean lies in
// the Clarke sigma-subdifferential at x, so the norm upper-bounds
// dist(0, d_sigma f(x)) in expectation; this is the certificate the
// convergence analysis itself uses.
struct GradientEstimate {
  Eigen::VectorXd mean_grad;
  double norm = 0.0;
  std::int64_t samples_used = 0;
  double radius = 0.0;
};

GradientEstimate averaged_gradient(const StochasticObjective& obj,
                                   const Eigen::VectorXd& x, double sigma,
                                   std::int64_t samples, std::uint64_t seed);

// Post-selection over candidate solutions: the same T samples (z_t, xi_t)
// are reused for every candidate and the minimal averaged-gradient norm
// wins, ties broken by lowest index.
std::pair<std::size_t, GradientEstimate> select_best(
    const std::vector<Eigen::VectorXd>& candidates,
    const StochasticObjective& obj, double sigma, std::int64_t samples,
    std::uint64_t seed);

struct MinNormResult {
  Eigen::VectorXd point;
  double norm = 0.0;
  Eigen::VectorXd weights;  // convex coefficients over the input vectors
  double gap = 0.0;         // achieved duality gap
  std::int64_t iterations = 0;
  bool converged = false;
};

// Minimum-norm element of the convex hull of a finite vector set, via
// away-step Frank-Wolfe with exact line search; stops at duality gap <= tol
// or an iteration cap of 1e5.
MinNormResult min_norm_point(const std::vector<Eigen::VectorXd>& vectors,
                             double tol);

// Upper bound on dist(0, d_sigma f(x)) for a deterministic objective:
// min-norm point of the hull of S gradients sampled in x + B(sigma).
// Per-sample stochastic gradients are not elements of d_sigma f, so this
// diagnostic is restricted to deterministic gradient oracles.
double goldstein_upper_bound(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, double sigma, std::int64_t samples,
    std::uint64_t seed, double tol);

}  // namespace pisgd
