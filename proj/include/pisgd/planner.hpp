#pragma once

#include <cstdint>

#include "pisgd/optimizer.hpp"

namespace pisgd {

// Problem constants consumed by the parameter-planning formulas:
// L0 = E[C(xi)], Q = E[C(xi)^2], Delta = upper bound on f(x1) - f(x*),
// the decision dimension d, and the free scale theta.
struct ProblemConstants {
  double l0 = 1.0;
  double q = 1.0;
  double delta = 1.0;
  int dim = 1;
  double theta = 1.0;

  double sqrt_d() const;
  void validate() const;
};

struct Schedule {
  std::int64_t batch;  // S = ceil(K^(1-beta))
  double sigma;        // theta * sqrt(d) * K^(-beta)
  double eta;          // (theta / L0) * K^(-beta)
};

// Multi-run plan with post-selection: run PISGD R times at (K, beta), then
// pick the candidate with the smallest T-sample averaged-gradient norm.
struct HighProbPlan {
  std::int64_t runs;                // R = ceil(-ln(c * gamma))
  std::int64_t validation_samples;  // T = ceil(6 phi psi Q / eps2^2)
  double psi;                       // (R + 1) / ((1 - c) * gamma)
  double eps2_inner;                // eps2' = sqrt((eps2^2 - 6 psi Q / T) / 4e)
  std::int64_t k_total;
  double beta;
  double c;
  double phi;
};

struct OptimalPlan {
  std::int64_t k_total;  // K*
  double beta;           // beta*
};

// Schedule (S, sigma, eta) for given K and beta in (0, 1).
Schedule theorem_schedule(std::int64_t k_total, double beta,
                          const ProblemConstants& consts);

// Guaranteed level for E[dist(0, d_sigma f(x^R))]:
// K^((beta-1)/2) * sqrt(2 (L0 Delta / theta + L0^2 sqrt(d) K^-beta + Q)).
double bound_rhs(std::int64_t k_total, double beta,
                 const ProblemConstants& consts);

// Gradient-call count max((K_eps1 - 1) S_eps1, (K_eps2 - 1) S_eps2) for
// reaching an expected (eps1, eps2)-stationary point at a given beta,
// with theta fixed at 1.
std::int64_t complexity_estimate(double eps1, double eps2, double beta,
                                 const ProblemConstants& consts);

// Iteration-minimal (K*, beta*) closed forms; requires eps2 < L0 and theta
// fixed at 1. beta* in (0, 1) is validated numerically.
OptimalPlan optimal_plan(double eps1, double eps2,
                         const ProblemConstants& consts);

// Plan achieving an (eps1, eps2)-stationary point with probability 1 - gamma.
// c and phi are free constants; defaults 0.5 and 2 keep the run count and
// validation sample count moderate.
HighProbPlan high_prob_plan(double eps1, double eps2, double gamma,
                            const ProblemConstants& consts, double c = 0.5,
                            double phi = 2.0);

// i-th entry of an increasing-K schedule K_i = ceil(base_k * growth^(i-1)),
// forced strictly increasing, with (S, sigma, eta) from theorem_schedule.
PisgdConfig asymptotic_schedule(std::int64_t i, std::int64_t base_k,
                                double growth, double beta,
                                const ProblemConstants& consts);

}  // namespace pisgd
