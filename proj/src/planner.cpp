#include "pisgd/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace pisgd {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("planner: beta must lie in (0, 1)");
}

std::int64_t ceil_to_int(double x) {
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

double ProblemConstants::sqrt_d() const {
  return std::sqrt(static_cast<double>(dim));
}

void ProblemConstants::validate() const {
  if (!(l0 > 0.0)) throw std::invalid_argument("constants: L0 must be > 0");
  if (!(delta > 0.0))
    throw std::invalid_argument("constants: Delta must be > 0");
  if (!(theta > 0.0))
    throw std::invalid_argument("constants: theta must be > 0");
  if (dim < 1) throw std::invalid_argument("constants: d must be >= 1");
  if (q < l0 * l0 * (1.0 - 1e-12))
    throw std::invalid_argument("constants: Q >= L0^2 violated");
}

Schedule theorem_schedule(std::int64_t k_total, double beta,
                          const ProblemConstants& consts) {
  if (k_total < 1) throw std::invalid_argument("planner: K must be >= 1");
  check_beta(beta);
  consts.validate();
  const double k = static_cast<double>(k_total);
  const double k_pow = std::pow(k, -beta);
  Schedule s;
  s.batch = ceil_to_int(std::pow(k, 1.0 - beta));
  s.sigma = consts.theta * consts.sqrt_d() * k_pow;
  s.eta = consts.theta / consts.l0 * k_pow;
  return s;
}

double bound_rhs(std::int64_t k_total, double beta,
                 const ProblemConstants& consts) {
  if (k_total < 1) throw std::invalid_argument("planner: K must be >= 1");
  check_beta(beta);
  consts.validate();
  const double k = static_cast<double>(k_total);
  const double inner = consts.l0 / consts.theta * consts.delta +
                       consts.l0 * consts.l0 * consts.sqrt_d() *
                           std::pow(k, -beta) +
                       consts.q;
  return std::pow(k, 0.5 * (beta - 1.0)) * std::sqrt(2.0 * inner);
}

std::int64_t complexity_estimate(double eps1, double eps2, double beta,
                                 const ProblemConstants& consts) {
  if (!(eps1 > 0.0 && eps2 > 0.0))
    throw std::invalid_argument("planner: tolerances must be > 0");
  check_beta(beta);
  consts.validate();
  const double theta = 1.0;
  const std::int64_t k1 =
      ceil_to_int(std::pow(theta * consts.sqrt_d() / eps1, 1.0 / beta));
  const double inner = consts.l0 / theta * consts.delta +
                       consts.l0 * consts.l0 * consts.sqrt_d() + consts.q;
  const std::int64_t k2 = ceil_to_int(
      std::pow(2.0 * inner / (eps2 * eps2), 1.0 / (1.0 - beta)));
  const auto calls = [beta](std::int64_t k) {
    const std::int64_t s =
        ceil_to_int(std::pow(static_cast<double>(k), 1.0 - beta));
    return (k - 1) * s;
  };
  return std::max(calls(std::max<std::int64_t>(k1, 1)),
                  calls(std::max<std::int64_t>(k2, 1)));
}

OptimalPlan optimal_plan(double eps1, double eps2,
                         const ProblemConstants& consts) {
  if (!(eps1 > 0.0 && eps2 > 0.0))
    throw std::invalid_argument("planner: tolerances must be > 0");
  consts.validate();
  if (!(eps2 < consts.l0))
    throw std::invalid_argument(
        "planner: eps2 must be < L0; by Lipschitz continuity every point is "
        "already an (eps1, L0)-stationary point");
  const double l0 = consts.l0;
  const double a = 2.0 * (l0 * consts.delta + consts.q);
  const double b = 2.0 * l0 * l0 * consts.sqrt_d();
  const double e2 = eps2 * eps2;

  const std::int64_t k_global =
      static_cast<std::int64_t>(std::floor((a + b) / e2 + 1.0));
  const std::int64_t k_local = ceil_to_int(
      consts.sqrt_d() / e2 *
      (2.0 * (l0 * consts.delta + consts.q) / eps1 + 2.0 * l0 * l0));
  OptimalPlan plan;
  plan.k_total = std::max(k_global, k_local);
  const double k = static_cast<double>(plan.k_total);
  plan.beta = (std::log(k * e2 - b) - std::log(a)) / std::log(k);
  if (!(plan.beta > 1e-12 && plan.beta < 1.0 - 1e-12))
    throw std::runtime_error("planner: beta* escaped (0, 1)");
  return plan;
}

HighProbPlan high_prob_plan(double eps1, double eps2, double gamma,
                            const ProblemConstants& consts, double c,
                            double phi) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("planner: gamma must lie in (0, 1)");
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("planner: c must lie in (0, 1)");
  if (!(phi > 1.0)) throw std::invalid_argument("planner: phi must be > 1");
  consts.validate();

  HighProbPlan plan;
  plan.c = c;
  plan.phi = phi;
  plan.runs = std::max<std::int64_t>(1, ceil_to_int(-std::log(c * gamma)));
  plan.psi = (static_cast<double>(plan.runs) + 1.0) / ((1.0 - c) * gamma);
  plan.validation_samples =
      ceil_to_int(6.0 * phi * plan.psi * consts.q / (eps2 * eps2));
  const double inner =
      eps2 * eps2 -
      6.0 * plan.psi * consts.q / static_cast<double>(plan.validation_samples);
  if (!(inner > 0.0))
    throw std::invalid_argument("planner: infeasible inner tolerance eps2'");
  plan.eps2_inner = std::sqrt(inner / (4.0 * std::exp(1.0)));
  if (!(plan.eps2_inner < consts.l0))
    throw std::invalid_argument(
        "planner: inner tolerance eps2' >= L0; optimal_plan inapplicable");
  const OptimalPlan opt = optimal_plan(eps1, plan.eps2_inner, consts);
  plan.k_total = opt.k_total;
  plan.beta = opt.beta;
  return plan;
}

PisgdConfig asymptotic_schedule(std::int64_t i, std::int64_t base_k,
                                double growth, double beta,
                                const ProblemConstants& consts) {
  if (i < 1) throw std::invalid_argument("planner: schedule index must be >= 1");
  if (base_k < 1) throw std::invalid_argument("planner: base K must be >= 1");
  if (!(growth > 1.0))
    throw std::invalid_argument("planner: growth must be > 1");
  check_beta(beta);

  std::int64_t k = base_k;
  for (std::int64_t j = 2; j <= i; ++j) {
    const std::int64_t next = ceil_to_int(
        static_cast<double>(base_k) *
        std::pow(growth, static_cast<double>(j - 1)));
    k = std::max(next, k + 1);  // force strict increase
  }
  const Schedule s = theorem_schedule(k, beta, consts);
  PisgdConfig cfg;
  cfg.k_total = k;
  cfg.batch = s.batch;
  cfg.step = s.eta;
  cfg.radius = s.sigma;
  return cfg;
}

}  // namespace pisgd
