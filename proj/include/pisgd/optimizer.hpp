#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "pisgd/ball.hpp"
#include "pisgd/objective.hpp"

namespace pisgd {

struct PisgdConfig {
  std::int64_t k_total = 1;    // K
  std::int64_t batch = 1;      // S
  double step = 0.0;           // eta
  double radius = 0.0;         // sigma; 0 disables perturbation (plain SGD)
  std::uint64_t seed = 0;
  // When set, all K iterations run and the full-objective value is recorded
  // every trace_stride iterations for plotting. The returned output is still
  // the faithful x^R.
  bool record_trace = false;
  std::int64_t trace_stride = 1;

  void validate() const;
};

struct RunRecord {
  std::int64_t stop_index = 1;  // R in [1, K]
  Eigen::VectorXd output;       // x^R
  std::int64_t gradient_calls = 0;  // (R - 1) * S

  // Filled only in trace mode.
  std::vector<std::int64_t> trace_iteration;
  std::vector<double> loss_trace;       // full objective f(x^k)
  std::vector<double> grad_norm_trace;  // ||step direction|| at iteration k
};

// One pass of PISGD: R ~ uniform{1..K} is drawn first, then R-1 updates
// x <- x - (eta/S) * sum_l grad F(x + z_l, xi_l) with z_l uniform on
// B(sigma). Identical (obj, x1, cfg) give identical records; every (k, l)
// pair owns its RNG substream and the S terms are reduced in index order.
RunRecord pisgd_run(const StochasticObjective& obj, const Eigen::VectorXd& x1,
                    const PisgdConfig& cfg);

// Mini-batch SGD baseline: the same loop with zero perturbation.
RunRecord sgd_run(const StochasticObjective& obj, const Eigen::VectorXd& x1,
                  const PisgdConfig& cfg);

// Deterministic-objective update x - (eta/S) * sum_l grad f(x + z_l); the
// only randomness is the perturbation.
Eigen::VectorXd deterministic_step(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, BallSampler& sampler, std::int64_t batch,
    double step);

}  // namespace pisgd
