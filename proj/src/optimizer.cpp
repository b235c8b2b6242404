#include "pisgd/optimizer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pisgd {

namespace {

// Substream tags; keep z and xi draws on disjoint streams so sigma = 0 and
// sigma > 0 runs see identical sample sequences.
constexpr std::uint64_t kTagStopIndex = 0;
constexpr std::uint64_t kTagPerturbation = 1;
constexpr std::uint64_t kTagSample = 2;

void check_gradient(const Eigen::VectorXd& g, double lipschitz,
                    std::int64_t iteration, std::int64_t sample) {
  if (!g.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite gradient at iteration " << iteration << ", sample "
        << sample;
    throw std::runtime_error(msg.str());
  }
  if (g.norm() > lipschitz * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "gradient norm " << g.norm() << " exceeds C(xi) = " << lipschitz
        << " at iteration " << iteration << ", sample " << sample;
    throw std::runtime_error(msg.str());
  }
}

RunRecord run_loop(const StochasticObjective& obj, const Eigen::VectorXd& x1,
                   const PisgdConfig& cfg) {
  cfg.validate();
  if (x1.size() != obj.dim())
    throw std::invalid_argument("pisgd_run: x1 dimension mismatch");

  const std::int64_t k_total = cfg.k_total;
  const std::int64_t batch = cfg.batch;

  RunRecord rec;
  RngStream stop_stream(derive_key(cfg.seed, kTagStopIndex));
  rec.stop_index = 1 + static_cast<std::int64_t>(
                           stop_stream.uniform_index(
                               static_cast<std::uint64_t>(k_total)));

  const std::int64_t iterations = cfg.record_trace ? k_total
                                                   : rec.stop_index - 1;
  Eigen::VectorXd x = x1;
  Eigen::VectorXd direction(obj.dim());

  if (cfg.record_trace) {
    rec.trace_iteration.push_back(0);
    rec.loss_trace.push_back(obj.full_value(x));
    rec.grad_norm_trace.push_back(0.0);
  }

  for (std::int64_t k = 1; k <= iterations; ++k) {
    direction.setZero();
    for (std::int64_t l = 1; l <= batch; ++l) {
      Eigen::VectorXd w = x;
      if (cfg.radius > 0.0) {
        BallSampler ball(obj.dim(), cfg.radius,
                         RngStream(derive_key(cfg.seed, kTagPerturbation,
                                              static_cast<std::uint64_t>(k),
                                              static_cast<std::uint64_t>(l))));
        w += ball.sample();
      }
      RngStream xi_stream(derive_key(cfg.seed, kTagSample,
                                     static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(l)));
      const Sample xi = obj.draw_sample(xi_stream);
      const Eigen::VectorXd g = obj.approx_grad(w, xi);
      check_gradient(g, obj.lipschitz_of(xi), k, l);
      direction += g;
    }
    direction /= static_cast<double>(batch);
    x -= cfg.step * direction;

    if (k < rec.stop_index) rec.output = x;
    if (cfg.record_trace && (k % cfg.trace_stride == 0 || k == iterations)) {
      rec.trace_iteration.push_back(k);
      rec.loss_trace.push_back(obj.full_value(x));
      rec.grad_norm_trace.push_back(direction.norm());
    }
  }
  if (rec.stop_index == 1) rec.output = x1;
  rec.gradient_calls = (rec.stop_index - 1) * batch;
  return rec;
}

}  // namespace

void PisgdConfig::validate() const {
  if (k_total < 1) throw std::invalid_argument("config: K must be >= 1");
  if (batch < 1) throw std::invalid_argument("config: S must be >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("config: eta must be > 0");
  if (radius < 0.0) throw std::invalid_argument("config: sigma must be >= 0");
  if (trace_stride < 1)
    throw std::invalid_argument("config: trace stride must be >= 1");
}

RunRecord pisgd_run(const StochasticObjective& obj, const Eigen::VectorXd& x1,
                    const PisgdConfig& cfg) {
  return run_loop(obj, x1, cfg);
}

RunRecord sgd_run(const StochasticObjective& obj, const Eigen::VectorXd& x1,
                  const PisgdConfig& cfg) {
  PisgdConfig plain = cfg;
  plain.radius = 0.0;
  return run_loop(obj, x1, plain);
}

Eigen::VectorXd deterministic_step(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, BallSampler& sampler, std::int64_t batch,
    double step) {
  if (batch < 1)
    throw std::invalid_argument("deterministic_step: S must be >= 1");
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(x.size());
  for (std::int64_t l = 0; l < batch; ++l) {
    direction += grad(x + sampler.sample());
  }
  return x - (step / static_cast<double>(batch)) * direction;
}

}  // namespace pisgd
