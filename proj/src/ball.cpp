#include "pisgd/ball.hpp"

#include <cmath>
#include <stdexcept>

namespace pisgd {

BallSampler::BallSampler(Eigen::Index dim, double radius, RngStream stream)
    : dim_(dim), radius_(radius), stream_(stream) {
  if (dim < 1) throw std::invalid_argument("BallSampler: dim must be >= 1");
  if (!(radius > 0.0))
    throw std::invalid_argument("BallSampler: radius must be > 0");
}

Eigen::VectorXd BallSampler::sample() {
  Eigen::VectorXd z(dim_);
  double norm_sq = 0.0;
  do {
    for (Eigen::Index j = 0; j < dim_; ++j) z[j] = stream_.normal();
    norm_sq = z.squaredNorm();
  } while (norm_sq == 0.0);
  const double u = stream_.uniform01_open_zero();
  const double scale =
      radius_ * std::pow(u, 1.0 / static_cast<double>(dim_)) / std::sqrt(norm_sq);
  z *= scale;
  return z;
}

double expected_norm(int d, double sigma) {
  if (d < 1) throw std::invalid_argument("expected_norm: d must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("expected_norm: sigma must be > 0");
  return sigma * static_cast<double>(d) / static_cast<double>(d + 1);
}

double ball_density_constant(int d, double sigma) {
  if (d < 1) throw std::invalid_argument("ball_density_constant: d must be >= 1");
  if (!(sigma > 0.0))
    throw std::invalid_argument("ball_density_constant: sigma must be > 0");
  // log Gamma(d/2 + 1) - d * log(sqrt(pi) * sigma)
  const double log_density =
      std::lgamma(0.5 * d + 1.0) -
      d * (0.5 * std::log(M_PI) + std::log(sigma));
  return std::exp(log_density);
}

double double_factorial_ratio(int d) {
  if (d < 1)
    throw std::invalid_argument("double_factorial_ratio: d must be >= 1");
  // d!! / (d-1)!! = prod over k = d, d-2, ..., of k / (k-1); 0!! = 1.
  double ratio = 1.0;
  for (int k = d; k >= 2; k -= 2) {
    ratio *= static_cast<double>(k) / static_cast<double>(k - 1);
  }
  const double lambda = (d % 2 == 0) ? 2.0 / M_PI : 1.0;
  return lambda * ratio;
}

}  // namespace pisgd
