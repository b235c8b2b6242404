#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "pisgd/rng.hpp"

namespace pisgd {

// Exact sampler for the uniform distribution on the Euclidean ball B(sigma)
// in R^d: Gaussian direction normalized to the sphere, scaled by
// sigma * U^(1/d). Two samplers with identical (dim, radius, key) emit
// identical sequences.
class BallSampler {
 public:
  BallSampler(Eigen::Index dim, double radius, RngStream stream);

  Eigen::VectorXd sample();

  Eigen::Index dim() const { return dim_; }
  double radius() const { return radius_; }

 private:
  Eigen::Index dim_;
  double radius_;
  RngStream stream_;
};

// E[||z||_2] for z uniform on B(sigma) in R^d: sigma * d / (d + 1).
double expected_norm(int d, double sigma);

// Uniform density inside B(sigma), i.e. 1 / vol(B(sigma)). Computed in the
// log domain so large d does not overflow.
double ball_density_constant(int d, double sigma);

// lambda(d) * d!! / (d-1)!! with lambda(d) = 2/pi for even d and 1 for odd d,
// accumulated as a product of successive-term ratios. Always <= sqrt(d).
double double_factorial_ratio(int d);

}  // namespace pisgd
