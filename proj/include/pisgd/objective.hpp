#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "pisgd/rng.hpp"

namespace pisgd {

// Opaque per-objective sample payload. Built-in objectives only need an
// index: finite sums draw a uniform item index, deterministic objectives
// ignore it.
struct Sample {
  std::int64_t index = 0;
};

// Oracle bundle for the stochastic objective f(w) = E[F(w, xi)]:
// per-sample value, approximate stochastic gradient, and Lipschitz metadata
// C(xi), L0 = E[C(xi)], Q = E[C(xi)^2]. Immutable after construction and
// safe for concurrent evaluation.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual Sample draw_sample(RngStream& rng) const = 0;
  virtual double value(const Eigen::VectorXd& w, const Sample& xi) const = 0;
  virtual Eigen::VectorXd approx_grad(const Eigen::VectorXd& w,
                                      const Sample& xi) const = 0;
  virtual double lipschitz_of(const Sample& xi) const = 0;

  // Full objective f(w); for finite sums the mean over all items.
  virtual double full_value(const Eigen::VectorXd& w) const = 0;

  double l0() const { return l0_; }
  double q() const { return q_; }

  // Upper bound on Delta = f(x1) - f(x*). The default assumes a nonnegative
  // loss, so f(x1) itself is valid.
  virtual double optimum_gap_bound(const Eigen::VectorXd& x1) const {
    return full_value(x1);
  }

 protected:
  // Asserts Q >= L0^2 (Jensen).
  void set_moments(double l0, double q);

 private:
  double l0_ = 0.0;
  double q_ = 0.0;
};

using ObjectivePtr = std::shared_ptr<const StochasticObjective>;

// f(w) = |w|, d = 1, L0 = 1, minimizer 0. The approximate gradient is
// sign(w) with sign(0) := 0. Evaluations landing exactly on the kink are
// counted, which should never happen when driven from an absolutely
// continuous perturbation.
class AbsValueObjective final : public StochasticObjective {
 public:
  AbsValueObjective();

  Eigen::Index dim() const override { return 1; }
  Sample draw_sample(RngStream&) const override { return {}; }
  double value(const Eigen::VectorXd& w, const Sample&) const override;
  Eigen::VectorXd approx_grad(const Eigen::VectorXd& w,
                              const Sample&) const override;
  double lipschitz_of(const Sample&) const override { return 1.0; }
  double full_value(const Eigen::VectorXd& w) const override;

  std::int64_t kink_hits() const { return kink_hits_.load(); }

 private:
  mutable std::atomic<std::int64_t> kink_hits_{0};
};

// f(w) = 0.5 ||w||^2; smooth reference objective for step-size checks.
// Not globally Lipschitz, so its metadata is only meaningful on bounded
// regions; lipschitz_of reports the supplied bound.
class QuadraticObjective final : public StochasticObjective {
 public:
  QuadraticObjective(Eigen::Index dim, double lipschitz_bound);

  Eigen::Index dim() const override { return dim_; }
  Sample draw_sample(RngStream&) const override { return {}; }
  double value(const Eigen::VectorXd& w, const Sample&) const override;
  Eigen::VectorXd approx_grad(const Eigen::VectorXd& w,
                              const Sample&) const override;
  double lipschitz_of(const Sample&) const override { return bound_; }
  double full_value(const Eigen::VectorXd& w) const override;

 private:
  Eigen::Index dim_;
  double bound_;
};

// f(w) = max(w_1, ..., w_d); deterministic nonsmooth objective whose kinks
// form the ties between coordinates. Gradient convention at ties: the
// lowest maximizing index.
class MaxCoordinateObjective final : public StochasticObjective {
 public:
  explicit MaxCoordinateObjective(Eigen::Index dim);

  Eigen::Index dim() const override { return dim_; }
  Sample draw_sample(RngStream&) const override { return {}; }
  double value(const Eigen::VectorXd& w, const Sample&) const override;
  Eigen::VectorXd approx_grad(const Eigen::VectorXd& w,
                              const Sample&) const override;
  double lipschitz_of(const Sample&) const override { return 1.0; }
  double full_value(const Eigen::VectorXd& w) const override;

 private:
  Eigen::Index dim_;
};

// Finite-sum objective over per-item objectives with a shared dimension:
// sampling draws a uniform item index, L0 is the mean of the item Lipschitz
// constants and Q the mean of their squares.
class FiniteSumObjective final : public StochasticObjective {
 public:
  explicit FiniteSumObjective(std::vector<ObjectivePtr> items);

  Eigen::Index dim() const override;
  Sample draw_sample(RngStream& rng) const override;
  double value(const Eigen::VectorXd& w, const Sample& xi) const override;
  Eigen::VectorXd approx_grad(const Eigen::VectorXd& w,
                              const Sample& xi) const override;
  double lipschitz_of(const Sample& xi) const override;
  double full_value(const Eigen::VectorXd& w) const override;

  std::size_t item_count() const { return items_.size(); }

 private:
  std::vector<ObjectivePtr> items_;
};

ObjectivePtr abs_value_objective();
ObjectivePtr finite_sum_objective(std::vector<ObjectivePtr> items);

// Lipschitz constant of a bounded function with Lipschitz gradient:
// |f| <= R and L1-Lipschitz gradient imply 2R + L1 * d / 2.
double bounded_smooth_l0(double r, double l1, int d);

// Central-difference gradient, the independent oracle for gradient checks.
Eigen::VectorXd finite_difference_grad(const StochasticObjective& obj,
                                       const Eigen::VectorXd& w,
                                       const Sample& xi, double h);

}  // namespace pisgd
