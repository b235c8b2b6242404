#include "pisgd/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace pisgd {

void StochasticObjective::set_moments(double l0, double q) {
  if (!(l0 > 0.0)) throw std::invalid_argument("objective: L0 must be > 0");
  if (q < l0 * l0 * (1.0 - 1e-12))
    throw std::invalid_argument("objective: Q >= L0^2 violated");
  l0_ = l0;
  q_ = q;
}

AbsValueObjective::AbsValueObjective() { set_moments(1.0, 1.0); }

double AbsValueObjective::value(const Eigen::VectorXd& w, const Sample&) const {
  return std::abs(w[0]);
}

Eigen::VectorXd AbsValueObjective::approx_grad(const Eigen::VectorXd& w,
                                               const Sample&) const {
  Eigen::VectorXd g(1);
  if (w[0] > 0.0) {
    g[0] = 1.0;
  } else if (w[0] < 0.0) {
    g[0] = -1.0;
  } else {
    kink_hits_.fetch_add(1, std::memory_order_relaxed);
    g[0] = 0.0;
  }
  return g;
}

double AbsValueObjective::full_value(const Eigen::VectorXd& w) const {
  return std::abs(w[0]);
}

QuadraticObjective::QuadraticObjective(Eigen::Index dim, double lipschitz_bound)
    : dim_(dim), bound_(lipschitz_bound) {
  if (dim < 1) throw std::invalid_argument("quadratic: dim must be >= 1");
  set_moments(bound_, bound_ * bound_);
}

double QuadraticObjective::value(const Eigen::VectorXd& w, const Sample&) const {
  return 0.5 * w.squaredNorm();
}

Eigen::VectorXd QuadraticObjective::approx_grad(const Eigen::VectorXd& w,
                                                const Sample&) const {
  return w;
}

double QuadraticObjective::full_value(const Eigen::VectorXd& w) const {
  return 0.5 * w.squaredNorm();
}

MaxCoordinateObjective::MaxCoordinateObjective(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("max_coordinate: dim must be >= 1");
  set_moments(1.0, 1.0);
}

double MaxCoordinateObjective::value(const Eigen::VectorXd& w,
                                     const Sample&) const {
  return w.maxCoeff();
}

Eigen::VectorXd MaxCoordinateObjective::approx_grad(const Eigen::VectorXd& w,
                                                    const Sample&) const {
  Eigen::Index arg = 0;
  w.maxCoeff(&arg);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  g[arg] = 1.0;
  return g;
}

double MaxCoordinateObjective::full_value(const Eigen::VectorXd& w) const {
  return w.maxCoeff();
}

FiniteSumObjective::FiniteSumObjective(std::vector<ObjectivePtr> items)
    : items_(std::move(items)) {
  if (items_.empty())
    throw std::invalid_argument("finite_sum: empty item list");
  const Eigen::Index d = items_.front()->dim();
  double sum_c = 0.0;
  double sum_c2 = 0.0;
  for (const auto& item : items_) {
    if (!item) throw std::invalid_argument("finite_sum: null item");
    if (item->dim() != d)
      throw std::invalid_argument("finite_sum: items disagree on dim");
    const double c = item->lipschitz_of(Sample{});
    sum_c += c;
    sum_c2 += c * c;
  }
  const double n = static_cast<double>(items_.size());
  set_moments(sum_c / n, sum_c2 / n);
}

Eigen::Index FiniteSumObjective::dim() const { return items_.front()->dim(); }

Sample FiniteSumObjective::draw_sample(RngStream& rng) const {
  return Sample{static_cast<std::int64_t>(rng.uniform_index(items_.size()))};
}

double FiniteSumObjective::value(const Eigen::VectorXd& w,
                                 const Sample& xi) const {
  return items_.at(static_cast<std::size_t>(xi.index))->value(w, Sample{});
}

Eigen::VectorXd FiniteSumObjective::approx_grad(const Eigen::VectorXd& w,
                                                const Sample& xi) const {
  return items_.at(static_cast<std::size_t>(xi.index))
      ->approx_grad(w, Sample{});
}

double FiniteSumObjective::lipschitz_of(const Sample& xi) const {
  return items_.at(static_cast<std::size_t>(xi.index))
      ->lipschitz_of(Sample{});
}

double FiniteSumObjective::full_value(const Eigen::VectorXd& w) const {
  double sum = 0.0;
  for (const auto& item : items_) sum += item->value(w, Sample{});
  return sum / static_cast<double>(items_.size());
}

ObjectivePtr abs_value_objective() {
  return std::make_shared<AbsValueObjective>();
}

ObjectivePtr finite_sum_objective(std::vector<ObjectivePtr> items) {
  return std::make_shared<FiniteSumObjective>(std::move(items));
}

double bounded_smooth_l0(double r, double l1, int d) {
  if (!(r > 0.0)) throw std::invalid_argument("bounded_smooth_l0: R must be > 0");
  if (l1 < 0.0) throw std::invalid_argument("bounded_smooth_l0: L1 must be >= 0");
  if (d < 1) throw std::invalid_argument("bounded_smooth_l0: d must be >= 1");
  return 2.0 * r + 0.5 * l1 * static_cast<double>(d);
}

Eigen::VectorXd finite_difference_grad(const StochasticObjective& obj,
                                       const Eigen::VectorXd& w,
                                       const Sample& xi, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("finite_difference_grad: h must be > 0");
  Eigen::VectorXd g(w.size());
  Eigen::VectorXd wp = w;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double wj = w[j];
    wp[j] = wj + h;
    const double fp = obj.value(wp, xi);
    wp[j] = wj - h;
    const double fm = obj.value(wp, xi);
    wp[j] = wj;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace pisgd
