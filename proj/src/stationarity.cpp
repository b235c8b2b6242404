#include "pisgd/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pisgd/ball.hpp"

namespace pisgd {

namespace {

constexpr std::uint64_t kTagPerturbation = 11;
constexpr std::uint64_t kTagSample = 12;
constexpr std::int64_t kMinNormIterationCap = 100000;

// Shared (z_t, xi_t) draws for certificate evaluation.
struct CertificateSamples {
  std::vector<Eigen::VectorXd> perturbations;
  std::vector<Sample> samples;
};

CertificateSamples draw_certificate_samples(const StochasticObjective& obj,
                                            double sigma,
                                            std::int64_t count,
                                            std::uint64_t seed) {
  if (count < 1)
    throw std::invalid_argument("averaged_gradient: T must be >= 1");
  if (!(sigma > 0.0))
    throw std::invalid_argument("averaged_gradient: sigma must be > 0");
  CertificateSamples out;
  out.perturbations.reserve(static_cast<std::size_t>(count));
  out.samples.reserve(static_cast<std::size_t>(count));
  for (std::int64_t t = 1; t <= count; ++t) {
    BallSampler ball(obj.dim(), sigma,
                     RngStream(derive_key(seed, kTagPerturbation,
                                          static_cast<std::uint64_t>(t))));
    out.perturbations.push_back(ball.sample());
    RngStream xi_stream(
        derive_key(seed, kTagSample, static_cast<std::uint64_t>(t)));
    out.samples.push_back(obj.draw_sample(xi_stream));
  }
  return out;
}

GradientEstimate evaluate_certificate(const StochasticObjective& obj,
                                      const Eigen::VectorXd& x, double sigma,
                                      const CertificateSamples& draws) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(obj.dim());
  for (std::size_t t = 0; t < draws.samples.size(); ++t) {
    mean += obj.approx_grad(x + draws.perturbations[t], draws.samples[t]);
  }
  mean /= static_cast<double>(draws.samples.size());
  GradientEstimate est;
  est.mean_grad = std::move(mean);
  est.norm = est.mean_grad.norm();
  est.samples_used = static_cast<std::int64_t>(draws.samples.size());
  est.radius = sigma;
  return est;
}

}  // namespace

GradientEstimate averaged_gradient(const StochasticObjective& obj,
                                   const Eigen::VectorXd& x, double sigma,
                                   std::int64_t samples, std::uint64_t seed) {
  const CertificateSamples draws =
      draw_certificate_samples(obj, sigma, samples, seed);
  return evaluate_certificate(obj, x, sigma, draws);
}

std::pair<std::size_t, GradientEstimate> select_best(
    const std::vector<Eigen::VectorXd>& candidates,
    const StochasticObjective& obj, double sigma, std::int64_t samples,
    std::uint64_t seed) {
  if (candidates.empty())
    throw std::invalid_argument("select_best: empty candidate list");
  const CertificateSamples draws =
      draw_certificate_samples(obj, sigma, samples, seed);
  std::size_t best = 0;
  GradientEstimate best_est;
  double best_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    GradientEstimate est =
        evaluate_certificate(obj, candidates[i], sigma, draws);
    if (est.norm < best_norm) {
      best_norm = est.norm;
      best = i;
      best_est = std::move(est);
    }
  }
  return {best, best_est};
}

MinNormResult min_norm_point(const std::vector<Eigen::VectorXd>& vectors,
                             double tol) {
  if (vectors.empty())
    throw std::invalid_argument("min_norm_point: empty vector list");
  if (!(tol > 0.0))
    throw std::invalid_argument("min_norm_point: tol must be > 0");
  const std::size_t n = vectors.size();
  const Eigen::Index d = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != d)
      throw std::invalid_argument("min_norm_point: mixed dimensions");

  MinNormResult res;
  res.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  res.weights[0] = 1.0;
  Eigen::VectorXd x = vectors[0];

  // Away-step Frank-Wolfe on g(x) = 0.5 ||x||^2 over the hull; gradient is
  // x itself and the line search is exact.
  for (res.iterations = 0; res.iterations < kMinNormIterationCap;
       ++res.iterations) {
    // Frank-Wolfe vertex: minimizes <x, v>.
    std::size_t fw = 0;
    double fw_val = std::numeric_limits<double>::infinity();
    // Away vertex: maximizes <x, v> over the active set.
    std::size_t away = 0;
    double away_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double dot = x.dot(vectors[i]);
      if (dot < fw_val) {
        fw_val = dot;
        fw = i;
      }
      if (res.weights[static_cast<Eigen::Index>(i)] > 0.0 && dot > away_val) {
        away_val = dot;
        away = i;
      }
    }

    res.gap = x.squaredNorm() - fw_val;  // <x, x - s>
    if (res.gap <= tol) {
      res.converged = true;
      break;
    }

    const double away_gap = away_val - x.squaredNorm();
    Eigen::VectorXd dir;
    double gamma_max;
    std::size_t inc = fw, dec = away;
    bool away_step = away_gap > res.gap;
    if (away_step) {
      dir = x - vectors[away];
      const double alpha = res.weights[static_cast<Eigen::Index>(away)];
      gamma_max = alpha / (1.0 - alpha);
      if (!std::isfinite(gamma_max)) gamma_max = 1e16;
    } else {
      dir = vectors[fw] - x;
      gamma_max = 1.0;
    }

    const double denom = dir.squaredNorm();
    if (denom <= 0.0) {
      res.converged = res.gap <= tol;
      break;
    }
    double gamma = -x.dot(dir) / denom;
    gamma = std::clamp(gamma, 0.0, gamma_max);
    if (gamma == 0.0) {
      // No progress possible along this direction; gap is the certificate.
      break;
    }
    x += gamma * dir;
    if (away_step) {
      res.weights *= (1.0 + gamma);
      res.weights[static_cast<Eigen::Index>(dec)] -= gamma;
    } else {
      res.weights *= (1.0 - gamma);
      res.weights[static_cast<Eigen::Index>(inc)] += gamma;
    }
    // Clip tiny negatives from roundoff.
    for (Eigen::Index i = 0; i < res.weights.size(); ++i)
      if (res.weights[i] < 0.0 && res.weights[i] > -1e-14) res.weights[i] = 0.0;
  }

  res.point = std::move(x);
  res.norm = res.point.norm();
  return res;
}

double goldstein_upper_bound(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, double sigma, std::int64_t samples,
    std::uint64_t seed, double tol) {
  if (samples < 1)
    throw std::invalid_argument("goldstein_upper_bound: S must be >= 1");
  BallSampler ball(x.size(), sigma,
                   RngStream(derive_key(seed, kTagPerturbation)));
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t l = 0; l < samples; ++l) {
    grads.push_back(grad(x + ball.sample()));
  }
  return min_norm_point(grads, tol).norm;
}

}  // namespace pisgd
