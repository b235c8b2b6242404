#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "pisgd/optimizer.hpp"

using namespace pisgd;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

}  // namespace

TEST_CASE("K = 1 never updates") {
  const auto obj = abs_value_objective();
  PisgdConfig cfg;
  cfg.k_total = 1;
  cfg.batch = 3;
  cfg.step = 0.1;
  cfg.radius = 0.5;
  const RunRecord rec = pisgd_run(*obj, vec1(10.0), cfg);
  CHECK(rec.stop_index == 1);
  CHECK(rec.output[0] == 10.0);
  CHECK(rec.gradient_calls == 0);
}

TEST_CASE("identical configs give identical records") {
  const auto obj = abs_value_objective();
  PisgdConfig cfg;
  cfg.k_total = 200;
  cfg.batch = 4;
  cfg.step = 0.05;
  cfg.radius = 0.3;
  cfg.seed = 77;
  const RunRecord a = pisgd_run(*obj, vec1(5.0), cfg);
  const RunRecord b = pisgd_run(*obj, vec1(5.0), cfg);
  CHECK(a.stop_index == b.stop_index);
  CHECK(a.output == b.output);
  CHECK(a.gradient_calls == (a.stop_index - 1) * cfg.batch);
}

TEST_CASE("zero radius reproduces plain sgd bit for bit") {
  const auto obj = abs_value_objective();
  PisgdConfig cfg;
  cfg.k_total = 500;
  cfg.batch = 2;
  cfg.step = 0.01;
  cfg.radius = 0.0;
  cfg.seed = 5;
  const RunRecord p = pisgd_run(*obj, vec1(3.0), cfg);
  const RunRecord s = sgd_run(*obj, vec1(3.0), cfg);
  CHECK(p.stop_index == s.stop_index);
  CHECK(p.output == s.output);

  // sgd_run ignores a nonzero radius entirely.
  cfg.radius = 0.7;
  const RunRecord s2 = sgd_run(*obj, vec1(3.0), cfg);
  CHECK(s2.output == s.output);
}

TEST_CASE("two deterministic quadratic steps: (1 - eta)^2") {
  QuadraticObjective quad(1, 10.0);
  PisgdConfig cfg;
  cfg.k_total = 3;
  cfg.batch = 1;
  cfg.step = 0.1;
  cfg.radius = 0.0;
  // Scan seeds until R = 3 so exactly two updates run.
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    cfg.seed = seed;
    const RunRecord rec = sgd_run(quad, vec1(1.0), cfg);
    if (rec.stop_index == 3) {
      CHECK(rec.output[0] == doctest::Approx(0.81).epsilon(1e-12));
      CHECK(rec.gradient_calls == 2);
      return;
    }
  }
  FAIL("no seed with R = 3 found");
}

TEST_CASE("abs value converges toward the kink") {
  const auto obj = abs_value_objective();
  PisgdConfig cfg;
  cfg.k_total = 10000;
  cfg.batch = 1;
  cfg.step = 0.01;
  cfg.radius = 0.1;
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    const RunRecord rec = pisgd_run(*obj, vec1(10.0), cfg);
    if (std::abs(rec.output[0]) <= 1.0) ++good;
  }
  // Reaching |x| <= 1 from x1 = 10 takes about (10 - 1) / eta = 900 of the
  // R - 1 updates, and R is uniform on {1..K}, so the success probability
  // is about 1 - 900/K = 0.91; demand at least 85/100.
  CHECK(good >= 85);
}

TEST_CASE("no kink is ever hit from an irrational start") {
  const auto obj = abs_value_objective();
  const auto* abs = dynamic_cast<const AbsValueObjective*>(obj.get());
  REQUIRE(abs != nullptr);
  PisgdConfig cfg;
  cfg.k_total = 1000001;
  cfg.batch = 1;
  cfg.step = 1e-4;
  cfg.radius = 0.05;
  cfg.seed = 3;
  cfg.record_trace = true;  // force all K iterations
  cfg.trace_stride = 1000000;
  const std::int64_t before = abs->kink_hits();
  pisgd_run(*obj, vec1(std::sqrt(2.0)), cfg);
  CHECK(abs->kink_hits() == before);
}

TEST_CASE("trace mode matches the faithful output and accounting") {
  const auto obj = abs_value_objective();
  PisgdConfig cfg;
  cfg.k_total = 300;
  cfg.batch = 2;
  cfg.step = 0.02;
  cfg.radius = 0.1;
  cfg.seed = 12;
  const RunRecord plain = pisgd_run(*obj, vec1(4.0), cfg);
  cfg.record_trace = true;
  cfg.trace_stride = 10;
  const RunRecord traced = pisgd_run(*obj, vec1(4.0), cfg);
  CHECK(traced.stop_index == plain.stop_index);
  CHECK(traced.output == plain.output);
  CHECK(traced.gradient_calls == plain.gradient_calls);
  REQUIRE(!traced.loss_trace.empty());
  CHECK(traced.trace_iteration.front() == 0);
  CHECK(traced.loss_trace.front() == doctest::Approx(4.0));
  CHECK(traced.trace_iteration.back() == cfg.k_total);
  CHECK(traced.loss_trace.size() == traced.grad_norm_trace.size());
}

TEST_CASE("deterministic step on known objectives") {
  // |.| at x = 5, sigma = 1: the gradient is +1 on the whole ball.
  BallSampler s1(1, 1.0, RngStream(derive_key(1, 2)));
  const Eigen::VectorXd out = deterministic_step(
      [](const Eigen::VectorXd& w) {
        Eigen::VectorXd g(1);
        g[0] = w[0] > 0 ? 1.0 : -1.0;
        return g;
      },
      vec1(5.0), s1, 1, 0.25);
  CHECK(out[0] == doctest::Approx(4.75));

  // eta = 0 leaves x unchanged.
  BallSampler s2(1, 1.0, RngStream(derive_key(1, 3)));
  const Eigen::VectorXd same = deterministic_step(
      [](const Eigen::VectorXd& w) { return w; }, vec1(5.0), s2, 4, 0.0);
  CHECK(same[0] == 5.0);

  // quadratic: large S mean step approaches -eta * x.
  BallSampler s3(3, 0.5, RngStream(derive_key(1, 4)));
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  const Eigen::VectorXd stepped = deterministic_step(
      [](const Eigen::VectorXd& w) { return w; }, x, s3, 20000, 0.1);
  CHECK((stepped - 0.9 * x).norm() <= 0.01);
}

TEST_CASE("config validation") {
  PisgdConfig cfg;
  cfg.k_total = 0;
  CHECK_THROWS(cfg.validate());
  cfg.k_total = 1;
  cfg.batch = 0;
  CHECK_THROWS(cfg.validate());
  cfg.batch = 1;
  cfg.step = -1.0;
  CHECK_THROWS(cfg.validate());
}
