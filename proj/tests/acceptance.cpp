// Acceptance gate: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pisgd/ball.hpp"
#include "pisgd/experiment.hpp"
#include "pisgd/nn.hpp"
#include "pisgd/planner.hpp"
#include "pisgd/stationarity.hpp"

using namespace pisgd;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::printf("criterion %2d %-28s %s%s%s\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", detail.empty() ? "" : "  -- ",
              detail.c_str());
  if (!pass) ++failures;
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---- 1: ball sampler Monte Carlo moments ---------------------------------
void criterion_ball_moments() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 1000000;
  bool pass = true;
  std::ostringstream detail;
  for (int d : {1, 2, 5, 20}) {
    for (double sigma : {0.1, 1.0}) {
      BallSampler s(d, sigma,
                    RngStream(derive_key(101, static_cast<std::uint64_t>(d),
                                         sigma < 0.5 ? 0 : 1)));
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += s.sample().norm();
      const double err = std::abs(sum / n - expected_norm(d, sigma));
      if (err > 4.0 * sigma / std::sqrt(static_cast<double>(n))) {
        pass = false;
        detail << "d=" << d << " sigma=" << sigma << " err=" << err << "; ";
      }
    }
  }
  const double secs = elapsed(t0);
  if (secs >= 30.0) {
    pass = false;
    detail << "runtime " << secs << "s";
  }
  report(1, "ball moments", pass, detail.str());
}

// ---- 2: double-factorial ratio bound -------------------------------------
void criterion_ratio_bound() {
  bool pass = std::abs(double_factorial_ratio(1) - 1.0) < 1e-15 &&
              std::abs(double_factorial_ratio(2) - 4.0 / M_PI) < 1e-15;
  for (int d = 1; d <= 200; ++d)
    if (double_factorial_ratio(d) > std::sqrt(static_cast<double>(d)))
      pass = false;
  report(2, "factorial ratio bound", pass);
}

// Shared synthetic NN problem for criteria 3-5.
struct NnFixture {
  NetworkSpec spec;
  std::shared_ptr<const NnObjective> obj;
};

NnFixture make_fixture() {
  NnFixture fx;
  fx.spec.n1 = 10;
  fx.spec.n2 = 5;
  fx.spec.n3 = 3;
  fx.spec.relu_cap = 1.0;
  BlobConfig blobs;
  blobs.count = 200;
  blobs.dim = 10;
  blobs.classes = 3;
  blobs.seed = 2024;
  auto data = make_blobs(blobs);
  fx.obj = build_nn_objective(fx.spec, std::move(data));
  return fx;
}

// ---- 3: averaged-gradient variance <= Q / S ------------------------------
void criterion_variance_scaling() {
  const NnFixture fx = make_fixture();
  const Eigen::VectorXd x =
      NetworkParams::random_init(fx.spec, 7).flatten();
  const double q = fx.obj->q();
  const int reps = 10000;
  bool pass = true;
  std::ostringstream detail;
  for (int s : {1, 4, 16, 64}) {
    RngStream rng(derive_key(103, static_cast<std::uint64_t>(s)));
    // Center the squared deviation on the exact mean gradient (the full
    // objective gradient at a generic point).
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.size());
    const std::size_t n_items = fx.obj->dataset().size();
    for (std::size_t i = 0; i < n_items; ++i)
      mean += fx.obj->approx_grad(x, {static_cast<std::int64_t>(i)});
    mean /= static_cast<double>(n_items);

    double sq_sum = 0.0, sq_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      Eigen::VectorXd avg = Eigen::VectorXd::Zero(x.size());
      for (int l = 0; l < s; ++l)
        avg += fx.obj->approx_grad(x, fx.obj->draw_sample(rng));
      avg /= s;
      const double sq = (avg - mean).squaredNorm();
      sq_sum += sq;
      sq_sq += sq * sq;
    }
    const double var = sq_sum / reps;
    const double se =
        std::sqrt(std::max(0.0, sq_sq / reps - var * var) / reps);
    if (var > q / s + 3.0 * se) {
      pass = false;
      detail << "S=" << s << " var=" << var << " > Q/S=" << q / s << "; ";
    }
  }
  report(3, "variance scaling Q/S", pass, detail.str());
}

// ---- 4: backprop vs central differences ----------------------------------
void criterion_backprop() {
  const NnFixture fx = make_fixture();
  RngStream rng(derive_key(107, 1));
  const double h = 1e-5;
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const NetworkParams p = NetworkParams::random_init(
        fx.spec, 500 + static_cast<std::uint64_t>(done) * 13 +
                     rng.next_u64() % 7);
    Eigen::VectorXd z(fx.spec.param_dim());
    for (Eigen::Index j = 0; j < z.size(); ++j)
      z[j] = 0.3 * (2.0 * rng.uniform01() - 1.0);
    const Sample xi{static_cast<std::int64_t>(
        rng.uniform_index(fx.obj->dataset().size()))};
    const Eigen::VectorXd w = p.flatten() + z;

    // Skip draws whose indicator margins a central difference could
    // straddle; the analytic formulas only claim equality away from them.
    const NetworkParams at = NetworkParams::unflatten(fx.spec, w);
    const auto& sample =
        fx.obj->dataset()[static_cast<std::size_t>(xi.index)];
    const ForwardResult f = forward(fx.spec, at, sample);
    double margin = 1e300;
    for (Eigen::Index j = 0; j < fx.spec.n2; ++j)
      margin = std::min({margin, std::abs(f.z2[j]),
                         std::abs(f.z2[j] - fx.spec.relu_cap)});
    for (Eigen::Index j = 0; j < fx.spec.n3; ++j)
      for (Eigen::Index k = 0; k < fx.spec.n2; ++k)
        margin = std::min(margin, std::abs(std::abs(at.w3(j, k)) - 1.0));
    if (margin < 100.0 * h) continue;

    const Eigen::VectorXd analytic = fx.obj->approx_grad(w, xi);
    const Eigen::VectorXd fd = finite_difference_grad(*fx.obj, w, xi, h);
    worst = std::max(worst,
                     (analytic - fd).norm() / std::max(fd.norm(), 1e-6));
    ++done;
  }
  std::ostringstream detail;
  detail << "max relative error " << worst;
  report(4, "backprop oracle", worst <= 1e-5, detail.str());
}

// ---- 5: per-sample Lipschitz property ------------------------------------
void criterion_sample_lipschitz() {
  const NnFixture fx = make_fixture();
  RngStream rng(derive_key(109, 1));
  int violations = 0;
  for (int s = 0; s < 10; ++s) {
    const auto& sample = fx.obj->dataset()[rng.uniform_index(
        fx.obj->dataset().size())];
    const double li = sample_lipschitz(fx.spec, sample.features);
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd w1(fx.spec.param_dim()), w2(fx.spec.param_dim());
      for (Eigen::Index j = 0; j < w1.size(); ++j) {
        w1[j] = 3.0 * (2.0 * rng.uniform01() - 1.0);
        w2[j] = w1[j] + (2.0 * rng.uniform01() - 1.0);
      }
      const double f1 =
          forward(fx.spec, NetworkParams::unflatten(fx.spec, w1), sample)
              .loss;
      const double f2 =
          forward(fx.spec, NetworkParams::unflatten(fx.spec, w2), sample)
              .loss;
      if (std::abs(f1 - f2) > li * (w1 - w2).norm() * (1.0 + 1e-9))
        ++violations;
    }
  }
  std::ostringstream detail;
  detail << violations << " violations of 10000 pairs";
  report(5, "per-sample lipschitz", violations == 0, detail.str());
}

// ---- 6: expectation guarantee at desk scale ------------------------------
void criterion_expectation_bound() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto obj = abs_value_objective();
  ProblemConstants consts;  // L0 = Q = Delta = d = theta = 1
  const std::int64_t k = 400;
  const double beta = 0.5;
  const Schedule sched = theorem_schedule(k, beta, consts);
  const double rhs = bound_rhs(k, beta, consts);

  Eigen::VectorXd x1(1);
  x1[0] = 1.0;  // Delta = |x1| = 1
  const int runs = 50;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < runs; ++r) {
    PisgdConfig cfg;
    cfg.k_total = k;
    cfg.batch = sched.batch;
    cfg.step = sched.eta;
    cfg.radius = sched.sigma;
    cfg.seed = 7000 + static_cast<std::uint64_t>(r);
    const RunRecord rec = pisgd_run(*obj, x1, cfg);
    const GradientEstimate est = averaged_gradient(
        *obj, rec.output, sched.sigma, sched.batch, 9000 + r);
    sum += est.norm;
    sum_sq += est.norm * est.norm;
  }
  const double mean = sum / runs;
  const double se =
      std::sqrt(std::max(0.0, sum_sq / runs - mean * mean) / runs);
  const double secs = elapsed(t0);
  std::ostringstream detail;
  detail << "mean " << mean << " vs bound " << rhs << " (se " << se << ")";
  report(6, "expectation guarantee", mean <= rhs + 3.0 * se && secs < 60.0,
         detail.str());
}

// ---- 7: iteration-minimal plan brute force -------------------------------
bool k_feasible(std::int64_t k, double eps1, double eps2,
                const ProblemConstants& c) {
  if (k < 2) return false;
  const double logk = std::log(static_cast<double>(k));
  double lo = 0.0;
  if (c.sqrt_d() > eps1) lo = std::log(c.sqrt_d() / eps1) / logk;
  const double u =
      (eps2 * eps2 - 2.0 * c.l0 * c.l0 * c.sqrt_d() / k) /
      (2.0 * (c.l0 * c.delta + c.q));
  if (u <= 0.0) return false;
  const double hi = 1.0 + std::log(u) / logk;
  return lo < std::min(hi, 1.0) - 1e-15 && lo < 1.0;
}

void criterion_plan_minimality() {
  RngStream rng(derive_key(113, 1));
  bool pass = true;
  std::ostringstream detail;
  int done = 0;
  while (done < 20) {
    ProblemConstants c;
    c.l0 = 0.5 + 1.5 * rng.uniform01();
    c.q = std::max(c.l0 * c.l0, 0.5 + 3.5 * rng.uniform01());
    c.delta = 0.5 + 3.5 * rng.uniform01();
    c.dim = 1 + static_cast<int>(rng.uniform_index(16));  // sqrt(d) in [1,4]
    const double eps2 = c.l0 * (0.5 + 0.4 * rng.uniform01());
    const double eps1 = 0.3 + 1.2 * rng.uniform01();
    const OptimalPlan plan = optimal_plan(eps1, eps2, c);
    if (plan.k_total > 20000) continue;  // keep the scan affordable
    ++done;
    if (!(plan.beta > 0.0 && plan.beta < 1.0)) {
      pass = false;
      detail << "beta* out of range; ";
      continue;
    }
    const double lhs1 = c.sqrt_d() * std::pow(
                            static_cast<double>(plan.k_total), -plan.beta);
    if (lhs1 > eps1 * (1.0 + 1e-9) ||
        bound_rhs(plan.k_total, plan.beta, c) > eps2 * (1.0 + 1e-9)) {
      pass = false;
      detail << "constraints violated at K*; ";
    }
    for (std::int64_t kk = 2; kk < plan.k_total; ++kk) {
      if (k_feasible(kk, eps1, eps2, c)) {
        pass = false;
        detail << "K=" << kk << " < K*=" << plan.k_total << " feasible; ";
        break;
      }
    }
  }
  report(7, "plan minimality", pass, detail.str());
}

// ---- 8: high-probability plan arithmetic ---------------------------------
void criterion_high_prob_arithmetic() {
  ProblemConstants c;  // Q = 1
  const HighProbPlan hp = high_prob_plan(0.1, 0.5, 0.1, c, 0.5, 2.0);
  auto sig4 = [](double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
  };
  const bool pass =
      hp.runs == 3 && hp.psi == 80.0 && hp.validation_samples == 3840 &&
      sig4(hp.eps2_inner) == "0.1072" &&
      hp.eps2_inner >=
          (0.5 / 2.0) * std::sqrt((1.0 - 0.5) / std::exp(1.0)) - 1e-12;
  std::ostringstream detail;
  detail << "runs=" << hp.runs << " psi=" << hp.psi
         << " T=" << hp.validation_samples << " eps2'=" << hp.eps2_inner;
  report(8, "high-prob arithmetic", pass, detail.str());
}

// ---- 9: min-norm equals exhaustive grid ----------------------------------
double grid_min_norm_sq(const std::vector<Eigen::VectorXd>& vs, int steps) {
  const std::size_t n = vs.size();
  if (n == 1) return vs[0].squaredNorm();
  double best = 1e300;
  const double inv = 1.0 / steps;
  if (n == 2) {
    const Eigen::VectorXd u = (vs[0] - vs[1]) * inv;
    const double b2 = vs[1].squaredNorm(), bu = vs[1].dot(u),
                 u2 = u.squaredNorm();
    for (int i = 0; i <= steps; ++i)
      best = std::min(best, b2 + 2.0 * i * bu + double(i) * i * u2);
    return best;
  }
  if (n == 3) {
    const Eigen::VectorXd u = (vs[1] - vs[2]) * inv;
    for (int i = 0; i <= steps; ++i) {
      const Eigen::VectorXd b =
          i * inv * vs[0] + (1.0 - i * inv) * vs[2];
      const double b2 = b.squaredNorm(), bu = b.dot(u), u2 = u.squaredNorm();
      for (int j = 0; i + j <= steps; ++j)
        best = std::min(best, b2 + 2.0 * j * bu + double(j) * j * u2);
    }
    return best;
  }
  // n == 4: innermost axis handled in closed increments.
  const Eigen::VectorXd u = (vs[2] - vs[3]) * inv;
  const double u2 = u.squaredNorm();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const Eigen::VectorXd b = i * inv * vs[0] + j * inv * vs[1] +
                                (1.0 - (i + j) * inv) * vs[3];
      const double b2 = b.squaredNorm(), bu = b.dot(u);
      const int kmax = steps - i - j;
      for (int k = 0; k <= kmax; ++k)
        best = std::min(best, b2 + 2.0 * k * bu + double(k) * k * u2);
    }
  }
  return best;
}

void criterion_min_norm_grid() {
  RngStream rng(derive_key(127, 1));
  bool pass = true;
  std::ostringstream detail;
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform_index(4));
    const int d = 1 + static_cast<int>(rng.uniform_index(3));
    std::vector<Eigen::VectorXd> vs;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd v(d);
      for (int j = 0; j < d; ++j) v[j] = 2.0 * rng.uniform01() - 1.0;
      vs.push_back(v);
    }
    const MinNormResult r = min_norm_point(vs, 1e-10);
    const double grid = std::sqrt(grid_min_norm_sq(vs, 1000));
    if (std::abs(r.norm - grid) > 2e-3) {
      pass = false;
      detail << "instance " << t << ": solver " << r.norm << " grid "
             << grid << "; ";
    }
  }
  report(9, "min-norm vs grid", pass, detail.str());
}

// ---- 10 & 11: desk-scale comparison through the CLI ----------------------
std::string run_comparison(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ostringstream cmd;
  cmd << PISGD_CLI_PATH
      << " run --objective nn --algorithm both --k 2000 --batch 45"
         " --eta 0.01 --sigma-from-eta --repeats 5 --seed 99"
         " --trace-stride 100 --hidden 9 --classes 3"
         " --blob-count 2000 --blob-dim 20 --blob-radius 1 --blob-noise 0.3"
         " --out "
      << out_dir << " > " << out_dir << "/stdout.txt 2>&1";
  if (std::system(cmd.str().c_str()) != 0) return "cli exit nonzero";
  return "";
}

void criterion_comparison_and_determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir_a = "acceptance_run_a";
  const std::string dir_b = "acceptance_run_b";
  std::string err = run_comparison(dir_a);
  bool pass10 = err.empty();
  std::ostringstream detail;
  double pisgd_final = 0.0, sgd_final = 0.0, initial = 0.0;
  if (pass10) {
    std::ifstream in(dir_a + "/summary.json");
    nlohmann::json summary;
    in >> summary;
    initial = summary["initial_loss"].get<double>();
    pisgd_final =
        summary["algorithms"]["pisgd"]["mean_final_loss"].get<double>();
    sgd_final =
        summary["algorithms"]["sgd"]["mean_final_loss"].get<double>();
    const double ratio = std::max(pisgd_final / sgd_final,
                                  sgd_final / pisgd_final);
    pass10 = pisgd_final <= 0.5 * initial && sgd_final <= 0.5 * initial &&
             ratio <= 2.0;
    detail << "initial " << initial << ", pisgd " << pisgd_final << ", sgd "
           << sgd_final;
  } else {
    detail << err;
  }
  const double secs = elapsed(t0);
  if (secs >= 300.0) {
    pass10 = false;
    detail << "; runtime " << secs << "s";
  }
  report(10, "desk-scale comparison", pass10, detail.str());

  err = run_comparison(dir_b);
  bool pass11 = err.empty();
  std::ostringstream d11;
  if (pass11) {
    for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
      if (entry.path().extension() != ".csv") continue;
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(dir_b + "/" + entry.path().filename().string(),
                       std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      if (!fb || sa.str() != sb.str()) {
        pass11 = false;
        d11 << entry.path().filename().string() << " differs; ";
      }
    }
  } else {
    d11 << err;
  }
  report(11, "byte-identical reruns", pass11, d11.str());
}

}  // namespace

int main() {
  criterion_ball_moments();
  criterion_ratio_bound();
  criterion_variance_scaling();
  criterion_backprop();
  criterion_sample_lipschitz();
  criterion_expectation_bound();
  criterion_plan_minimality();
  criterion_high_prob_arithmetic();
  criterion_min_norm_grid();
  criterion_comparison_and_determinism();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
