#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <json.hpp>
#include <sstream>
#include <string>

#include "pisgd/experiment.hpp"
#include "pisgd/planner.hpp"
#include "pisgd/stationarity.hpp"

namespace {

using pisgd::ProblemConstants;

// key = value lines, '#' comments; sections like [planner] are ignored so
// the same file can hold run and plan settings.
std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (!key.empty() && key.front() != '[') kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

ProblemConstants read_constants(const std::string& path) {
  const auto kv = read_kv_file(path);
  ProblemConstants c;
  auto need = [&kv, &path](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error("constants file " + path +
                               ": missing field '" + key + "'");
    return it->second;
  };
  c.l0 = std::stod(need("l0"));
  c.q = std::stod(need("q"));
  c.delta = std::stod(need("delta"));
  c.dim = std::stoi(need("dim"));
  if (kv.count("theta")) c.theta = std::stod(kv.at("theta"));
  c.validate();
  return c;
}

Eigen::VectorXd load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size())
        throw std::runtime_error("checkpoint " + path +
                                 ": parse error at line " +
                                 std::to_string(line_no));
      values.push_back(v);
    }
  }
  if (values.empty())
    throw std::runtime_error("checkpoint " + path + ": no values");
  return Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbed-iterate SGD experiment harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file");

  // --- run -----------------------------------------------------------
  pisgd::ExperimentConfig cfg;
  double run_beta = -1.0;
  std::int64_t run_batch = 0;
  double run_sigma = -1.0, run_eta = -1.0;
  auto* run = app.add_subcommand("run", "run a PISGD/SGD experiment");
  run->add_option("--objective", cfg.objective, "nn or abs");
  run->add_option("--dataset", cfg.dataset_path, "labeled CSV (label,f1,...)");
  run->add_option("--algorithm", cfg.algorithm, "pisgd, sgd or both");
  run->add_option("--k", cfg.k_total, "iteration budget K");
  run->add_option("--theta", cfg.theta, "schedule scale theta");
  run->add_option("--beta", run_beta, "derive (S, sigma, eta) from beta");
  run->add_option("--batch", run_batch, "explicit mini-batch size S");
  run->add_option("--sigma", run_sigma, "explicit perturbation radius");
  run->add_flag("--sigma-from-eta", cfg.sigma_from_eta,
                "sigma = eta * L0 * sqrt(d)");
  run->add_option("--eta", run_eta, "explicit step size");
  run->add_option("--repeats", cfg.repeats, "independent repeats");
  run->add_option("--seed", cfg.seed, "root seed");
  run->add_option("--trace-stride", cfg.trace_stride, "trace every s-th step");
  run->add_option("--out", cfg.output_dir, "output directory");
  run->add_option("--hidden", cfg.net.n2, "hidden width");
  run->add_option("--classes", cfg.net.n3, "class count");
  run->add_option("--relu-cap", cfg.net.relu_cap, "hidden activation cap m");
  run->add_option("--blob-count", cfg.blobs.count, "synthetic sample count");
  run->add_option("--blob-dim", cfg.blobs.dim, "synthetic feature dim");
  run->add_option("--blob-radius", cfg.blobs.center_radius,
                  "class-center radius");
  run->add_option("--blob-noise", cfg.blobs.noise, "per-coordinate noise");

  // --- plan ----------------------------------------------------------
  double eps1 = 0.0, eps2 = 0.0, gamma = -1.0, plan_c = 0.5, plan_phi = 2.0;
  std::string constants_path;
  bool as_json = false;
  auto* plan = app.add_subcommand("plan", "print (K*, beta*, S, sigma, eta)");
  plan->add_option("--eps1", eps1, "subdifferential radius")->required();
  plan->add_option("--eps2", eps2, "stationarity tolerance")->required();
  plan->add_option("--gamma", gamma, "failure probability (high-prob plan)");
  plan->add_option("--c", plan_c, "high-prob free constant c");
  plan->add_option("--phi", plan_phi, "high-prob free constant phi");
  plan->add_option("--constants", constants_path,
                   "key = value file with l0, q, delta, dim")
      ->required();
  plan->add_flag("--json", as_json, "machine-readable output");

  // --- audit ---------------------------------------------------------
  std::string checkpoint_path, audit_objective = "abs", audit_dataset;
  double audit_sigma = 1.0;
  std::int64_t audit_samples = 1000;
  std::uint64_t audit_seed = 0;
  pisgd::NetworkSpec audit_net;
  auto* audit = app.add_subcommand(
      "audit", "averaged-gradient stationarity certificate at a checkpoint");
  audit->add_option("--checkpoint", checkpoint_path, "flattened vector CSV")
      ->required();
  audit->add_option("--objective", audit_objective, "abs, max or nn");
  audit->add_option("--dataset", audit_dataset, "dataset for nn audits");
  audit->add_option("--hidden", audit_net.n2, "hidden width");
  audit->add_option("--classes", audit_net.n3, "class count");
  audit->add_option("--relu-cap", audit_net.relu_cap, "activation cap m");
  audit->add_option("--sigma", audit_sigma, "certificate radius");
  audit->add_option("--samples", audit_samples, "T");
  audit->add_option("--seed", audit_seed, "certificate seed");

  // --- gen-data ------------------------------------------------------
  pisgd::BlobConfig blobs;
  std::string gen_out = "dataset.csv";
  auto* gen = app.add_subcommand("gen-data", "emit synthetic blob dataset");
  gen->add_option("--count", blobs.count, "sample count");
  gen->add_option("--dim", blobs.dim, "feature dimension");
  gen->add_option("--classes", blobs.classes, "class count");
  gen->add_option("--radius", blobs.center_radius, "class-center radius");
  gen->add_option("--noise", blobs.noise, "per-coordinate noise");
  gen->add_option("--seed", blobs.seed, "seed");
  gen->add_option("--out", gen_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.has_beta = run_beta >= 0.0;
      cfg.beta = run_beta;
      cfg.has_explicit = run_batch > 0 || run_eta >= 0.0 || run_sigma >= 0.0 ||
                         cfg.sigma_from_eta;
      if (cfg.has_explicit) {
        cfg.batch = run_batch;
        cfg.sigma = run_sigma < 0.0 ? 0.0 : run_sigma;
        cfg.eta = run_eta;
      }
      const auto res = pisgd::run_experiment(cfg);
      std::printf("initial loss %.6g; schedule S=%lld sigma=%.6g eta=%.6g\n",
                  res.initial_loss,
                  static_cast<long long>(res.schedule.batch),
                  res.schedule.sigma, res.schedule.eta);
      for (const auto& alg : res.algorithms)
        std::printf("%s mean final loss %.6g over %zu repeats\n",
                    alg.name.c_str(), alg.mean_final_loss,
                    alg.final_losses.size());
      std::printf("wrote %zu files under %s\n", res.files.size(),
                  cfg.output_dir.c_str());
    } else if (plan->parsed()) {
      const ProblemConstants consts = read_constants(constants_path);
      const auto optimal = pisgd::optimal_plan(eps1, eps2, consts);
      const auto sched =
          pisgd::theorem_schedule(optimal.k_total, optimal.beta, consts);
      nlohmann::json out = {{"k_total", optimal.k_total},
                            {"beta", optimal.beta},
                            {"batch", sched.batch},
                            {"sigma", sched.sigma},
                            {"eta", sched.eta}};
      if (gamma > 0.0) {
        const auto hp =
            pisgd::high_prob_plan(eps1, eps2, gamma, consts, plan_c, plan_phi);
        out["high_prob"] = {{"runs", hp.runs},
                            {"validation_samples", hp.validation_samples},
                            {"psi", hp.psi},
                            {"eps2_inner", hp.eps2_inner},
                            {"c", hp.c},
                            {"phi", hp.phi}};
      }
      if (as_json) {
        std::cout << out.dump(2) << '\n';
      } else {
        std::printf("K* = %lld, beta* = %.6g\n",
                    static_cast<long long>(optimal.k_total), optimal.beta);
        std::printf("S = %lld, sigma = %.6g, eta = %.6g\n",
                    static_cast<long long>(sched.batch), sched.sigma,
                    sched.eta);
        if (gamma > 0.0) {
          const auto& hp = out["high_prob"];
          std::printf(
              "high-prob: runs = %lld, validation samples = %lld, psi = "
              "%.6g, inner eps2 = %.6g\n",
              hp["runs"].get<long long>(),
              hp["validation_samples"].get<long long>(),
              hp["psi"].get<double>(), hp["eps2_inner"].get<double>());
        }
      }
    } else if (audit->parsed()) {
      const Eigen::VectorXd x = load_checkpoint(checkpoint_path);
      pisgd::ObjectivePtr obj;
      bool deterministic = true;
      if (audit_objective == "abs") {
        obj = pisgd::abs_value_objective();
      } else if (audit_objective == "nn") {
        if (audit_dataset.empty())
          throw std::runtime_error("audit: nn objective needs --dataset");
        auto data = pisgd::load_dataset(audit_dataset, audit_net.n3);
        audit_net.n1 = data.front().features.size();
        obj = pisgd::build_nn_objective(audit_net, std::move(data));
        deterministic = false;
      } else {
        throw std::runtime_error("audit: unknown objective " +
                                 audit_objective);
      }
      if (x.size() != obj->dim())
        throw std::runtime_error(
            "audit: checkpoint dim " + std::to_string(x.size()) +
            " does not match objective dim " + std::to_string(obj->dim()));
      const auto est = pisgd::averaged_gradient(*obj, x, audit_sigma,
                                                audit_samples, audit_seed);
      std::printf("averaged-gradient norm %.10g over %lld samples, radius "
                  "%.6g\n",
                  est.norm, static_cast<long long>(est.samples_used),
                  est.radius);
      if (deterministic) {
        const auto& o = *obj;
        const double hull = pisgd::goldstein_upper_bound(
            [&o](const Eigen::VectorXd& w) {
              return o.approx_grad(w, pisgd::Sample{});
            },
            x, audit_sigma, audit_samples, audit_seed, 1e-10);
        std::printf("hull diagnostic: min-norm point of sampled gradients "
                    "%.10g\n",
                    hull);
      }
    } else if (gen->parsed()) {
      const auto data = pisgd::make_blobs(blobs);
      pisgd::save_dataset_csv(data, gen_out);
      std::printf("wrote %zu samples to %s\n", data.size(), gen_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
