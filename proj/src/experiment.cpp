#include "pisgd/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <json.hpp>
#include <stdexcept>

namespace pisgd {

namespace {

constexpr const char* kTraceSchema = "# trace-csv v1";

// Shortest round-trip decimal form; keeps CSVs byte-stable across runs.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path, const RunRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << kTraceSchema << "\niteration,loss,grad_norm\n";
  for (std::size_t i = 0; i < rec.trace_iteration.size(); ++i)
    out << rec.trace_iteration[i] << ',' << fmt(rec.loss_trace[i]) << ','
        << fmt(rec.grad_norm_trace[i]) << '\n';
}

void write_mean_csv(const std::string& path,
                    const std::vector<RunRecord>& recs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << kTraceSchema << "\niteration,loss\n";
  const auto& its = recs.front().trace_iteration;
  for (std::size_t i = 0; i < its.size(); ++i) {
    double sum = 0.0;
    for (const auto& r : recs) sum += r.loss_trace[i];
    out << its[i] << ',' << fmt(sum / static_cast<double>(recs.size()))
        << '\n';
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (objective != "nn" && objective != "abs")
    throw std::invalid_argument("experiment: objective must be nn or abs");
  if (algorithm != "pisgd" && algorithm != "sgd" && algorithm != "both")
    throw std::invalid_argument(
        "experiment: algorithm must be pisgd, sgd or both");
  if (k_total < 1)
    throw std::invalid_argument("experiment: k_total must be >= 1");
  if (repeats < 1)
    throw std::invalid_argument("experiment: repeats must be >= 1");
  if (trace_stride < 1)
    throw std::invalid_argument("experiment: trace_stride must be >= 1");
  if (has_beta == has_explicit)
    throw std::invalid_argument(
        "experiment: exactly one of beta or (batch, sigma, eta) required");
  if (has_beta && !(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("experiment: beta must lie in (0, 1)");
  if (has_explicit) {
    if (batch < 1) throw std::invalid_argument("experiment: batch must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("experiment: eta must be > 0");
    if (!sigma_from_eta && sigma < 0.0)
      throw std::invalid_argument("experiment: sigma must be >= 0");
  }
  if (output_dir.empty())
    throw std::invalid_argument("experiment: output_dir must be set");
}

ObjectivePtr build_experiment_objective(const ExperimentConfig& cfg) {
  if (cfg.objective == "abs") return abs_value_objective();
  std::vector<LabeledSample> data =
      cfg.dataset_path.empty() ? make_blobs(cfg.blobs)
                               : load_dataset(cfg.dataset_path, cfg.net.n3);
  NetworkSpec spec = cfg.net;
  spec.n1 = data.front().features.size();
  return build_nn_objective(spec, std::move(data));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const ObjectivePtr obj = build_experiment_objective(cfg);

  Eigen::VectorXd x1;
  if (cfg.objective == "nn") {
    const auto& nn = dynamic_cast<const NnObjective&>(*obj);
    x1 = NetworkParams::random_init(nn.spec(), derive_key(cfg.seed, 42))
             .flatten();
  } else {
    x1 = Eigen::VectorXd::Constant(obj->dim(), 1.0);
  }

  ExperimentResult res;
  res.initial_loss = obj->full_value(x1);

  Schedule sched;
  if (cfg.has_beta) {
    ProblemConstants consts;
    consts.l0 = obj->l0();
    consts.q = obj->q();
    consts.delta = obj->optimum_gap_bound(x1);
    consts.dim = static_cast<int>(obj->dim());
    consts.theta = cfg.theta;
    sched = theorem_schedule(cfg.k_total, cfg.beta, consts);
  } else {
    sched.batch = cfg.batch;
    sched.eta = cfg.eta;
    sched.sigma = cfg.sigma_from_eta
                      ? cfg.eta * obj->l0() *
                            std::sqrt(static_cast<double>(obj->dim()))
                      : cfg.sigma;
  }
  res.schedule = sched;

  std::vector<std::string> algorithms;
  if (cfg.algorithm == "both")
    algorithms = {"pisgd", "sgd"};
  else
    algorithms = {cfg.algorithm};

  nlohmann::json summary;
  summary["config"] = {
      {"objective", cfg.objective},
      {"dataset_path", cfg.dataset_path},
      {"algorithm", cfg.algorithm},
      {"k_total", cfg.k_total},
      {"theta", cfg.theta},
      {"beta", cfg.has_beta ? nlohmann::json(cfg.beta) : nlohmann::json()},
      {"repeats", cfg.repeats},
      {"seed", cfg.seed},
      {"trace_stride", cfg.trace_stride},
      {"net", {{"n1", obj->dim() == 1 ? 1 : cfg.net.n1},
               {"n2", cfg.net.n2},
               {"n3", cfg.net.n3},
               {"relu_cap", cfg.net.relu_cap}}},
  };
  summary["schedule"] = {{"batch", sched.batch},
                         {"sigma", sched.sigma},
                         {"eta", sched.eta}};
  summary["constants"] = {{"l0", obj->l0()}, {"q", obj->q()},
                          {"dim", obj->dim()}};
  summary["initial_loss"] = res.initial_loss;

  for (const auto& alg : algorithms) {
    PisgdConfig run_cfg;
    run_cfg.k_total = cfg.k_total;
    run_cfg.batch = sched.batch;
    run_cfg.step = sched.eta;
    run_cfg.radius = alg == "pisgd" ? sched.sigma : 0.0;
    run_cfg.record_trace = true;
    run_cfg.trace_stride = cfg.trace_stride;

    std::vector<std::future<RunRecord>> futures;
    futures.reserve(static_cast<std::size_t>(cfg.repeats));
    for (std::int64_t r = 0; r < cfg.repeats; ++r) {
      run_cfg.seed = derive_key(cfg.seed, 41, static_cast<std::uint64_t>(r));
      const bool perturbed = alg == "pisgd";
      futures.push_back(
          std::async(std::launch::async, [&obj, &x1, run_cfg, perturbed] {
            return perturbed ? pisgd_run(*obj, x1, run_cfg)
                             : sgd_run(*obj, x1, run_cfg);
          }));
    }
    std::vector<RunRecord> recs;
    for (auto& f : futures) recs.push_back(f.get());

    AlgorithmSummary as;
    as.name = alg;
    nlohmann::json runs = nlohmann::json::array();
    for (std::int64_t r = 0; r < cfg.repeats; ++r) {
      const RunRecord& rec = recs[static_cast<std::size_t>(r)];
      const std::string path = cfg.output_dir + "/" + alg + "_repeat" +
                               std::to_string(r) + ".csv";
      write_trace_csv(path, rec);
      res.files.push_back(path);

      as.final_losses.push_back(rec.loss_trace.back());
      as.gradient_calls.push_back(rec.gradient_calls);
      as.stop_indices.push_back(rec.stop_index);
      runs.push_back({{"repeat", r},
                      {"final_loss", rec.loss_trace.back()},
                      {"gradient_calls", rec.gradient_calls},
                      {"stop_index", rec.stop_index}});
    }
    const std::string mean_path = cfg.output_dir + "/" + alg + "_mean.csv";
    write_mean_csv(mean_path, recs);
    res.files.push_back(mean_path);

    double sum = 0.0;
    for (double v : as.final_losses) sum += v;
    as.mean_final_loss = sum / static_cast<double>(cfg.repeats);
    summary["algorithms"][alg] = {{"runs", runs},
                                  {"mean_final_loss", as.mean_final_loss}};
    res.algorithms.push_back(std::move(as));
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  summary["wall_seconds"] = res.wall_seconds;

  const std::string summary_path = cfg.output_dir + "/summary.json";
  std::ofstream out(summary_path);
  if (!out) throw std::runtime_error("cannot open " + summary_path);
  out << summary.dump(2) << '\n';
  res.files.push_back(summary_path);
  return res;
}

}  // namespace pisgd
