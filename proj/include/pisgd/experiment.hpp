#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pisgd/nn.hpp"
#include "pisgd/planner.hpp"

namespace pisgd {

// Full description of one PISGD-vs-SGD comparison run. Exactly one of
// beta (schedule derived from the problem constants) or the explicit
// (batch, sigma, eta) triple must be supplied.
struct ExperimentConfig {
  std::string objective = "nn";  // "nn" or "abs"
  std::string dataset_path;      // empty -> synthetic blobs
  NetworkSpec net;
  BlobConfig blobs;

  std::string algorithm = "both";  // "pisgd", "sgd" or "both"
  std::int64_t k_total = 1000;
  double theta = 1.0;

  bool has_beta = false;
  double beta = 0.5;

  bool has_explicit = false;
  std::int64_t batch = 1;
  double sigma = 0.0;
  double eta = 0.0;
  bool sigma_from_eta = false;  // sigma = eta * L0 * sqrt(d)

  std::int64_t repeats = 5;
  std::uint64_t seed = 0;
  std::int64_t trace_stride = 1;
  std::string output_dir = ".";

  void validate() const;  // throws with the offending field name
};

struct AlgorithmSummary {
  std::string name;
  std::vector<double> final_losses;            // per repeat
  std::vector<std::int64_t> gradient_calls;    // (R - 1) * S per repeat
  std::vector<std::int64_t> stop_indices;
  double mean_final_loss = 0.0;
};

struct ExperimentResult {
  double initial_loss = 0.0;
  Schedule schedule;  // the (S, sigma, eta) actually used
  std::vector<AlgorithmSummary> algorithms;
  double wall_seconds = 0.0;
  std::vector<std::string> files;  // everything written, summary last
};

// Runs the configured experiment: repeats execute concurrently, traces land
// in <output_dir>/<algorithm>_repeat<i>.csv plus an averaged
// <algorithm>_mean.csv, and summary.json echoes the config, the derived
// schedule and per-run accounting. Identical config => byte-identical files.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Objective described by the config (shared by run_experiment and audits).
ObjectivePtr build_experiment_objective(const ExperimentConfig& cfg);

}  // namespace pisgd
