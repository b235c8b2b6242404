#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "pisgd/objective.hpp"

namespace pisgd {

// One-hidden-layer network: ReLU-m hidden activations, hard-tanh-wrapped
// output weights, softmax output with cross-entropy loss.
struct NetworkSpec {
  Eigen::Index n1 = 1;  // input
  Eigen::Index n2 = 1;  // hidden
  Eigen::Index n3 = 2;  // output classes
  double relu_cap = 1.0;  // m

  Eigen::Index param_dim() const { return n2 * (n1 + 1) + n3 * (n2 + 1); }
  void validate() const;
};

// Decision variables [W, b]. Flattening order: layer 2 then layer 3, each
// weight row immediately followed by its bias.
struct NetworkParams {
  Eigen::MatrixXd w2;  // n2 x n1
  Eigen::VectorXd b2;  // n2
  Eigen::MatrixXd w3;  // n3 x n2
  Eigen::VectorXd b3;  // n3

  static NetworkParams zero(const NetworkSpec& spec);
  // Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
  static NetworkParams random_init(const NetworkSpec& spec,
                                   std::uint64_t seed);
  static NetworkParams unflatten(const NetworkSpec& spec,
                                 const Eigen::VectorXd& w);
  Eigen::VectorXd flatten() const;
};

struct LabeledSample {
  Eigen::VectorXd features;  // length n1
  Eigen::VectorXd label;     // one-hot, length n3
};

struct ForwardResult {
  double loss = 0.0;
  Eigen::VectorXd z2;      // hidden pre-activation
  Eigen::VectorXd alpha2;  // ReLU-m output
  Eigen::VectorXd z3;      // logits
  Eigen::VectorXd alpha3;  // softmax output
};

// Forward pass with log-sum-exp-stabilized softmax; loss = -sum y log a3.
ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params,
                      const LabeledSample& sample);

// Analytic gradient of the per-sample loss at the given point, flattened in
// NetworkParams order. Indicators use closed intervals; exact boundary hits
// are counted into *boundary_hits when supplied.
Eigen::VectorXd loss_gradient(const NetworkSpec& spec,
                              const NetworkParams& params,
                              const LabeledSample& sample,
                              std::atomic<std::int64_t>* boundary_hits = nullptr);

// Gradient at the perturbed iterate params + z (the PISGD evaluation point).
Eigen::VectorXd backprop_grad(const NetworkSpec& spec,
                              const NetworkParams& params,
                              const Eigen::VectorXd& perturbation,
                              const LabeledSample& sample);

// Per-sample Lipschitz constant
// L_i = 2 max(sqrt(n2 n3) ||[v^T, 1]||, sqrt(n2 m^2 + 1)).
double sample_lipschitz(const NetworkSpec& spec,
                        const Eigen::VectorXd& features);

// Finite-sum training objective over the dataset with C(xi_i) = L_i.
class NnObjective final : public StochasticObjective {
 public:
  NnObjective(NetworkSpec spec, std::vector<LabeledSample> dataset);

  Eigen::Index dim() const override { return spec_.param_dim(); }
  Sample draw_sample(RngStream& rng) const override;
  double value(const Eigen::VectorXd& w, const Sample& xi) const override;
  Eigen::VectorXd approx_grad(const Eigen::VectorXd& w,
                              const Sample& xi) const override;
  double lipschitz_of(const Sample& xi) const override;
  double full_value(const Eigen::VectorXd& w) const override;

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<LabeledSample>& dataset() const { return dataset_; }
  std::int64_t boundary_hits() const { return boundary_hits_.load(); }

 private:
  NetworkSpec spec_;
  std::vector<LabeledSample> dataset_;
  std::vector<double> lipschitz_;
  mutable std::atomic<std::int64_t> boundary_hits_{0};
};

std::shared_ptr<const NnObjective> build_nn_objective(
    const NetworkSpec& spec, std::vector<LabeledSample> dataset);

struct PcaResult {
  Eigen::MatrixXd projection;  // p x p', orthonormal columns
  Eigen::MatrixXd reduced;     // n x p'
  Eigen::VectorXd mean;        // column means used for centering
  bool degenerate = false;     // zero-variance input
};

// Mean-centering PCA keeping the smallest leading-eigenvector count whose
// eigenvalue mass reaches the requested explained-variance fraction.
PcaResult pca_reduce(const Eigen::MatrixXd& data, double explained);

// CSV rows "label,f1,f2,..." with integer labels in [0, num_classes).
std::vector<LabeledSample> load_dataset(const std::string& path,
                                        Eigen::Index num_classes);

struct BlobConfig {
  Eigen::Index count = 1000;
  Eigen::Index dim = 20;
  Eigen::Index classes = 3;
  double center_radius = 1.0;  // class means drawn on this sphere
  double noise = 0.3;          // per-coordinate Gaussian noise
  std::uint64_t seed = 0;
};

// Synthetic Gaussian-blob classification data, the desk-scale stand-in for
// the image dataset.
std::vector<LabeledSample> make_blobs(const BlobConfig& cfg);

void save_dataset_csv(const std::vector<LabeledSample>& data,
                      const std::string& path);

}  // namespace pisgd
