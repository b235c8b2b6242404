#include "pisgd/nn.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pisgd {

namespace {

double hard_tanh(double t) { return std::min(std::max(t, -1.0), 1.0); }

double relu_m(double t, double m) { return std::min(std::max(t, 0.0), m); }

}  // namespace

void NetworkSpec::validate() const {
  if (n1 < 1 || n2 < 1 || n3 < 1)
    throw std::invalid_argument("network: all layer sizes must be >= 1");
  if (!(relu_cap > 0.0))
    throw std::invalid_argument("network: relu cap m must be > 0");
}

NetworkParams NetworkParams::zero(const NetworkSpec& spec) {
  spec.validate();
  NetworkParams p;
  p.w2 = Eigen::MatrixXd::Zero(spec.n2, spec.n1);
  p.b2 = Eigen::VectorXd::Zero(spec.n2);
  p.w3 = Eigen::MatrixXd::Zero(spec.n3, spec.n2);
  p.b3 = Eigen::VectorXd::Zero(spec.n3);
  return p;
}

NetworkParams NetworkParams::random_init(const NetworkSpec& spec,
                                         std::uint64_t seed) {
  NetworkParams p = zero(spec);
  RngStream rng(derive_key(seed, 21));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(spec.n1));
  const double s3 = 1.0 / std::sqrt(static_cast<double>(spec.n2));
  for (Eigen::Index j = 0; j < spec.n2; ++j) {
    for (Eigen::Index k = 0; k < spec.n1; ++k)
      p.w2(j, k) = s2 * (2.0 * rng.uniform01() - 1.0);
    p.b2[j] = s2 * (2.0 * rng.uniform01() - 1.0);
  }
  for (Eigen::Index j = 0; j < spec.n3; ++j) {
    for (Eigen::Index k = 0; k < spec.n2; ++k)
      p.w3(j, k) = s3 * (2.0 * rng.uniform01() - 1.0);
    p.b3[j] = s3 * (2.0 * rng.uniform01() - 1.0);
  }
  return p;
}

Eigen::VectorXd NetworkParams::flatten() const {
  const Eigen::Index n1 = w2.cols(), n2 = w2.rows(), n3 = w3.rows();
  Eigen::VectorXd out(n2 * (n1 + 1) + n3 * (n2 + 1));
  Eigen::Index at = 0;
  for (Eigen::Index j = 0; j < n2; ++j) {
    out.segment(at, n1) = w2.row(j).transpose();
    at += n1;
    out[at++] = b2[j];
  }
  for (Eigen::Index j = 0; j < n3; ++j) {
    out.segment(at, n2) = w3.row(j).transpose();
    at += n2;
    out[at++] = b3[j];
  }
  return out;
}

NetworkParams NetworkParams::unflatten(const NetworkSpec& spec,
                                       const Eigen::VectorXd& w) {
  if (w.size() != spec.param_dim())
    throw std::invalid_argument("unflatten: dimension mismatch");
  NetworkParams p = zero(spec);
  Eigen::Index at = 0;
  for (Eigen::Index j = 0; j < spec.n2; ++j) {
    p.w2.row(j) = w.segment(at, spec.n1).transpose();
    at += spec.n1;
    p.b2[j] = w[at++];
  }
  for (Eigen::Index j = 0; j < spec.n3; ++j) {
    p.w3.row(j) = w.segment(at, spec.n2).transpose();
    at += spec.n2;
    p.b3[j] = w[at++];
  }
  return p;
}

ForwardResult forward(const NetworkSpec& spec, const NetworkParams& params,
                      const LabeledSample& sample) {
  ForwardResult res;
  res.z2 = params.w2 * sample.features + params.b2;
  res.alpha2 = res.z2.unaryExpr(
      [m = spec.relu_cap](double t) { return relu_m(t, m); });
  res.z3 =
      params.w3.unaryExpr([](double t) { return hard_tanh(t); }) * res.alpha2 +
      params.b3;
  const double zmax = res.z3.maxCoeff();
  const Eigen::VectorXd shifted = (res.z3.array() - zmax).exp();
  const double denom = shifted.sum();
  res.alpha3 = shifted / denom;
  // -sum y log a3, written against the stabilized logits directly.
  const double log_denom = std::log(denom);
  res.loss = 0.0;
  for (Eigen::Index j = 0; j < spec.n3; ++j) {
    if (sample.label[j] != 0.0)
      res.loss -= sample.label[j] * (res.z3[j] - zmax - log_denom);
  }
  return res;
}

Eigen::VectorXd loss_gradient(const NetworkSpec& spec,
                              const NetworkParams& params,
                              const LabeledSample& sample,
                              std::atomic<std::int64_t>* boundary_hits) {
  const ForwardResult fwd = forward(spec, params, sample);
  const Eigen::VectorXd delta3 = fwd.alpha3 - sample.label;  // dL/dz3

  NetworkParams grad = NetworkParams::zero(spec);
  grad.b3 = delta3;
  for (Eigen::Index j = 0; j < spec.n3; ++j) {
    for (Eigen::Index k = 0; k < spec.n2; ++k) {
      const double t = params.w3(j, k);
      if (boundary_hits && (t == 1.0 || t == -1.0))
        boundary_hits->fetch_add(1, std::memory_order_relaxed);
      const double ind = (t >= -1.0 && t <= 1.0) ? 1.0 : 0.0;
      grad.w3(j, k) = delta3[j] * fwd.alpha2[k] * ind;
    }
  }
  const Eigen::VectorXd back =
      params.w3.unaryExpr([](double t) { return hard_tanh(t); })
          .transpose() *
      delta3;  // sum_h delta3_h H_hj
  for (Eigen::Index j = 0; j < spec.n2; ++j) {
    const double t = fwd.z2[j];
    if (boundary_hits && (t == 0.0 || t == spec.relu_cap))
      boundary_hits->fetch_add(1, std::memory_order_relaxed);
    const double ind = (t >= 0.0 && t <= spec.relu_cap) ? 1.0 : 0.0;
    const double delta2 = back[j] * ind;
    grad.b2[j] = delta2;
    grad.w2.row(j) = delta2 * sample.features.transpose();
  }
  return grad.flatten();
}

Eigen::VectorXd backprop_grad(const NetworkSpec& spec,
                              const NetworkParams& params,
                              const Eigen::VectorXd& perturbation,
                              const LabeledSample& sample) {
  const NetworkParams at =
      NetworkParams::unflatten(spec, params.flatten() + perturbation);
  return loss_gradient(spec, at, sample);
}

double sample_lipschitz(const NetworkSpec& spec,
                        const Eigen::VectorXd& features) {
  if (features.size() != spec.n1)
    throw std::invalid_argument("sample_lipschitz: feature length mismatch");
  const double v_ext = std::sqrt(features.squaredNorm() + 1.0);
  const double data_branch =
      std::sqrt(static_cast<double>(spec.n2 * spec.n3)) * v_ext;
  const double cap_branch = std::sqrt(
      static_cast<double>(spec.n2) * spec.relu_cap * spec.relu_cap + 1.0);
  return 2.0 * std::max(data_branch, cap_branch);
}

NnObjective::NnObjective(NetworkSpec spec, std::vector<LabeledSample> dataset)
    : spec_(spec), dataset_(std::move(dataset)) {
  spec_.validate();
  if (dataset_.empty()) throw std::invalid_argument("nn objective: empty dataset");
  double sum_l = 0.0, sum_l2 = 0.0;
  lipschitz_.reserve(dataset_.size());
  for (const auto& s : dataset_) {
    if (s.features.size() != spec_.n1 || s.label.size() != spec_.n3)
      throw std::invalid_argument("nn objective: sample dimension mismatch");
    const double li = sample_lipschitz(spec_, s.features);
    lipschitz_.push_back(li);
    sum_l += li;
    sum_l2 += li * li;
  }
  const double n = static_cast<double>(dataset_.size());
  set_moments(sum_l / n, sum_l2 / n);
}

Sample NnObjective::draw_sample(RngStream& rng) const {
  return Sample{static_cast<std::int64_t>(rng.uniform_index(dataset_.size()))};
}

double NnObjective::value(const Eigen::VectorXd& w, const Sample& xi) const {
  const NetworkParams p = NetworkParams::unflatten(spec_, w);
  return forward(spec_, p, dataset_.at(static_cast<std::size_t>(xi.index)))
      .loss;
}

Eigen::VectorXd NnObjective::approx_grad(const Eigen::VectorXd& w,
                                         const Sample& xi) const {
  const NetworkParams p = NetworkParams::unflatten(spec_, w);
  return loss_gradient(spec_, p,
                       dataset_.at(static_cast<std::size_t>(xi.index)),
                       &boundary_hits_);
}

double NnObjective::lipschitz_of(const Sample& xi) const {
  return lipschitz_.at(static_cast<std::size_t>(xi.index));
}

double NnObjective::full_value(const Eigen::VectorXd& w) const {
  const NetworkParams p = NetworkParams::unflatten(spec_, w);
  double sum = 0.0;
  for (const auto& s : dataset_) sum += forward(spec_, p, s).loss;
  return sum / static_cast<double>(dataset_.size());
}

std::shared_ptr<const NnObjective> build_nn_objective(
    const NetworkSpec& spec, std::vector<LabeledSample> dataset) {
  return std::make_shared<NnObjective>(spec, std::move(dataset));
}

PcaResult pca_reduce(const Eigen::MatrixXd& data, double explained) {
  if (data.rows() < 2)
    throw std::invalid_argument("pca_reduce: need at least 2 rows");
  if (!(explained > 0.0 && explained <= 1.0))
    throw std::invalid_argument("pca_reduce: explained must lie in (0, 1]");

  PcaResult res;
  res.mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - res.mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(data.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("pca_reduce: eigendecomposition failed");
  // Eigen returns ascending order; walk from the top.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double total = values.array().max(0.0).sum();
  const Eigen::Index p = data.cols();

  Eigen::Index keep = 0;
  if (total <= 0.0) {
    res.degenerate = true;
    keep = 1;
  } else {
    double mass = 0.0;
    for (Eigen::Index i = p - 1; i >= 0; --i) {
      mass += std::max(values[i], 0.0);
      ++keep;
      if (mass >= explained * total) break;
    }
  }
  res.projection = Eigen::MatrixXd::Zero(p, keep);
  if (!res.degenerate) {
    for (Eigen::Index c = 0; c < keep; ++c)
      res.projection.col(c) = eig.eigenvectors().col(p - 1 - c);
  }
  res.reduced = centered * res.projection;
  return res;
}

std::vector<LabeledSample> load_dataset(const std::string& path,
                                        Eigen::Index num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::vector<LabeledSample> out;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index feature_count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
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
        throw std::runtime_error("load_dataset: parse failure at line " +
                                 std::to_string(line_no));
      fields.push_back(v);
    }
    if (fields.size() < 2)
      throw std::runtime_error("load_dataset: too few columns at line " +
                               std::to_string(line_no));
    if (feature_count < 0)
      feature_count = static_cast<Eigen::Index>(fields.size()) - 1;
    if (static_cast<Eigen::Index>(fields.size()) - 1 != feature_count)
      throw std::runtime_error("load_dataset: ragged row at line " +
                               std::to_string(line_no));
    const double label_raw = fields[0];
    const auto label = static_cast<Eigen::Index>(label_raw);
    if (label_raw != static_cast<double>(label) || label < 0 ||
        label >= num_classes)
      throw std::runtime_error("load_dataset: unknown label at line " +
                               std::to_string(line_no));
    LabeledSample s;
    s.features = Eigen::Map<const Eigen::VectorXd>(fields.data() + 1,
                                                   feature_count);
    s.label = Eigen::VectorXd::Zero(num_classes);
    s.label[label] = 1.0;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::runtime_error("load_dataset: empty file " + path);
  return out;
}

std::vector<LabeledSample> make_blobs(const BlobConfig& cfg) {
  if (cfg.count < 1 || cfg.dim < 1 || cfg.classes < 2)
    throw std::invalid_argument("make_blobs: invalid configuration");
  RngStream rng(derive_key(cfg.seed, 31));

  // Class means: random directions scaled to the requested radius.
  std::vector<Eigen::VectorXd> means;
  for (Eigen::Index c = 0; c < cfg.classes; ++c) {
    Eigen::VectorXd m(cfg.dim);
    for (Eigen::Index j = 0; j < cfg.dim; ++j) m[j] = rng.normal();
    m *= cfg.center_radius / m.norm();
    means.push_back(std::move(m));
  }

  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  for (Eigen::Index i = 0; i < cfg.count; ++i) {
    const Eigen::Index c = i % cfg.classes;  // balanced classes
    LabeledSample s;
    s.features = means[static_cast<std::size_t>(c)];
    for (Eigen::Index j = 0; j < cfg.dim; ++j)
      s.features[j] += cfg.noise * rng.normal();
    s.label = Eigen::VectorXd::Zero(cfg.classes);
    s.label[c] = 1.0;
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset_csv(const std::vector<LabeledSample>& data,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  out.precision(17);
  for (const auto& s : data) {
    Eigen::Index label = 0;
    s.label.maxCoeff(&label);
    out << label;
    for (Eigen::Index j = 0; j < s.features.size(); ++j)
      out << ',' << s.features[j];
    out << '\n';
  }
}

}  // namespace pisgd
