#include "nie/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "nie/errors.hpp"
#include "nie/io.hpp"
#include "nie/rng.hpp"

namespace nie {

MlpModel MlpModel::initialized(std::vector<int> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw InvalidParameter("an MLP needs at least input and output dims");
  for (int d : layer_dims) {
    if (d < 1) throw InvalidParameter("layer dimensions must be positive");
  }
  if (layer_dims.back() != 1) throw InvalidParameter("output dimension must be 1");

  MlpModel m;
  m.layer_dims = std::move(layer_dims);
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    const int in = m.layer_dims[l];
    const int out = m.layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / in);
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
    }
    // The output layer starts at zero so an untrained model predicts the
    // label mean exactly.
    if (l + 2 == m.layer_dims.size()) w.setZero();
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  m.feature_means.assign(m.layer_dims.front(), 0.0);
  m.feature_stds.assign(m.layer_dims.front(), 1.0);
  return m;
}

void MlpModel::validate() const {
  if (layer_dims.size() < 2 || layer_dims.back() != 1) throw InvalidInput("bad layer dims");
  const std::size_t layers = layer_dims.size() - 1;
  if (weights.size() != layers || biases.size() != layers) {
    throw InvalidInput("layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1]) {
      throw InvalidInput("layer " + std::to_string(l) + " shape does not chain");
    }
  }
  const auto in = static_cast<std::size_t>(layer_dims.front());
  if (feature_means.size() != in || feature_stds.size() != in) {
    throw InvalidInput("normalization stats do not match input dimension");
  }
  for (double s : feature_stds) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("feature std must be positive");
  }
  if (!(label_std > 0.0) || !std::isfinite(label_std)) throw InvalidInput("label std must be positive");
}

Eigen::RowVectorXd MlpModel::forward_normalized(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd a = inputs;
  const std::size_t layers = weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = weights[l] * a;
    z.colwise() += biases[l];
    a = (l + 1 < layers) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a.row(0);
}

double MlpModel::forward(std::span<const double> raw) const {
  if (raw.size() != static_cast<std::size_t>(input_dim()) || weights.empty() ||
      weights.front().cols() != input_dim()) {
    throw InvalidInput("input has " + std::to_string(raw.size()) + " features, model expects " +
                       std::to_string(input_dim()));
  }
  Eigen::VectorXd a(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) a(i) = (raw[i] - feature_means[i]) / feature_stds[i];
  const std::size_t layers = weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::VectorXd z = weights[l] * a + biases[l];
    a = (l + 1 < layers) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  if (a.size() != 1) throw InvalidInput("model output is not scalar");
  return label_mean + label_std * a(0);
}

double MlpModel::forward(const FeatureVector& features) const {
  const auto a = features.to_array();
  return forward(std::span<const double>(a));
}

double mse_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::RowVectorXd& targets, MlpGradients* grads) {
  const std::size_t layers = model.weights.size();
  const auto batch = static_cast<double>(inputs.cols());
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre;
  activations.reserve(layers + 1);
  pre.reserve(layers);
  activations.push_back(inputs);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = model.weights[l] * activations.back();
    z.colwise() += model.biases[l];
    pre.push_back(z);
    activations.push_back(l + 1 < layers ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z);
  }
  const Eigen::RowVectorXd residual = activations.back().row(0) - targets;
  const double loss = residual.squaredNorm() / batch;
  if (!grads) return loss;

  grads->weights.resize(layers);
  grads->biases.resize(layers);
  Eigen::MatrixXd delta = (2.0 / batch) * residual;
  for (std::size_t l = layers; l-- > 0;) {
    grads->weights[l] = delta * activations[l].transpose();
    grads->biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd upstream = model.weights[l].transpose() * delta;
      delta = upstream.array() * (pre[l - 1].array() > 0.0).cast<double>();
    }
  }
  return loss;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / n);
  // Zero-variance columns would divide by zero.
  if (!(sd > 0.0) || !std::isfinite(sd)) sd = 1.0;
  return {mean, sd};
}

}  // namespace

TrainResult train_mlp(const Eigen::MatrixXd& inputs, std::span<const double> labels,
                      const TrainConfig& config, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  if (n < 2 || labels.size() != n) throw InvalidParameter("training needs >= 2 labeled records");
  if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) {
    throw InvalidParameter("val_fraction must lie in (0,1)");
  }
  if (config.batch_size < 1 || !(config.learning_rate > 0.0) || config.max_epochs < 1 ||
      config.patience < 1) {
    throw InvalidParameter("batch size, learning rate, epochs and patience must be positive");
  }
  for (double y : labels) {
    if (!std::isfinite(y)) throw InvalidParameter("labels must be finite");
  }

  Rng split_rng(derive_seed(seed, 0));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), split_rng);
  auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  const std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  const auto dim = static_cast<int>(inputs.cols());
  std::vector<int> dims{dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(1);
  MlpModel model = MlpModel::initialized(dims, derive_seed(seed, 1));

  // Normalization statistics come from the training split only.
  for (int c = 0; c < dim; ++c) {
    std::vector<double> column;
    column.reserve(train_idx.size());
    for (std::size_t i : train_idx) column.push_back(inputs(static_cast<Eigen::Index>(i), c));
    const auto [mu, sd] = mean_std(column);
    model.feature_means[c] = mu;
    model.feature_stds[c] = sd;
  }
  {
    std::vector<double> ys;
    ys.reserve(train_idx.size());
    for (std::size_t i : train_idx) ys.push_back(labels[i]);
    const auto [mu, sd] = mean_std(ys);
    model.label_mean = mu;
    model.label_std = sd;
  }

  auto normalized_block = [&](const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                              Eigen::MatrixXd& x, Eigen::RowVectorXd& y) {
    const auto cols = static_cast<Eigen::Index>(end - begin);
    x.resize(dim, cols);
    y.resize(cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto row = static_cast<Eigen::Index>(idx[begin + static_cast<std::size_t>(k)]);
      for (int c = 0; c < dim; ++c) {
        x(c, k) = (inputs(row, c) - model.feature_means[c]) / model.feature_stds[c];
      }
      y(k) = (labels[static_cast<std::size_t>(row)] - model.label_mean) / model.label_std;
    }
  };

  Eigen::MatrixXd train_x;
  Eigen::RowVectorXd train_y;
  Eigen::MatrixXd val_x;
  Eigen::RowVectorXd val_y;
  normalized_block(train_idx, 0, train_idx.size(), train_x, train_y);
  normalized_block(val_idx, 0, val_idx.size(), val_x, val_y);
  const double label_var = model.label_std * model.label_std;

  TrainReport report;
  MlpModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  Rng epoch_rng(derive_seed(seed, 2));
  MlpGradients grads;
  Eigen::MatrixXd batch_x;
  Eigen::RowVectorXd batch_y;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(train_idx), epoch_rng);
    const auto bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t begin = 0; begin < train_idx.size(); begin += bs) {
      const std::size_t end = std::min(train_idx.size(), begin + bs);
      normalized_block(train_idx, begin, end, batch_x, batch_y);
      mse_and_gradients(model, batch_x, batch_y, &grads);
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        model.weights[l] -= config.learning_rate * grads.weights[l];
        model.biases[l] -= config.learning_rate * grads.biases[l];
      }
    }

    const double train_mse = mse_and_gradients(model, train_x, train_y, nullptr) * label_var;
    const double val_mse = mse_and_gradients(model, val_x, val_y, nullptr) * label_var;
    if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
      throw TrainingDiverged(epoch, "non-finite loss");
    }
    report.train_mse.push_back(train_mse);
    report.validation_mse.push_back(val_mse);
    report.epochs_run = epoch;
    if (val_mse < best_val) {
      best_val = val_mse;
      best = model;
      report.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }
  return {std::move(best), std::move(report)};
}

// ---------------------------------------------------------------------------
// Persistence

std::string model_to_json(const MlpModel& model) {
  model.validate();
  nlohmann::json j;
  j["format_version"] = MlpModel::kFormatVersion;
  j["layer_dims"] = model.layer_dims;
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto& w = model.weights[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(flat);
    biases.push_back(std::vector<double>(model.biases[l].data(),
                                         model.biases[l].data() + model.biases[l].size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["feature_means"] = model.feature_means;
  j["feature_stds"] = model.feature_stds;
  j["label_mean"] = model.label_mean;
  j["label_std"] = model.label_std;
  j["h_radius"] = model.h_radius;
  j["graph_fingerprint"] = model.graph_fingerprint;
  return j.dump();
}

MlpModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  MlpModel m;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != MlpModel::kFormatVersion) {
      throw VersionMismatch("model format version " + std::to_string(version) +
                            " is not supported (expected " +
                            std::to_string(MlpModel::kFormatVersion) + ")");
    }
    j.at("layer_dims").get_to(m.layer_dims);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (m.layer_dims.size() < 2 || weights.size() + 1 != m.layer_dims.size() ||
        biases.size() != weights.size()) {
      throw ParseError("model layer arrays do not match layer_dims");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const auto flat = weights[l].get<std::vector<double>>();
      const int out = m.layer_dims[l + 1];
      const int in = m.layer_dims[l];
      if (flat.size() != static_cast<std::size_t>(out) * static_cast<std::size_t>(in)) {
        throw ParseError("weight array " + std::to_string(l) + " has the wrong length");
      }
      Eigen::MatrixXd w(out, in);
      for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) w(r, c) = flat[static_cast<std::size_t>(r) * in + c];
      }
      const auto b = biases[l].get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(out)) {
        throw ParseError("bias array " + std::to_string(l) + " has the wrong length");
      }
      m.weights.push_back(std::move(w));
      m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), out));
    }
    j.at("feature_means").get_to(m.feature_means);
    j.at("feature_stds").get_to(m.feature_stds);
    m.label_mean = j.at("label_mean").get<double>();
    m.label_std = j.at("label_std").get<double>();
    m.h_radius = j.at("h_radius").get<std::uint32_t>();
    m.graph_fingerprint = j.at("graph_fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("inconsistent model file: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  write_file_atomic(path, model_to_json(model));
}

MlpModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

void check_model_graph(const MlpModel& model, const Graph& graph) {
  if (model.graph_fingerprint != graph.fingerprint()) {
    throw FingerprintMismatch("model was trained for graph " + model.graph_fingerprint +
                              ", not " + graph.fingerprint());
  }
}

}  // namespace nie
