#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "nie/errors.hpp"
#include "nie/io.hpp"
#include "nie/mlp.hpp"

namespace nie {
namespace {

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

MlpModel toy_model() {
  // 2 inputs -> 2 hidden -> 1, identity normalization.
  MlpModel m = MlpModel::initialized({2, 2, 1}, 0);
  m.weights[0] << 1.0, -1.0,
                  0.5, 2.0;
  m.biases[0] << 0.0, -1.0;
  m.weights[1] << 3.0, -2.0;
  m.biases[1] << 0.5;
  return m;
}

TEST(Forward, ZeroWeightsGiveLabelMean) {
  MlpModel m = MlpModel::initialized({7, 4, 4, 1}, 3);
  for (auto& w : m.weights) w.setZero();
  for (auto& b : m.biases) b.setZero();
  m.label_mean = 4.25;
  m.label_std = 2.0;
  const std::array<double, 7> x{1, -2, 3, 100, 0, 7, 0.5};
  EXPECT_EQ(m.forward(std::span<const double>(x)), 4.25);
}

TEST(Forward, HandComputedToyModel) {
  const MlpModel m = toy_model();
  // h = relu([1*1 - 1*2, 0.5*1 + 2*2 - 1]) = relu([-1, 3.5]) = [0, 3.5]
  // y = 3*0 - 2*3.5 + 0.5 = -6.5
  const std::array<double, 2> x{1.0, 2.0};
  EXPECT_DOUBLE_EQ(m.forward(std::span<const double>(x)), -6.5);

  MlpModel scaled = m;
  scaled.label_mean = 1.0;
  scaled.label_std = 2.0;
  EXPECT_DOUBLE_EQ(scaled.forward(std::span<const double>(x)), 1.0 + 2.0 * -6.5);
}

TEST(Forward, DimensionMismatchThrows) {
  const MlpModel m = toy_model();
  const std::array<double, 3> x{1, 2, 3};
  EXPECT_THROW(m.forward(std::span<const double>(x)), InvalidInput);
}

TEST(Forward, NormalizationInvariance) {
  MlpModel m = MlpModel::initialized({3, 5, 1}, 9);
  m.feature_means = {1.0, -2.0, 0.5};
  m.feature_stds = {2.0, 0.5, 3.0};
  const std::array<double, 3> x{4.0, 1.0, -2.0};
  const double base = m.forward(std::span<const double>(x));
  for (double factor : {0.1, 7.0, 1000.0}) {
    MlpModel s = m;
    s.feature_means[1] *= factor;
    s.feature_stds[1] *= factor;
    std::array<double, 3> y = x;
    y[1] *= factor;
    EXPECT_NEAR(s.forward(std::span<const double>(y)), base, 1e-12 * std::max(1.0, std::abs(base)));
  }
}

TEST(Initialization, HeUniformBoundsAndDeterminism) {
  const MlpModel a = MlpModel::initialized({7, 128, 128, 1}, 5);
  const MlpModel b = MlpModel::initialized({7, 128, 128, 1}, 5);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    const double bound = std::sqrt(6.0 / a.layer_dims[l]);
    EXPECT_LE(a.weights[l].cwiseAbs().maxCoeff(), bound);
    if (l + 1 < a.weights.size()) EXPECT_GT(a.weights[l].cwiseAbs().maxCoeff(), 0.0);
    else EXPECT_TRUE(a.weights[l].isZero());
    EXPECT_EQ(a.weights[l], b.weights[l]);
    EXPECT_TRUE(a.biases[l].isZero());
  }
  EXPECT_THROW(MlpModel::initialized({7}, 0), InvalidParameter);
  EXPECT_THROW(MlpModel::initialized({7, 3, 2}, 0), InvalidParameter);
}

TEST(Gradients, MatchCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MlpModel m = MlpModel::initialized({3, 2, 2, 1}, seed);
    for (auto& b : m.biases) b.setConstant(0.1);
    Rng rng(seed + 10);
    Eigen::MatrixXd x(3, 6);
    Eigen::RowVectorXd y(6);
    for (int c = 0; c < 6; ++c) {
      for (int r = 0; r < 3; ++r) x(r, c) = 2.0 * rng.uniform() - 1.0;
      y(c) = rng.uniform();
    }
    MlpGradients g;
    mse_and_gradients(m, x, y, &g);
    const double h = 1e-6;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
        MlpModel plus = m, minus = m;
        plus.weights[l].data()[i] += h;
        minus.weights[l].data()[i] -= h;
        const double numeric = (mse_and_gradients(plus, x, y, nullptr) - mse_and_gradients(minus, x, y, nullptr)) / (2 * h);
        EXPECT_LE(relative_error(g.weights[l].data()[i], numeric), 1e-4) << "layer " << l << " w" << i;
      }
      for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
        MlpModel plus = m, minus = m;
        plus.biases[l](i) += h;
        minus.biases[l](i) -= h;
        const double numeric = (mse_and_gradients(plus, x, y, nullptr) - mse_and_gradients(minus, x, y, nullptr)) / (2 * h);
        EXPECT_LE(relative_error(g.biases[l](i), numeric), 1e-4) << "layer " << l << " b" << i;
      }
    }
  }
}

struct Synthetic {
  Eigen::MatrixXd x;
  std::vector<double> y;
};

/// The last feature plays p, uniform in [0, 1]; the label is 2 * p plus
/// Gaussian noise. The other six are constant unless `distractors` is set,
/// in which case they carry uniform noise the model has to learn to ignore.
Synthetic linear_teacher(std::size_t n, std::uint64_t seed, double noise, bool distractors = true) {
  Rng rng(seed);
  Synthetic s{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 7), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 7; ++c) {
      const double u = rng.uniform();
      s.x(static_cast<Eigen::Index>(i), c) = c == 6 ? u : distractors ? u * (c + 1.0) : 1.0;
    }
    // Box-Muller.
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    const double gauss = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    s.y[i] = 2.0 * s.x(static_cast<Eigen::Index>(i), 6) + noise * gauss;
  }
  return s;
}

double mse(const MlpModel& m, const Synthetic& s) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    const Eigen::VectorXd row = s.x.row(i);
    const double err = m.forward(std::span<const double>(row.data(), 7)) - s.y[static_cast<std::size_t>(i)];
    total += err * err;
  }
  return total / static_cast<double>(s.x.rows());
}

TEST(Train, LinearTeacherReachesLowHeldOutError) {
  const Synthetic train = linear_teacher(2000, 1, 0.01, false);
  const Synthetic held = linear_teacher(500, 2, 0.01, false);
  const TrainResult r = train_mlp(train.x, train.y, TrainConfig{}, 7);
  EXPECT_LT(mse(r.model, held), 0.01);
}

TEST(Train, LinearTeacherWithDistractorsStillLearns) {
  const Synthetic train = linear_teacher(2000, 1, 0.01);
  const Synthetic held = linear_teacher(500, 2, 0.01);
  const TrainResult r = train_mlp(train.x, train.y, TrainConfig{}, 7);
  // Label variance is 1/3; default SGD settles well below it within 200 epochs.
  EXPECT_LT(mse(r.model, held), 0.03);
}

TEST(Train, ConstantLabelIsLearned) {
  Synthetic s = linear_teacher(600, 3, 0.0);
  std::fill(s.y.begin(), s.y.end(), 3.5);
  const TrainResult r = train_mlp(s.x, s.y, TrainConfig{}, 1);
  EXPECT_EQ(r.model.label_std, 1.0);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const Eigen::VectorXd row = s.x.row(i);
    EXPECT_NEAR(r.model.forward(std::span<const double>(row.data(), 7)), 3.5, 1e-3);
  }
}

TEST(Train, ZeroVarianceFeatureGetsUnitStd) {
  Synthetic s = linear_teacher(200, 4, 0.01);
  s.x.col(2).setConstant(5.0);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  const TrainResult r = train_mlp(s.x, s.y, cfg, 1);
  EXPECT_EQ(r.model.feature_stds[2], 1.0);
  EXPECT_EQ(r.model.feature_means[2], 5.0);
}

TEST(Train, DeterministicAndEarlyStoppingContract) {
  const Synthetic s = linear_teacher(800, 5, 0.3);
  TrainConfig cfg;
  cfg.patience = 3;
  cfg.hidden = {16, 16};
  const TrainResult a = train_mlp(s.x, s.y, cfg, 11);
  const TrainResult b = train_mlp(s.x, s.y, cfg, 11);
  EXPECT_EQ(a.report.train_mse, b.report.train_mse);
  EXPECT_EQ(a.report.validation_mse, b.report.validation_mse);
  EXPECT_EQ(model_to_json(a.model), model_to_json(b.model));
  EXPECT_LE(a.report.epochs_run, a.report.best_epoch + cfg.patience);
  EXPECT_EQ(static_cast<int>(a.report.validation_mse.size()), a.report.epochs_run);
  const double best = *std::min_element(a.report.validation_mse.begin(), a.report.validation_mse.end());
  EXPECT_EQ(a.report.validation_mse[static_cast<std::size_t>(a.report.best_epoch - 1)], best);
}

TEST(Train, SmallStepTrainingLossDoesNotIncrease) {
  const Synthetic s = linear_teacher(400, 6, 0.05);
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = 400;  // full batch on the training split
  cfg.max_epochs = 30;
  cfg.patience = 30;
  cfg.hidden = {8, 8};
  const TrainResult r = train_mlp(s.x, s.y, cfg, 2);
  for (std::size_t i = 1; i < r.report.train_mse.size(); ++i) {
    EXPECT_LE(r.report.train_mse[i], r.report.train_mse[i - 1] + 1e-12);
  }
}

TEST(Train, RejectsBadInputAndReportsDivergence) {
  const Synthetic s = linear_teacher(50, 7, 0.1);
  TrainConfig bad;
  bad.val_fraction = 1.0;
  EXPECT_THROW(train_mlp(s.x, s.y, bad, 1), InvalidParameter);
  EXPECT_THROW(train_mlp(s.x.topRows(1), std::vector<double>{1.0}, TrainConfig{}, 1), InvalidParameter);

  TrainConfig wild;
  wild.learning_rate = 1e8;
  wild.batch_size = 8;
  try {
    train_mlp(s.x, s.y, wild, 1);
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_GE(e.epoch(), 1);
  }
}

class ModelFileTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() / "nie_model_test";
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(ModelFileTest, RoundTripIsBitExact) {
  MlpModel m = MlpModel::initialized({7, 12, 6, 1}, 21);
  m.feature_means = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0 / 3.0};
  m.feature_stds = {1, 2, 3, 4, 5, 6, 7};
  m.label_mean = 0.1;
  m.label_std = 3.3;
  m.h_radius = 3;
  m.graph_fingerprint = "00ff00ff00ff00ff";
  const auto path = dir_ / "m.json";
  save_model(path, m);
  const MlpModel back = load_model(path);
  EXPECT_EQ(back.layer_dims, m.layer_dims);
  EXPECT_EQ(back.h_radius, 3u);
  EXPECT_EQ(back.graph_fingerprint, m.graph_fingerprint);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    std::array<double, 7> x{};
    for (double& v : x) v = 10.0 * rng.uniform() - 5.0;
    EXPECT_EQ(back.forward(std::span<const double>(x)), m.forward(std::span<const double>(x)));
  }
  EXPECT_EQ(model_to_json(back), model_to_json(m));
}

TEST_F(ModelFileTest, TruncatedVersionAndFingerprintRefusals) {
  MlpModel m = MlpModel::initialized({7, 3, 1}, 1);
  const Graph g = test::path3();
  m.graph_fingerprint = g.fingerprint();
  const auto path = dir_ / "m.json";
  save_model(path, m);
  EXPECT_NO_THROW(check_model_graph(load_model(path), g));
  EXPECT_THROW(check_model_graph(load_model(path), test::cycle3()), FingerprintMismatch);

  const std::string text = read_file(path);
  write_file_atomic(path, text.substr(0, text.size() - 20));
  EXPECT_THROW(load_model(path), ParseError);

  std::string bumped = text;
  const auto at = bumped.find("\"format_version\":1");
  ASSERT_NE(at, std::string::npos);
  bumped.replace(at, 18, "\"format_version\":2");
  EXPECT_THROW(model_from_json(bumped), VersionMismatch);

  std::string reshaped = text;
  const auto dims = reshaped.find("\"layer_dims\":[7,3,1]");
  ASSERT_NE(dims, std::string::npos);
  reshaped.replace(dims, 20, "\"layer_dims\":[7,4,1]");
  EXPECT_THROW(model_from_json(reshaped), Error);
}

}  // namespace
}  // namespace nie
