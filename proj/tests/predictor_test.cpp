#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "irpdfl/dataset.hpp"
#include "irpdfl/diffopt.hpp"
#include "irpdfl/errors.hpp"
#include "irpdfl/predictor.hpp"
#include "irpdfl/rng.hpp"
#include "test_programs.hpp"

namespace irpdfl {
namespace {

Eigen::MatrixXd random_features(Rng& rng, int rows, int cols) {
  return testing::random_matrix(rng, rows, cols) * 2.0;
}

TEST(Forward, ZeroModelGivesLn2) {
  const DemandModel model({5, 4, 1}, Activation::kTanh);
  Rng rng(1);
  const auto y = model.predict(random_features(rng, 6, 5));
  for (Eigen::Index r = 0; r < y.size(); ++r) EXPECT_NEAR(y[r], std::log(2.0), 1e-15);
}

TEST(Forward, LinearModeSelectsPreviousDemand) {
  const std::size_t n = 3;
  DemandModel model({feature_dim(n), 1}, Activation::kTanh, OutputKind::kIdentity);
  model.layers()[0].weight(0, static_cast<Eigen::Index>(7 + n)) = 1.0;
  const auto inst = generate_instance(n, 4, 4, 3);
  const auto feats = make_features(inst.demand, Eigen::VectorXd::Constant(3, 5.0), 9);
  const auto pred = forward(model, feats);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < 4; ++p)
      EXPECT_DOUBLE_EQ(pred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)),
                       feats.x(static_cast<Eigen::Index>(i * 4 + p), static_cast<Eigen::Index>(7 + n)));
}

TEST(Forward, DeterministicAndShapeChecked) {
  const auto model = DemandModel::glorot({6, 8, 1}, Activation::kTanh, 42);
  EXPECT_EQ(model, DemandModel::glorot({6, 8, 1}, Activation::kTanh, 42));
  Rng rng(2);
  const Eigen::MatrixXd x = random_features(rng, 10, 6);
  EXPECT_EQ(model.predict(x), model.predict(x));
  EXPECT_THROW(model.predict(random_features(rng, 10, 5)), DimensionError);
  EXPECT_THROW(DemandModel({6, 2}, Activation::kTanh), InvalidParameter);
}

TEST(Forward, OutputsNonnegativeForRandomParameters) {
  Rng rng(3);
  const Eigen::MatrixXd x = random_features(rng, 4, 11);
  for (int draw = 0; draw < 10000; ++draw) {
    auto model = DemandModel({11, 8, 1}, draw % 2 ? Activation::kRelu : Activation::kTanh);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(model.n_params()));
    for (auto& v : theta) v = rng.uniform(-10.0, 10.0);
    model.set_parameters(theta);
    ASSERT_GE(model.predict(x).minCoeff(), 0.0) << "draw " << draw;
  }
}

TEST(Backward, ZeroAdjointGivesZeroGradient) {
  const auto model = DemandModel::glorot({5, 8, 1}, Activation::kTanh, 4);
  Rng rng(4);
  const auto g = model.gradient(random_features(rng, 7, 5), Eigen::VectorXd::Zero(7));
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, PerfectFitGivesZeroGradient) {
  Rng rng(5);
  auto model = DemandModel::glorot({4, 1}, Activation::kTanh, 5, OutputKind::kIdentity);
  const Eigen::MatrixXd x = random_features(rng, 9, 4);
  const Eigen::VectorXd target = model.predict(x);
  const Eigen::VectorXd adjoint = 2.0 * (model.predict(x) - target);
  EXPECT_EQ(model.gradient(x, adjoint).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, MatchesFiniteDifferencesAcrossShapes) {
  Rng rng(6);
  const std::size_t f = feature_dim(3);
  const std::vector<std::vector<std::size_t>> shapes = {
      {f, 1}, {f, 8, 1}, {f, 32, 32, 1}};
  for (const auto& dims : shapes)
    for (Activation act : {Activation::kTanh, Activation::kRelu}) {
      auto model = DemandModel::glorot(dims, act, rng.next());
      Eigen::VectorXd theta = model.parameters();
      for (auto& v : theta) v += rng.uniform(-0.1, 0.1);  // nonzero biases
      model.set_parameters(theta);
      const Eigen::MatrixXd x = random_features(rng, 6, static_cast<int>(f));
      Eigen::VectorXd adjoint(6);
      for (auto& v : adjoint) v = rng.uniform(-1.0, 1.0);
      const Eigen::VectorXd analytic = model.gradient(x, adjoint);
      const auto loss = [&](const Eigen::VectorXd& th) {
        DemandModel m = model;
        m.set_parameters(th);
        return Eigen::VectorXd::Constant(1, adjoint.dot(m.predict(x)));
      };
      const Eigen::VectorXd fd =
          finite_difference_jacobian(loss, theta, 1e-6).row(0).transpose();
      EXPECT_LE(testing::relative_error(analytic, fd), 1e-5)
          << dims.size() - 1 << " layers, " << to_string(act);
    }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
  const Eigen::VectorXd before = p;
  AdamState state;
  adam_step(p, Eigen::VectorXd::Zero(4), state, 0.1);
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  AdamState state;
  adam_step(p, (Eigen::VectorXd(3) << 2.0, -0.5, 7.0).finished(), state, 0.01);
  EXPECT_NEAR(p[0], -0.01, 1e-9);
  EXPECT_NEAR(p[1], 0.01, 1e-9);
  EXPECT_NEAR(p[2], -0.01, 1e-9);
}

TEST(Adam, DeterministicAndRejectsNonFinite) {
  Eigen::VectorXd a = Eigen::VectorXd::Ones(2), b = a;
  AdamState sa, sb;
  const Eigen::VectorXd g = (Eigen::VectorXd(2) << 0.3, -0.2).finished();
  for (int k = 0; k < 5; ++k) {
    adam_step(a, g, sa, 0.05);
    adam_step(b, g, sb, 0.05);
  }
  EXPECT_EQ(a, b);
  Eigen::VectorXd bad = g;
  bad[1] = std::nan("");
  EXPECT_THROW(adam_step(a, bad, sa, 0.05), InvalidParameter);
}

TEST(ModelFile, RoundTripIsExact) {
  const auto path = std::filesystem::temp_directory_path() / "irpdfl_model_test.txt";
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    const auto model = DemandModel::glorot({7, 5, 3, 1}, act, 11);
    save_model(model, path);
    EXPECT_EQ(load_model(path), model);
  }
  const auto text = serialize_model(DemandModel::glorot({2, 1}, Activation::kTanh, 1));
  EXPECT_EQ(text.substr(0, text.find('\n')), "IRPDFL-MLP v1");
  EXPECT_EQ(text.substr(text.find('\n') + 1, 4), "2 1\n");
}

TEST(ModelFile, MalformedFilesAreRejected) {
  EXPECT_THROW(parse_model("IRPDFL-MLP v2\n2 1\n0 0 0\n"), FormatError);
  EXPECT_THROW(parse_model("IRPDFL-MLP v1\n2 1\n0 0\n"), FormatError);
  EXPECT_THROW(parse_model("IRPDFL-MLP v1\n2 1\n0 x 0\n"), FormatError);
  EXPECT_THROW(load_model("/nonexistent/model.txt"), FormatError);
}

TEST(Features, LayoutAndOneHots) {
  const auto inst = generate_instance(3, 9, 4, 8);
  const Eigen::VectorXd history = (Eigen::VectorXd(3) << 1, 2, 3).finished();
  const auto f = make_features(inst.demand, history, 5);
  ASSERT_EQ(f.x.cols(), 12);
  ASSERT_EQ(f.x.rows(), 27);
  for (Eigen::Index r = 0; r < f.x.rows(); ++r) {
    EXPECT_EQ(f.x.row(r).head(7).sum(), 1.0);
    EXPECT_EQ(f.x.row(r).segment(7, 3).sum(), 1.0);
  }
  // Customer 1, period 0 (day 1): previous demand comes from the history.
  EXPECT_EQ(f.x(9, 1), 1.0);
  EXPECT_EQ(f.x(9, 8), 1.0);
  EXPECT_DOUBLE_EQ(f.x(9, 10), 2.0 / kDemandScale);
  // Period 6 is day 7, wrapping to day-of-week slot 0.
  EXPECT_EQ(f.x(6, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.x(10, 10), inst.demand(1, 0) / kDemandScale);
}

TEST(Dataset, DeterministicValidAndSplit) {
  DatasetParams params;
  params.n_instances = 10;
  params.n_customers = 3;
  params.horizon = 4;
  params.n_routes = 4;
  for (DemandLaw law : {DemandLaw::kSeasonal, DemandLaw::kLinear}) {
    params.law = law;
    const auto a = synthesize_dataset(params, 17);
    const auto b = synthesize_dataset(params, 17);
    ASSERT_EQ(a.records.size(), 10u);
    for (std::size_t j = 0; j < a.records.size(); ++j) {
      EXPECT_EQ(a.records[j].instance, b.records[j].instance);
      EXPECT_EQ(a.records[j].features.x, b.records[j].features.x);
      EXPECT_TRUE(validate_instance(a.records[j].instance).ok());
      EXPECT_GE(a.records[j].instance.demand.minCoeff(), 0.0);
      EXPECT_EQ(a.records[j].features.x.cols(), 12);
    }
    EXPECT_EQ(a.split(Split::kTrain).size(), 6u);
    EXPECT_EQ(a.split(Split::kVal).size(), 2u);
    EXPECT_EQ(a.split(Split::kTest).size(), 2u);
  }
  params.n_instances = 0;
  EXPECT_THROW(synthesize_dataset(params, 1), InvalidParameter);
}

TEST(Dataset, FileRoundTrip) {
  DatasetParams params;
  params.n_instances = 4;
  const auto data = synthesize_dataset(params, 3);
  const auto dir = std::filesystem::temp_directory_path() / "irpdfl_dataset_test";
  write_dataset(data, dir);
  const auto back = read_dataset(dir);
  ASSERT_EQ(back.records.size(), data.records.size());
  EXPECT_EQ(back.law, data.law);
  for (std::size_t j = 0; j < data.records.size(); ++j) {
    EXPECT_EQ(back.records[j].id, data.records[j].id);
    EXPECT_EQ(back.records[j].split, data.records[j].split);
    EXPECT_EQ(back.records[j].instance, data.records[j].instance);
    EXPECT_EQ(back.records[j].history, data.records[j].history);
    EXPECT_EQ(back.records[j].features.x, data.records[j].features.x);
  }
  EXPECT_THROW(read_dataset(dir / "missing"), FormatError);
}

TEST(Learning, MseHalvesOnLinearTargetIn200Steps) {
  DatasetParams params;
  params.n_instances = 10;
  params.n_customers = 3;
  params.horizon = 7;
  params.n_routes = 4;
  params.law = DemandLaw::kLinear;
  const auto data = synthesize_dataset(params, 99);
  auto model = DemandModel::glorot({data.feature_dim(), 8, 1}, Activation::kTanh, 5);
  const auto val_mse = [&] {
    double total = 0.0;
    const auto val = data.split(Split::kVal);
    for (const Record* r : val)
      total += (forward(model, r->features) - r->instance.demand).squaredNorm() /
               static_cast<double>(r->instance.demand.size());
    return total / static_cast<double>(val.size());
  };
  const double before = val_mse();
  Eigen::VectorXd theta = model.parameters();
  AdamState state;
  const auto train = data.split(Split::kTrain);
  for (int step = 0; step < 200; ++step) {
    const Record& r = *train[static_cast<std::size_t>(step) % train.size()];
    const DemandMatrix resid = forward(model, r.features) - r.instance.demand;
    const auto grad = backward(model, r.features,
                               2.0 * resid / static_cast<double>(resid.size()));
    adam_step(theta, grad, state, 0.05);
    model.set_parameters(theta);
  }
  const double after = val_mse();
  EXPECT_LE(after, 0.5 * before) << "before " << before << " after " << after;
}

}  // namespace
}  // namespace irpdfl
