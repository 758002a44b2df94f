// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "nnaqat/checkpoint.hpp"
#include "nnaqat/error.hpp"
#include "nnaqat/experiment.hpp"
#include "nnaqat/training.hpp"

using namespace nnaqat;

namespace {

std::shared_ptr<const TablePair> tables() {
  static const auto t = std::make_shared<const TablePair>(default_tables());
  return t;
}

double hinge_loss(std::vector<double> z, Tensor* grad = nullptr) {
  Tape tape;
  const Var v = tape.leaf(Tensor::row(std::move(z)));
  const Var loss = activity_loss(v, ActivityBounds{});
  tape.backward(loss);
  if (grad) *grad = v.grad();
  return loss.value()[0];
}

TEST(ActivityLossTest, Examples) {
  EXPECT_EQ(hinge_loss({0, 1, -2}), 0.0);
  EXPECT_EQ(hinge_loss({5}), 1.0);
  Tensor g;
  EXPECT_EQ(hinge_loss({-6}, &g), 2.0);
  EXPECT_EQ(g[0], -1.0);
}

TEST(ActivityLossTest, GradientIsScaledSignOutsideAndZeroElsewhere) {
  Tensor g;
  const double loss = hinge_loss({-4.0, 4.0, -5.0, 7.0, 0.0, 3.999}, &g);
  EXPECT_EQ(loss, (1.0 + 3.0) / 6.0);
  EXPECT_EQ(g, Tensor::row({0.0, 0.0, -1.0 / 6, 1.0 / 6, 0.0, 0.0}));
}

TEST(ActivityLossTest, MeanAcrossSeveralTensors) {
  Tape tape;
  const Var a = tape.leaf(Tensor::row({5.0, 0.0}));
  const Var b = tape.leaf(Tensor::row({-10.0}));
  const Var loss = activity_loss(std::vector<Var>{a, b}, ActivityBounds{});
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(loss.value()[0], 7.0 / 3.0);
  EXPECT_EQ(a.grad(), Tensor::row({1.0 / 3, 0.0}));
  EXPECT_EQ(b.grad(), Tensor::row({-1.0 / 3}));
  EXPECT_DOUBLE_EQ(activity_value(Tensor::row({5.0, 0.0, -10.0}), ActivityBounds{}), 7.0 / 3.0);
}

TEST(ActivityLossTest, LiteralFormPenalizesOnlyUpperSide) {
  ActivityBounds literal;
  literal.form = HingeForm::kLiteral;
  EXPECT_EQ(literal.hinge(-6.0), 0.0);
  EXPECT_EQ(literal.hinge(5.0), 1.0 + 1.0);  // relu(5 - 4) + relu(5 - 4)
  EXPECT_EQ(literal.hinge(0.0), 0.0);
}

TEST(ActivityLossTest, BoundsValidated) {
  EXPECT_THROW((ActivityBounds{4.0, 4.0}).validate(), Error);
  EXPECT_THROW((ActivityBounds{5.0, -5.0}).validate(), Error);
}

TEST(TotalLossTest, Examples) {
  EXPECT_EQ(total_loss(1.0, 0.5, 2.0), 2.0);
  EXPECT_EQ(total_loss(0.7, 0.0, 5.0), 0.7);
  EXPECT_EQ(total_loss(0.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(total_loss(1.0, 0.25, 1.5 + 0.5), total_loss(1.0, 0.25, 1.5) + 0.5 * 0.25);
}

TEST(LrScheduleTest, WarmupHoldDecay) {
  const LrSchedule s{1e-2, 1e-4, 10, 20, 100};
  EXPECT_DOUBLE_EQ(s.at(0), 1e-3);
  EXPECT_DOUBLE_EQ(s.at(9), 1e-2);
  EXPECT_EQ(s.at(10), 1e-2);
  EXPECT_EQ(s.at(29), 1e-2);
  EXPECT_LT(s.at(50), 1e-2);
  EXPECT_GT(s.at(50), 1e-4);
  EXPECT_DOUBLE_EQ(s.at(99), 1e-4);
  EXPECT_DOUBLE_EQ(s.at(500), 1e-4);
  const LrSchedule c = LrSchedule::constant(1e-3, 50);
  EXPECT_EQ(c.at(0), 1e-3);
  EXPECT_EQ(c.at(49), 1e-3);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Tensor p = Tensor::row({1.0, -2.0});
  const Tensor g = Tensor::row({0.3, -0.001});
  Adam adam(AdamConfig{0.9, 0.999, 1e-8, 0.0}, {&p});
  adam.step({&p}, {&g}, 0.1);
  EXPECT_NEAR(p[0], 0.9, 1e-6);
  EXPECT_NEAR(p[1], -1.9, 1e-4);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(AdamTest, NonFiniteGradientIsDivergence) {
  Tensor p = Tensor::row({1.0});
  const Tensor g = Tensor::row({std::nan("")});
  Adam adam(AdamConfig{}, {&p});
  try {
    adam.step({&p}, {&g}, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
}

TrainConfig tiny_config(TaskKind kind) {
  TrainConfig c;
  c.task.kind = kind;
  c.task.length = 6;
  c.task.train_size = 128;
  c.task.val_size = 32;
  c.task.test_size = 32;
  c.model.hidden = 8;
  c.model.layers = 1;
  c.steps = 40;
  c.batch = 16;
  c.lr = {1e-2, 1e-3, 5, 10, 40};
  c.tables = tables();
  return c;
}

TEST(TrainingTest, ZeroStepsReturnsInitialization) {
  TrainConfig c = tiny_config(TaskKind::kAdding);
  c.steps = 0;
  c.lr.total_steps = 0;
  const Dataset train = gen_task(c.task, 1, Split::kTrain);
  const Dataset val = gen_task(c.task, 1, Split::kVal);
  const TrainResult r = stage1_train(c, train, val);
  const Network init = Network::init(c.model.network_for(c.task), c.seed);
  for (std::size_t l = 0; l < init.layers.size(); ++l) {
    EXPECT_EQ(r.checkpoint.network.layers[l].w, init.layers[l].w);
    EXPECT_EQ(r.checkpoint.network.layers[l].b, init.layers[l].b);
  }
  EXPECT_EQ(r.checkpoint.network.head.w, init.head.w);
}

TEST(TrainingTest, StageOneIsDeterministicAndLogs) {
  const TrainConfig c = tiny_config(TaskKind::kParity);
  const Dataset train = gen_task(c.task, 2, Split::kTrain);
  const Dataset val = gen_task(c.task, 2, Split::kVal);
  std::ostringstream log_a, log_b;
  const TrainResult a = stage1_train(c, train, val, &log_a);
  const TrainResult b = stage1_train(c, train, val, &log_b);
  EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  EXPECT_EQ(log_a.str(), log_b.str());
  EXPECT_NE(log_a.str().find("\"stage\""), std::string::npos);
  EXPECT_EQ(a.checkpoint.meta.at("stage"), "stage1");
}

TEST(TrainingTest, StageOneReducesAddingLoss) {
  TrainConfig c = tiny_config(TaskKind::kAdding);
  c.steps = 300;
  c.lr = {1e-2, 1e-3, 20, 150, 300};
  const Dataset train = gen_task(c.task, 3, Split::kTrain);
  const Dataset val = gen_task(c.task, 3, Split::kVal);
  const TrainResult r = stage1_train(c, train, val);
  EXPECT_LT(r.final_loss, 0.2 * r.initial_loss);
}

TEST(TrainingTest, StageTwoWithZeroStepsIsPtq) {
  TrainConfig c1 = tiny_config(TaskKind::kAdding);
  const Dataset train = gen_task(c1.task, 4, Split::kTrain);
  const Dataset val = gen_task(c1.task, 4, Split::kVal);
  const TrainResult s1 = stage1_train(c1, train, val);
  TrainConfig c2 = c1;
  c2.stage = Stage::kTwo;
  c2.steps = 0;
  c2.lr = LrSchedule::constant(1e-3, 0);
  const TrainResult s2 = stage2_train(c2, s1.checkpoint, train, val);
  EXPECT_EQ(s2.checkpoint.network.layers[0].w, s1.checkpoint.network.layers[0].w);
  const QuantPolicy q = accelerator_policy(tables());
  EXPECT_EQ(evaluate(s2.checkpoint.network, val, q), evaluate(s1.checkpoint.network, val, q));
}

TEST(TrainingTest, StageTwoRejectsMismatchedCheckpoint) {
  TrainConfig c = tiny_config(TaskKind::kAdding);
  c.stage = Stage::kTwo;
  const Dataset train = gen_task(c.task, 1, Split::kTrain);
  const Checkpoint other{Network::init({3, 8, 1, 1, 0}, 1), {}};
  EXPECT_THROW(stage2_train(c, other, train, train), Error);
}

TEST(EvaluateTest, PerfectClassifierScoresOne) {
  // The label is the first token's parity; a short run learns it exactly.
  TrainConfig c = tiny_config(TaskKind::kTokenClassify);
  c.task.length = 3;
  c.task.vocab = 4;
  c.task.classes = 2;
  c.steps = 300;
  c.lr = {2e-2, 1e-3, 10, 150, 300};
  c.lambda = 0.0;
  const Dataset train = gen_task(c.task, 5, Split::kTrain);
  const TrainResult r = stage1_train(c, train, train);
  EXPECT_EQ(evaluate(r.checkpoint.network, train, QuantPolicy::weights_only()).metric, 1.0);
}

TEST(EvaluateTest, HistogramAndFractions) {
  const TrainConfig c = tiny_config(TaskKind::kAdding);
  const Dataset val = gen_task(c.task, 6, Split::kVal);
  Network net = Network::init(c.model.network_for(c.task), 1);
  for (double& v : net.layers[0].b.data()) v = 5.0;  // every z above z_max
  const Metrics m = evaluate(net, val, QuantPolicy::off());
  EXPECT_EQ(m.z_count, 32u * 6u * 32u);
  EXPECT_GT(m.out_of_range, 0.9);
  const auto total = m.total_histogram();
  std::size_t sum = 0;
  for (std::size_t v : total) sum += v;
  EXPECT_EQ(sum, m.z_count);
  EXPECT_EQ(m.histogram.size(), 4u);
  EXPECT_EQ(evaluate(net, val, QuantPolicy::off()), m);
}

TEST(ExperimentTest, NoRegularizerNoStageTwoCollapsesToPtq) {
  ExperimentConfig e;
  e.task.length = 6;
  e.task.train_size = 64;
  e.task.val_size = 16;
  e.task.test_size = 32;
  e.model.hidden = 4;
  e.model.layers = 1;
  e.lambda = 0.0;
  e.stage1_steps = 20;
  e.stage1_lr = {1e-2, 1e-3, 2, 5, 20};
  e.stage2_steps = 0;
  e.seeds = {1};
  e.tables = tables();
  const ExperimentResult r = run_experiment(e);
  ASSERT_EQ(r.seeds.size(), 1u);
  EXPECT_EQ(r.seeds[0].stage2_q, r.seeds[0].baseline_q);
  EXPECT_EQ(r.seeds[0].stage1_q, r.seeds[0].baseline_q);
  EXPECT_EQ(format_summary(r), format_summary(run_experiment(e)));
  EXPECT_NE(format_summary(r).find("Baseline (FP)"), std::string::npos);
  EXPECT_NEAR(relative_delta(0.9, 1.0), -10.0, 1e-12);
}

}  // namespace
