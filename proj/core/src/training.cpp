// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

void ActivityBounds::validate() const {
  if (!(z_min < z_max) || !std::isfinite(z_min) || !std::isfinite(z_max)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("activity bounds need z_min < z_max (got {}, {})", z_min, z_max));
  }
}

double ActivityBounds::hinge(double z) const {
  const double lower = form == HingeForm::kTwoSided ? z_min - z : z + z_min;
  return std::max(0.0, lower) + std::max(0.0, z - z_max);
}

double ActivityBounds::hinge_grad(double z) const {
  double g = 0.0;
  if (form == HingeForm::kTwoSided) {
    if (z < z_min) g -= 1.0;
  } else if (z + z_min > 0.0) {
    g += 1.0;
  }
  if (z > z_max) g += 1.0;
  return g;
}

Var activity_loss(const std::vector<Var>& z, const ActivityBounds& bounds) {
  bounds.validate();
  if (z.empty()) throw Error(ErrorCode::kInvalidArgument, "activity_loss needs at least one tensor");
  Tape& tape = *z.front().tape();
  std::size_t count = 0;
  double total = 0.0;
  for (const Var& v : z) {
    if (v.tape() != &tape) throw Error(ErrorCode::kInvalidArgument, "tensors on different tapes");
    for (double x : v.value().data()) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidData, "non-finite pre-activation");
      total += bounds.hinge(x);
    }
    count += v.value().size();
  }
  if (count == 0) return tape.record(Tensor::scalar(0.0), [](Tape&, std::size_t) {});
  const double inv = 1.0 / static_cast<double>(count);
  std::vector<std::size_t> ids;
  for (const Var& v : z) ids.push_back(v.id());
  return tape.record(Tensor::scalar(total * inv), [ids, inv, bounds](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0] * inv;
    if (g == 0.0) return;
    for (std::size_t id : ids) {
      const Tensor& zv = t.value(id);
      Tensor& gz = t.grad_mut(id);
      for (std::size_t k = 0; k < zv.size(); ++k) gz[k] += g * bounds.hinge_grad(zv[k]);
    }
  });
}

Var activity_loss(const Var& z, const ActivityBounds& bounds) {
  return activity_loss(std::vector<Var>{z}, bounds);
}

double activity_value(const Tensor& z, const ActivityBounds& bounds) {
  bounds.validate();
  if (z.size() == 0) return 0.0;
  double total = 0.0;
  for (double x : z.data()) total += bounds.hinge(x);
  return total / static_cast<double>(z.size());
}

double total_loss(double task_loss, double activity, double lambda) {
  return task_loss + lambda * activity;
}

Var total_loss(const Var& task_loss, const Var& activity, double lambda) {
  return ad::add(task_loss, ad::scale(activity, lambda));
}

void LrSchedule::validate() const {
  if (!(peak > 0.0) || !(floor > 0.0) || floor > peak) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("learning rates need 0 < floor <= peak (got peak {}, floor {})", peak,
                            floor));
  }
}

double LrSchedule::at(std::size_t step) const {
  if (step < warmup) {
    return peak * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  if (step < warmup + hold || peak == floor) return peak;
  const std::size_t decay_start = warmup + hold;
  if (total_steps <= decay_start + 1) return floor;
  const double frac = std::min(
      1.0, static_cast<double>(step - decay_start) / static_cast<double>(total_steps - 1 - decay_start));
  return peak * std::pow(floor / peak, frac);
}

Adam::Adam(AdamConfig config, const std::vector<const Tensor*>& params) : cfg_(config) {
  for (const Tensor* p : params) {
    m_.emplace_back(p->rows(), p->cols());
    v_.emplace_back(p->rows(), p->cols());
  }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer parameter count changed");
  }
  double norm2 = 0.0;
  for (const Tensor* g : grads) {
    for (double x : g->data()) norm2 += x * x;
  }
  if (!std::isfinite(norm2)) throw Error(ErrorCode::kDivergence, "non-finite gradient");
  double clip = 1.0;
  if (cfg_.clip_norm > 0.0 && norm2 > cfg_.clip_norm * cfg_.clip_norm) {
    clip = cfg_.clip_norm / std::sqrt(norm2);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k] * clip;
      m_[i][k] = cfg_.beta1 * m_[i][k] + (1.0 - cfg_.beta1) * gk;
      v_[i][k] = cfg_.beta2 * v_[i][k] + (1.0 - cfg_.beta2) * gk * gk;
      p[k] -= lr * (m_[i][k] / bc1) / (std::sqrt(v_[i][k] / bc2) + cfg_.eps);
    }
  }
}

NetworkSpec ModelSpec::network_for(const TaskSpec& task) const {
  NetworkSpec spec;
  spec.hidden = hidden;
  spec.layers = layers;
  spec.output_dim = task.output_dim();
  if (task.tokens()) {
    spec.vocab = task.vocab;
    spec.input_dim = embed_dim;
  } else {
    spec.input_dim = task.input_dim();
  }
  return spec;
}

void TrainConfig::validate() const {
  bounds.validate();
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (batch == 0) throw Error(ErrorCode::kInvalidArgument, "batch must be positive");
  if (model.hidden < 1 || model.layers < 1 || model.embed_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  }
  lr.validate();
  task.validate();
}

QuantPolicy TrainConfig::policy() const {
  if (stage == Stage::kOne) return QuantPolicy::weights_only();
  auto t = tables ? tables : std::make_shared<const TablePair>(default_tables());
  return accelerator_policy(std::move(t), scales, ste);
}

QuantPolicy accelerator_policy(std::shared_ptr<const TablePair> tables,
                               const DynamicScaleSet& scales, const SteConfig& ste) {
  QuantPolicy p = QuantPolicy::full_nna(std::move(tables));
  p.scales = scales;
  p.ste = ste;
  p.validate();
  return p;
}

std::vector<double> EvalOptions::default_edges() {
  std::vector<double> e;
  for (int k = -8; k <= 8; ++k) e.push_back(k);
  return e;
}

std::vector<std::size_t> Metrics::total_histogram() const {
  std::vector<std::size_t> out(edges.size() + 1, 0);
  for (const auto& gate : histogram) {
    for (std::size_t k = 0; k < gate.size() && k < out.size(); ++k) out[k] += gate[k];
  }
  return out;
}

namespace {

struct BatchLoss {
  Var task;
  ForwardOutput fwd;
};

BatchLoss batch_loss(const NetworkVars& vars, const Batch& batch, const Stack& stack, Tape& tape,
                     bool regression) {
  BatchLoss out;
  out.fwd = forward_sequence(vars, batch.input, stack, tape);
  if (regression) {
    const Var target = tape.leaf(batch.targets);
    out.task = ad::mean(ad::square(ad::sub(out.fwd.output, target)));
  } else {
    out.task = ad::softmax_cross_entropy(out.fwd.output, batch.labels);
  }
  return out;
}

double batch_metric_hits(const Tensor& output, const Batch& batch, const TaskSpec& task) {
  double hits = 0.0;
  for (std::size_t r = 0; r < output.rows(); ++r) {
    if (task.regression()) {
      if (std::abs(output(r, 0) - batch.targets(r, 0)) < task.tolerance) hits += 1.0;
    } else {
      std::size_t best = 0;
      for (std::size_t c = 1; c < output.cols(); ++c) {
        if (output(r, c) > output(r, best)) best = c;
      }
      if (static_cast<int>(best) == batch.labels[r]) hits += 1.0;
    }
  }
  return hits;
}

void check_compatible(const Network& net, const Dataset& data) {
  const NetworkSpec& s = net.spec;
  const bool ok = data.spec.tokens()
                      ? s.vocab == data.spec.vocab && s.output_dim == data.spec.output_dim()
                      : s.vocab == 0 && s.input_dim == data.spec.input_dim() &&
                            s.output_dim == data.spec.output_dim();
  if (!ok) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("network (input {}, vocab {}, output {}) does not fit task '{}'",
                            s.input_dim, s.vocab, s.output_dim, to_string(data.spec.kind)));
  }
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

TrainResult run_training(const TrainConfig& config, Network net, const Dataset& train,
                         const Dataset& val, std::ostream* log, const char* stage_name) {
  config.validate();
  check_compatible(net, train);
  if (train.count < config.batch) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("training set of {} is smaller than batch {}", train.count, config.batch));
  }
  const QuantPolicy policy = config.policy();
  const Stack stack = build_stack(net.spec, policy);
  EvalOptions eval_opts;
  eval_opts.bounds = config.bounds;

  std::vector<const Tensor*> cparams;
  for (auto& [name, t] : net.parameters()) cparams.push_back(t);
  Adam adam(config.adam, cparams);

  std::mt19937_64 rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(train.count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  TrainResult result;
  std::vector<double> recent;
  for (std::size_t step = 0; step < config.steps; ++step) {
    if (cursor + config.batch > order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const Batch batch = make_batch(train, order, cursor, config.batch);
    cursor += config.batch;

    Tape tape;
    const NetworkVars vars = bind_network(tape, net);
    BatchLoss bl = batch_loss(vars, batch, stack, tape, train.spec.regression());
    const Var act = activity_loss(bl.fwd.z, config.bounds);
    const Var loss = total_loss(bl.task, act, config.lambda);
    const double task_v = bl.task.value()[0];
    const double loss_v = loss.value()[0];
    if (!std::isfinite(loss_v)) {
      throw Error(ErrorCode::kDivergence,
                  fmt::format("{}: non-finite loss at step {} (task {}, activity {})", stage_name,
                              step, task_v, act.value()[0]));
    }
    if (step == 0) result.initial_loss = task_v;
    recent.push_back(task_v);
    if (recent.size() > 50) recent.erase(recent.begin());

    tape.backward(loss);
    std::vector<Tensor*> params;
    std::vector<const Tensor*> grads;
    auto named = net.parameters();
    for (std::size_t i = 0; i < named.size(); ++i) {
      params.push_back(named[i].second);
      grads.push_back(&vars.leaves[i].grad());
    }
    const double lr = config.lr.at(step);
    adam.step(params, grads, lr);

    if (log) {
      *log << fmt::format(
          "{{\"stage\":\"{}\",\"step\":{},\"lr\":{},\"loss\":{},\"task_loss\":{},\"activity\":{}}}\n",
          stage_name, step, fmt_double(lr), fmt_double(loss_v), fmt_double(task_v),
          fmt_double(act.value()[0]));
    }
    if (config.eval_every > 0 && (step + 1) % config.eval_every == 0 && step + 1 < config.steps &&
        val.count > 0) {
      const Metrics m = evaluate(net, val, policy, eval_opts);
      if (log) {
        *log << fmt::format("{{\"stage\":\"{}\",\"step\":{},\"eval\":{}}}\n", stage_name, step + 1,
                            metrics_json(m));
      }
    }
  }
  result.final_loss = recent.empty()
                          ? 0.0
                          : std::accumulate(recent.begin(), recent.end(), 0.0) /
                                static_cast<double>(recent.size());
  if (val.count > 0) {
    result.final_val = evaluate(net, val, policy, eval_opts);
    if (log) {
      *log << fmt::format("{{\"stage\":\"{}\",\"step\":{},\"eval\":{}}}\n", stage_name,
                          config.steps, metrics_json(result.final_val));
    }
  }
  result.checkpoint.network = std::move(net);
  result.checkpoint.meta["stage"] = stage_name;
  result.checkpoint.meta["seed"] = std::to_string(config.seed);
  result.checkpoint.meta["steps"] = std::to_string(config.steps);
  result.checkpoint.meta["lambda"] = fmt_double(config.lambda);
  result.checkpoint.meta["task"] = to_string(config.task.kind);
  return result;
}

}  // namespace

Metrics evaluate(const Network& net, const Dataset& data, const QuantPolicy& policy,
                 const EvalOptions& options) {
  options.bounds.validate();
  check_compatible(net, data);
  if (options.batch == 0) throw Error(ErrorCode::kInvalidArgument, "eval batch must be positive");
  if (!std::is_sorted(options.edges.begin(), options.edges.end())) {
    throw Error(ErrorCode::kInvalidArgument, "histogram edges must be ascending");
  }
  const Stack stack = build_stack(net.spec, policy);
  const double sig_sat = policy.pwl() ? policy.tables->sigmoid.x_hi() : 7.0;
  const double tanh_sat = policy.pwl() ? policy.tables->tanh.x_hi() : 4.0;
  const auto H = static_cast<std::size_t>(net.spec.hidden);

  Metrics m;
  m.edges = options.edges;
  m.histogram.assign(4, std::vector<std::size_t>(options.edges.size() + 1, 0));
  double hits = 0.0;
  double loss_sum = 0.0;
  double hinge_sum = 0.0;
  std::size_t outside = 0;
  std::size_t band = 0;
  for (std::size_t begin = 0; begin < data.count; begin += options.batch) {
    const std::size_t count = std::min(options.batch, data.count - begin);
    const Batch batch = make_batch(data, {}, begin, count);
    Tape tape;
    const NetworkVars vars = bind_network(tape, net);
    BatchLoss bl = batch_loss(vars, batch, stack, tape, data.spec.regression());
    loss_sum += bl.task.value()[0] * static_cast<double>(count);
    hits += batch_metric_hits(bl.fwd.output.value(), batch, data.spec);
    m.cell_saturations += bl.fwd.cell_saturations;
    for (const Var& zv : bl.fwd.z) {
      const Tensor& z = zv.value();
      for (std::size_t r = 0; r < z.rows(); ++r) {
        for (std::size_t c = 0; c < z.cols(); ++c) {
          const double x = z(r, c);
          const std::size_t gate = c / H;
          const auto bucket = static_cast<std::size_t>(
              std::upper_bound(options.edges.begin(), options.edges.end(), x) -
              options.edges.begin());
          ++m.histogram[gate][bucket];
          hinge_sum += options.bounds.hinge(x);
          if (x < options.bounds.z_min || x > options.bounds.z_max) ++outside;
          const double ax = std::abs(x);
          if (ax > 4.0 && ax < 7.0) ++band;
          if (ax >= (gate == 2 ? tanh_sat : sig_sat)) ++m.activation_saturations;
          ++m.z_count;
        }
      }
    }
  }
  if (data.count > 0) {
    const auto n = static_cast<double>(data.count);
    m.metric = hits / n;
    m.task_loss = loss_sum / n;
  }
  if (m.z_count > 0) {
    const auto nz = static_cast<double>(m.z_count);
    m.activity = hinge_sum / nz;
    m.out_of_range = static_cast<double>(outside) / nz;
    m.error_band = static_cast<double>(band) / nz;
  }
  return m;
}

TrainResult stage1_train(const TrainConfig& config, const Dataset& train, const Dataset& val,
                         std::ostream* log) {
  if (config.stage != Stage::kOne) {
    throw Error(ErrorCode::kInvalidArgument, "stage1_train needs a stage I config");
  }
  config.validate();
  Network net = Network::init(config.model.network_for(config.task), config.seed);
  return run_training(config, std::move(net), train, val, log, "stage1");
}

TrainResult stage2_train(const TrainConfig& config, const Checkpoint& init, const Dataset& train,
                         const Dataset& val, std::ostream* log) {
  if (config.stage != Stage::kTwo) {
    throw Error(ErrorCode::kInvalidArgument, "stage2_train needs a stage II config");
  }
  return run_training(config, init.network, train, val, log, "stage2");
}

std::string metrics_json(const Metrics& m) {
  std::string hist;
  for (std::size_t g = 0; g < m.histogram.size(); ++g) {
    if (g) hist += ",";
    hist += "[";
    for (std::size_t k = 0; k < m.histogram[g].size(); ++k) {
      if (k) hist += ",";
      hist += std::to_string(m.histogram[g][k]);
    }
    hist += "]";
  }
  std::string edges;
  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    if (k) edges += ",";
    edges += fmt_double(m.edges[k]);
  }
  return fmt::format(
      "{{\"metric\":{},\"task_loss\":{},\"activity\":{},\"out_of_range\":{},\"error_band\":{},"
      "\"z_count\":{},\"activation_saturations\":{},\"cell_saturations\":{},\"edges\":[{}],"
      "\"histogram\":[{}]}}",
      fmt_double(m.metric), fmt_double(m.task_loss), fmt_double(m.activity),
      fmt_double(m.out_of_range), fmt_double(m.error_band), m.z_count, m.activation_saturations,
      m.cell_saturations, edges, hist);
}

}  // namespace nnaqat
