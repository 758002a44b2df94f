// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/experiment.hpp"

#include <sstream>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "nnaqat/error.hpp"

namespace nnaqat {

void ExperimentConfig::validate() const {
  task.validate();
  bounds.validate();
  stage1_lr.validate();
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "experiment needs at least one seed");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (!(stage2_lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "stage2 lr must be positive");
  if (batch == 0) throw Error(ErrorCode::kInvalidArgument, "batch must be positive");
}

TrainConfig ExperimentConfig::stage1_config(std::uint64_t seed, double lam) const {
  TrainConfig c;
  c.stage = Stage::kOne;
  c.lambda = lam;
  c.bounds = bounds;
  c.steps = stage1_steps;
  c.batch = batch;
  c.lr = stage1_lr;
  c.adam = adam;
  c.seed = seed;
  c.task = task;
  c.model = model;
  c.eval_every = eval_every;
  c.tables = resolved_tables();
  c.scales = scales;
  c.ste = ste;
  return c;
}

TrainConfig ExperimentConfig::stage2_config(std::uint64_t seed) const {
  TrainConfig c = stage1_config(seed, lambda);
  c.stage = Stage::kTwo;
  c.steps = stage2_steps;
  c.lr = LrSchedule::constant(stage2_lr, stage2_steps);
  return c;
}

std::shared_ptr<const TablePair> ExperimentConfig::resolved_tables() const {
  return tables ? tables : std::make_shared<const TablePair>(default_tables());
}

double relative_delta(double metric, double reference) {
  if (reference == 0.0) return 0.0;
  return 100.0 * (metric - reference) / reference;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  detail::write_file(path.string(), text);
}

std::string eval_record(const char* row, const Metrics& m) {
  return fmt::format("{{\"row\":\"{}\",\"metrics\":{}}}\n", row, metrics_json(m));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  ExperimentConfig cfg = config;
  cfg.tables = config.resolved_tables();
  const auto& tables = cfg.tables;
  const QuantPolicy fp = QuantPolicy::weights_only();
  const QuantPolicy q = accelerator_policy(tables, config.scales, config.ste);
  EvalOptions eval = config.eval;
  eval.bounds = config.bounds;

  ExperimentResult result;
  for (std::uint64_t seed : config.seeds) {
    std::optional<std::filesystem::path> dir;
    if (out_dir) {
      dir = *out_dir / fmt::format("seed-{}", seed);
      std::filesystem::create_directories(*dir);
    }
    const Dataset train = gen_task(config.task, seed, Split::kTrain);
    const Dataset val = gen_task(config.task, seed, Split::kVal);
    const Dataset test = gen_task(config.task, seed, Split::kTest);

    SeedResult r;
    r.seed = seed;
    std::string evals;
    auto flush = [&](const char* name, const std::string& text) {
      if (dir) write_text(*dir / name, text);
    };
    auto save = [&](const char* name, const Checkpoint& ckpt) {
      if (dir) save_checkpoint(ckpt, *dir / name);
    };

    {
      std::ostringstream log;
      r.baseline = stage1_train(cfg.stage1_config(seed, 0.0), train, val, &log);
      flush("baseline.jsonl", log.str());
      save("baseline.ckpt", r.baseline.checkpoint);
    }
    r.baseline_fp = evaluate(r.baseline.checkpoint.network, test, fp, eval);
    r.baseline_q = evaluate(r.baseline.checkpoint.network, test, q, eval);
    evals += eval_record("baseline_fp", r.baseline_fp);
    evals += eval_record("baseline_q", r.baseline_q);
    flush("eval.jsonl", evals);

    if (config.lambda == 0.0) {
      // Identical config and seed: the regularized run would reproduce the baseline.
      r.stage1 = r.baseline;
    } else {
      std::ostringstream log;
      r.stage1 = stage1_train(cfg.stage1_config(seed, config.lambda), train, val, &log);
      flush("stage1.jsonl", log.str());
    }
    save("stage1.ckpt", r.stage1.checkpoint);
    r.stage1_fp = evaluate(r.stage1.checkpoint.network, test, fp, eval);
    r.stage1_q = evaluate(r.stage1.checkpoint.network, test, q, eval);
    evals += eval_record("stage1_fp", r.stage1_fp);
    evals += eval_record("stage1_q", r.stage1_q);
    flush("eval.jsonl", evals);

    {
      std::ostringstream log;
      r.stage2 = stage2_train(cfg.stage2_config(seed), r.stage1.checkpoint, train, val, &log);
      flush("stage2.jsonl", log.str());
      save("stage2.ckpt", r.stage2.checkpoint);
    }
    r.stage2_q = evaluate(r.stage2.checkpoint.network, test, q, eval);
    evals += eval_record("stage2_q", r.stage2_q);
    flush("eval.jsonl", evals);

    result.seeds.push_back(std::move(r));
    if (out_dir) {
      write_text(*out_dir / "summary.txt", format_summary(result));
      write_text(*out_dir / "summary.json", summary_json(result));
    }
  }
  return result;
}

std::string format_summary(const ExperimentResult& result) {
  struct Row {
    const char* name;
    const Metrics SeedResult::*field;
  };
  const Row rows[] = {
      {"Baseline (FP)", &SeedResult::baseline_fp},
      {"Baseline (Q)", &SeedResult::baseline_q},
      {"AAT Stage I (Q)", &SeedResult::stage1_q},
      {"AAT Stage II (Q)", &SeedResult::stage2_q},
  };
  std::string out = "Relative metric change vs Baseline (FP), % (positive = better)\n\n";
  out += fmt::format("{:<18}", "Model");
  for (const SeedResult& s : result.seeds) out += fmt::format("  {:>8} {:>8}", fmt::format("s{}", s.seed), "rel%");
  out += fmt::format("  {:>8}\n", "mean rel%");
  for (const Row& row : rows) {
    out += fmt::format("{:<18}", row.name);
    double sum = 0.0;
    for (const SeedResult& s : result.seeds) {
      const double m = (s.*row.field).metric;
      const double d = relative_delta(m, s.baseline_fp.metric);
      sum += d;
      out += fmt::format("  {:>8.4f} {:>8.2f}", m, d);
    }
    const double mean = result.seeds.empty() ? 0.0 : sum / static_cast<double>(result.seeds.size());
    out += fmt::format("  {:>8.2f}\n", mean);
  }
  out += "\nOut-of-range pre-activation fraction (test set)\n";
  for (const SeedResult& s : result.seeds) {
    out += fmt::format("  seed {}: baseline {:.6f}, stage I {:.6f}\n", s.seed,
                       s.baseline_fp.out_of_range, s.stage1_fp.out_of_range);
  }
  return out;
}

std::string summary_json(const ExperimentResult& result) {
  std::string out = "{\"seeds\":[";
  for (std::size_t i = 0; i < result.seeds.size(); ++i) {
    const SeedResult& s = result.seeds[i];
    if (i) out += ",";
    out += fmt::format(
        "{{\"seed\":{},\"baseline_fp\":{},\"baseline_q\":{},\"stage1_fp\":{},\"stage1_q\":{},"
        "\"stage2_q\":{}}}",
        s.seed, metrics_json(s.baseline_fp), metrics_json(s.baseline_q), metrics_json(s.stage1_fp),
        metrics_json(s.stage1_q), metrics_json(s.stage2_q));
  }
  out += "]}\n";
  return out;
}

}  // namespace nnaqat
