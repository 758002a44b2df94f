// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "nnaqat/error.hpp"
#include "nnaqat/golden.hpp"

namespace nnaqat::cli {

namespace {

std::string read_bytes(const Path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const Path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
}

const char* kind_name(ActivationKind k) { return k == ActivationKind::kTanh ? "tanh" : "sigmoid"; }

std::string table_report(const PwlTable& t, const TableReport& r) {
  std::string s;
  s += fmt::format("function        {}\n", kind_name(t.kind()));
  s += fmt::format("segments        {}\n", t.segment_count());
  s += fmt::format("grid_step       2^{}\n", t.grid_exponent());
  s += fmt::format("saturation      [{}, {}]\n", t.x_lo(), t.x_hi());
  s += fmt::format("samples         {} on [-8, 8]\n", r.samples);
  s += fmt::format("max_abs_error   {:.6f}\n", r.max_abs_error);
  s += fmt::format("mean_abs_error  {:.6f}\n", r.mean_abs_error);
  s += fmt::format("codes_reachable {}/256\n", r.codes_reachable);
  s += fmt::format("monotone        {}\n", r.monotone ? "yes" : "no");
  s += fmt::format("budget          {} (max error <= {})\n",
                   r.max_abs_error <= kPwlErrorBudget ? "PASS" : "FAIL", kPwlErrorBudget);
  return s;
}

// x, true value, table value, true derivative (the activation surrogate gradient).
std::string table_series(const PwlTable& t) {
  std::string s = "x,true,approx,grad\n";
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double x = -8.0 + 16.0 * i / n;
    s += fmt::format("{},{},{},{}\n", x, t.reference(x), t.eval(x), t.reference_derivative(x));
  }
  return s;
}

// Clipped-cosine factor across a few Q1.7 bins around zero.
std::string ste_series() {
  std::string s = "x,quantized,factor\n";
  const double bin = kQ1_7.resolution();
  const int n = 800;
  for (int i = 0; i <= n; ++i) {
    const double x = -4.0 * bin + 8.0 * bin * i / n;
    s += fmt::format("{},{},{}\n", x, quantize_static(x, kQ1_7, RoundingMode::kTowardZero),
                     ste_factor(SteConfig::clipped_cosine(), x, bin));
  }
  return s;
}

QuantPolicy policy_named(const std::string& name, const Json& config) {
  if (name == "off") return QuantPolicy::off();
  if (name == "weights") return QuantPolicy::weights_only();
  if (name == "nna") {
    const ExperimentConfig x = experiment_config(config);
    return accelerator_policy(load_tables(config), x.scales, x.ste);
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown policy '{}' (expected off, weights or nna)", name));
}

Split split_named(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown split '{}' (expected train, val or test)", name));
}

struct TensorMse {
  double mse = 0.0;
  double max_abs = 0.0;
};

TensorMse quantization_mse(const Tensor& t, const std::optional<QFormat>& q, RoundingMode mode) {
  TensorMse r;
  if (!q || t.size() == 0) return r;
  for (double v : t.data()) {
    const double e = v - quantize_static(v, *q, mode);
    r.mse += e * e;
    r.max_abs = std::max(r.max_abs, std::abs(e));
  }
  r.mse /= static_cast<double>(t.size());
  return r;
}

}  // namespace

int tables_build(const Json& config, const std::optional<Path>& from) {
  const Path dir = out_dir(config);
  const PwlTable tanh = [&] {
    if (from) {
      PwlTable t = parse_table(read_bytes(*from));
      if (t.kind() != ActivationKind::kTanh) {
        throw Error(ErrorCode::kInvalidArgument, "--from expects a tanh table");
      }
      return t;
    }
    const int segments = config.at("tables").at("segments").get<int>();
    const int grid_exp = config.at("tables").at("grid_exponent").get<int>();
    return build_tanh_table(segments, std::ldexp(1.0, grid_exp));
  }();
  const PwlTable sigmoid = derive_sigmoid_table(tanh);
  std::string report;
  bool ok = true;
  for (const PwlTable* t : {&tanh, &sigmoid}) {
    const TableReport r = analyze_table(*t);
    ok = ok && r.max_abs_error <= kPwlErrorBudget && r.monotone;
    report += table_report(*t, r) + "\n";
    write_bytes(dir / fmt::format("{}.pwl", kind_name(t->kind())), serialize_table(*t));
    write_bytes(dir / fmt::format("{}_series.csv", kind_name(t->kind())), table_series(*t));
  }
  write_bytes(dir / "ste_series.csv", ste_series());
  write_bytes(dir / "tables_report.txt", report);
  std::cout << report;
  return ok ? kExitOk : kExitInvariant;
}

int tables_inspect(const Json&, const Path& file) {
  const PwlTable t = parse_table(read_bytes(file));
  const TableReport r = analyze_table(t);
  std::cout << table_report(t, r);
  return r.max_abs_error <= kPwlErrorBudget && r.monotone ? kExitOk : kExitInvariant;
}

int tables_export(const Json& config, const Path& file) {
  const PwlTable t = parse_table(read_bytes(file));
  const Path dir = out_dir(config);
  const Path table_out = dir / fmt::format("{}.pwl", kind_name(t.kind()));
  const Path series_out = dir / fmt::format("{}_series.csv", kind_name(t.kind()));
  write_bytes(table_out, serialize_table(t));
  write_bytes(series_out, table_series(t));
  std::cout << fmt::format("wrote {} and {}\n", table_out.string(), series_out.string());
  return kExitOk;
}

int analyze(const Json& config, const Path& checkpoint, const std::string& policy_name,
            const std::string& split_name) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const ExperimentConfig x = experiment_config(config);
  const QuantPolicy policy = policy_named(policy_name, config);
  const QuantPolicy q = policy_named("nna", config);
  const auto seed = config.at("seed").get<std::uint64_t>();
  const Dataset data = gen_task(x.task, seed, split_named(split_name));
  EvalOptions opts = x.eval;
  opts.bounds = x.bounds;

  const Metrics fp = evaluate(ckpt.network, data, QuantPolicy::weights_only(), opts);
  const Metrics m = evaluate(ckpt.network, data, policy, opts);
  const Metrics mq = policy_name == "nna" ? m : evaluate(ckpt.network, data, q, opts);

  std::string out;
  out += fmt::format("checkpoint      {}\n", checkpoint.string());
  out += fmt::format("network         {} x {} LSTM, input {}, output {}\n", ckpt.network.spec.layers,
                     ckpt.network.spec.hidden, ckpt.network.spec.input_dim,
                     ckpt.network.spec.output_dim);
  out += fmt::format("dataset         {} / {} ({} samples, seed {})\n", to_string(x.task.kind),
                     split_name, data.count, seed);
  out += fmt::format("policy          {}\n\n", policy_name);
  out += fmt::format("metric (FP)     {:.6f}\n", fp.metric);
  out += fmt::format("metric (Q)      {:.6f}\n", mq.metric);
  out += fmt::format("PTQ delta       {:+.2f}% (positive = better)\n", relative_delta(mq.metric, fp.metric));
  out += fmt::format("task loss       {:.6f}\n", m.task_loss);
  out += fmt::format("out of range    {:.6f} of {} pre-activations outside [{}, {}]\n",
                     m.out_of_range, m.z_count, x.bounds.z_min, x.bounds.z_max);
  out += fmt::format("error band      {:.6f} with 4 < |z| < 7\n", m.error_band);
  out += fmt::format("saturations     activation {}, cell {}\n\n", m.activation_saturations,
                     m.cell_saturations);

  out += "quantization MSE per tensor\n";
  out += fmt::format("  {:<12} {:>9} {:>14} {:>12}\n", "tensor", "shape", "mse", "max_abs");
  for (const auto& [name, t] : ckpt.network.parameters()) {
    const bool bias = name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0;
    std::optional<QFormat> fmt_q;
    RoundingMode mode = RoundingMode::kNearestTiesAway;
    if (bias) {
      if (policy.quantize_bias) fmt_q = QFormat(32 - kAccumulatorFracBits, kAccumulatorFracBits);
    } else if (policy.weights) {
      fmt_q = policy.weights->format;
      mode = policy.weights->rounding;
    }
    const TensorMse e = quantization_mse(*t, fmt_q, mode);
    out += fmt::format("  {:<12} {:>9} {:>14.6e} {:>12.6e}\n", name, t->shape_string(), e.mse,
                       e.max_abs);
  }
  out += "\npre-activation histogram per gate (bucket [lo, hi))\n";
  out += fmt::format("  {:>16} {:>9} {:>9} {:>9} {:>9}\n", "bucket", "i", "f", "g", "o");
  for (std::size_t k = 0; k <= m.edges.size(); ++k) {
    const std::string lo = k == 0 ? "-inf" : fmt::format("{}", m.edges[k - 1]);
    const std::string hi = k == m.edges.size() ? "inf" : fmt::format("{}", m.edges[k]);
    out += fmt::format("  {:>16} {:>9} {:>9} {:>9} {:>9}\n", fmt::format("[{}, {})", lo, hi),
                       m.histogram[0][k], m.histogram[1][k], m.histogram[2][k], m.histogram[3][k]);
  }
  const Path dir = out_dir(config);
  write_bytes(dir / "analyze.txt", out);
  write_bytes(dir / "analyze.json",
              fmt::format("{{\"fp\":{},\"policy\":{},\"q\":{}}}\n", metrics_json(fp),
                          metrics_json(m), metrics_json(mq)));
  std::cout << out;
  return kExitOk;
}

int golden_input(const Json& config, const Path& checkpoint, std::size_t steps, const Path& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  if (ckpt.network.embedding) {
    throw Error(ErrorCode::kInvalidArgument, "golden inputs need a real-input network");
  }
  std::mt19937_64 rng(config.at("seed").get<std::uint64_t>());
  // Wide enough to exercise every dynamic scale.
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  const auto dim = static_cast<std::size_t>(ckpt.network.spec.input_dim);
  std::vector<std::vector<double>> seq(steps, std::vector<double>(dim));
  for (auto& s : seq) {
    for (double& v : s) v = dist(rng) * (std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 1.0 : 0.05);
  }
  write_bytes(out, serialize_sequence(seq, dim));
  std::cout << fmt::format("wrote {} ({} steps x {})\n", out.string(), steps, dim);
  return kExitOk;
}

int golden_generate(const Json&, const Path& checkpoint, const Path& input, const Path& table,
                    const Path& trace) {
  const GoldenTrace t = golden_run(read_bytes(checkpoint), read_bytes(table), read_bytes(input));
  write_bytes(trace, serialize_trace(t));
  std::cout << fmt::format("wrote {} ({} records, {} steps)\n", trace.string(), t.records.size(),
                           t.header.steps);
  return kExitOk;
}

int golden_verify(const Json&, const Path& checkpoint, const Path& input, const Path& table,
                  const Path& trace) {
  const GoldenTrace expected = parse_trace(read_bytes(trace));
  const GoldenTrace actual =
      emulate_trace(read_bytes(checkpoint), read_bytes(table), read_bytes(input));
  if (const auto d = compare_traces(expected, actual)) {
    std::cout << "FAIL " << d->describe() << "\n";
    return kExitDivergence;
  }
  std::cout << fmt::format("PASS {} records match\n", expected.records.size());
  return kExitOk;
}

int train(const Json& config, int stage, const std::optional<Path>& init) {
  const Path dir = out_dir(config);
  std::filesystem::create_directories(dir);
  const TrainConfig tc = train_config(config, stage == 1 ? Stage::kOne : Stage::kTwo);
  const Dataset tr = gen_task(tc.task, tc.seed, Split::kTrain);
  const Dataset va = gen_task(tc.task, tc.seed, Split::kVal);
  std::ofstream log(dir / fmt::format("stage{}.jsonl", stage));
  TrainResult r;
  if (stage == 1) {
    r = stage1_train(tc, tr, va, &log);
  } else {
    if (!init) throw Error(ErrorCode::kInvalidArgument, "stage 2 needs --init <checkpoint>");
    r = stage2_train(tc, load_checkpoint(*init), tr, va, &log);
  }
  const Path ckpt = dir / fmt::format("stage{}.ckpt", stage);
  save_checkpoint(r.checkpoint, ckpt);
  std::cout << fmt::format("stage {}: {} steps, task loss {:.6f} -> {:.6f}\n", stage, tc.steps,
                           r.initial_loss, r.final_loss);
  std::cout << fmt::format("validation metric {:.6f}, out-of-range {:.6f}\n", r.final_val.metric,
                           r.final_val.out_of_range);
  std::cout << fmt::format("wrote {}\n", ckpt.string());
  return kExitOk;
}

int experiment(const Json& config) {
  ExperimentConfig x = experiment_config(config);
  x.tables = load_tables(config);
  const ExperimentResult r = run_experiment(x, out_dir(config));
  std::cout << format_summary(r);
  return kExitOk;
}

}  // namespace nnaqat::cli
