// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Oracles here are written
// independently of the library code they check.

#include <quadmath.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nnaqat/checkpoint.hpp"
#include "nnaqat/experiment.hpp"
#include "nnaqat/golden.hpp"
#include "nnaqat/nna_engine.hpp"

using namespace nnaqat;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------- oracles

// Round half away from zero / toward zero on the 2^-n grid with clipping,
// computed on integer codes.
double oracle_quantize(double x, int m, int n, bool nearest) {
  const double scaled = std::ldexp(x, n);  // exact: power-of-two scaling
  const double lo = -std::ldexp(1.0, m + n - 1);
  const double hi = std::ldexp(1.0, m + n - 1) - 1.0;
  double code = nearest ? std::floor(std::fabs(scaled) + 0.5) : std::floor(std::fabs(scaled));
  if (scaled < 0) code = -code;
  code = std::min(hi, std::max(lo, code));
  return std::ldexp(code, -n) + 0.0;
}

double fmin_of(const QFormat& q) { return -std::ldexp(1.0, q.int_bits() - 1); }
double fmax_of(const QFormat& q) {
  return std::ldexp(1.0, q.int_bits() - 1) - std::ldexp(1.0, -q.frac_bits());
}

std::int64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  if (std::signbit(a) != std::signbit(b)) {
    return ulp_distance(std::fabs(a), 0.0) + ulp_distance(std::fabs(b), 0.0);
  }
  const auto ia = std::bit_cast<std::int64_t>(std::fabs(a));
  const auto ib = std::bit_cast<std::int64_t>(std::fabs(b));
  return ia > ib ? ia - ib : ib - ia;
}

double quad_clipped_cosine(double u, double freq) {
  static const __float128 pi = acosq(static_cast<__float128>(-1));
  const __float128 v = 2 * pi * static_cast<__float128>(freq) * static_cast<__float128>(u);
  __float128 c = cosq(v);
  if (c < 0) c = 0;
  if (c > 1) c = 1;
  return static_cast<double>(c);
}

// ---------------------------------------------------------------- criteria

Outcome quantizer_correctness() {
  Outcome o;
  int failures = 0;
  // Exhaustive Q1.7 round trip.
  for (std::int64_t code = -128; code <= 127; ++code) {
    const double v = decode(code, kQ1_7);
    if (v != std::ldexp(static_cast<double>(code), -7)) ++failures;
    for (RoundingMode mode : {RoundingMode::kNearestTiesAway, RoundingMode::kTowardZero}) {
      if (encode(v, kQ1_7, mode) != code) ++failures;
      if (decode(encode(v, kQ1_7, mode), kQ1_7) != quantize_static(v, kQ1_7, mode)) ++failures;
    }
  }
  const QFormat q32(3, 2);
  const QRange r = qformat_range(q32);
  if (r.min != -4.0 || r.max != 3.75 || r.resolution != 0.25) ++failures;
  if (q32.min_code() != -16 || q32.max_code() != 15) ++failures;
  if (encode(3.75, q32, RoundingMode::kNearestTiesAway) != 15) ++failures;
  if (encode(-4.0, q32, RoundingMode::kNearestTiesAway) != -16) ++failures;

  // 10^6 random in-range samples per format: error bound and oracle match.
  std::mt19937_64 rng(101);
  double worst_ratio = 0.0;
  for (const QFormat q : {kQ1_7, QFormat(3, 2), QFormat(8, 8), QFormat(2, 14)}) {
    std::uniform_real_distribution<double> dist(fmin_of(q), fmax_of(q));
    const double bound = std::ldexp(1.0, -(q.frac_bits() + 1));
    for (int i = 0; i < 1'000'000; ++i) {
      const double x = dist(rng);
      const double qx = quantize_static(x, q, RoundingMode::kNearestTiesAway);
      const double err = std::fabs(x - qx);
      if (err > bound) ++failures;
      worst_ratio = std::max(worst_ratio, err / bound);
      if (qx != oracle_quantize(x, q.int_bits(), q.frac_bits(), true)) ++failures;
      const double tz = quantize_static(x, q, RoundingMode::kTowardZero);
      if (tz != oracle_quantize(x, q.int_bits(), q.frac_bits(), false)) ++failures;
      if (decode(encode(x, q, RoundingMode::kTowardZero), q) != tz) ++failures;
    }
  }
  o.pass = failures == 0;
  o.detail = fmt::format("256 codes + 4x10^6 samples, {} failures, worst error/bound {:.6f}",
                         failures, worst_ratio);
  return o;
}

Outcome dynamic_quantization() {
  Outcome o;
  int failures = 0;
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> len(1, 16);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> mag(0, 6);
  std::size_t scale_hist[5] = {};
  int clipped = 0;
  for (int t = 0; t < 100'000; ++t) {
    const DynamicScaleSet& set = (t % 4 == 3) ? DynamicScaleSet::sparse() : DynamicScaleSet::standard();
    std::vector<double> xs(static_cast<std::size_t>(len(rng)));
    const double spread = std::ldexp(1.0, mag(rng) - 1);  // 0.5 .. 32
    for (double& x : xs) x = unit(rng) * spread;
    if (t % 7 == 0) xs.back() = std::ldexp(static_cast<double>(std::uniform_int_distribution<int>(-64, 63)(rng)), -4);
    // Brute force: the first scale that fits every element, else the largest.
    double s_oracle = set.scales().back();
    for (double s : set.scales()) {
      bool fits = true;
      for (double x : xs) fits = fits && x / s >= fmin_of(kQ1_7) && x / s <= fmax_of(kQ1_7);
      if (fits) {
        s_oracle = s;
        break;
      }
    }
    const DynamicResult res = quantize_dynamic(xs, kQ1_7, set);
    if (res.scale != s_oracle) ++failures;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double expect = s_oracle * oracle_quantize(xs[i] / s_oracle, 1, 7, false);
      if (res.values[i] != expect) ++failures;
      if (std::fabs(xs[i] / s_oracle) > 1.0) ++clipped;
    }
    // Minimality: the next smaller allowed scale must overflow.
    const auto& sc = set.scales();
    for (std::size_t k = 1; k < sc.size(); ++k) {
      if (sc[k] == res.scale) {
        bool overflow = false;
        for (double x : xs) overflow = overflow || x / sc[k - 1] < fmin_of(kQ1_7) || x / sc[k - 1] > fmax_of(kQ1_7);
        if (!overflow) ++failures;
      }
    }
    ++scale_hist[std::min(4, std::ilogb(res.scale))];
  }
  o.pass = failures == 0;
  o.detail = fmt::format("10^5 tensors, {} failures, scale counts S=1:{} 2:{} 4:{} 8:{} 16:{}, {} clipped elements",
                         failures, scale_hist[0], scale_hist[1], scale_hist[2], scale_hist[3],
                         scale_hist[4], clipped);
  return o;
}

Outcome emulator_engine_equivalence() {
  Outcome o;
  const auto tables = std::make_shared<const TablePair>(default_tables());
  const QuantPolicy policy = QuantPolicy::full_nna(tables);
  int mismatched = 0;
  std::size_t compared = 0;
  std::size_t cell_sat = 0;
  std::set<std::int64_t> scales_seen;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(3000 + trial);
    const int H = std::array{4, 8, 64}[trial % 3];
    const int D = std::uniform_int_distribution<int>(1, 8)(rng);
    const int L = std::uniform_int_distribution<int>(1, 3)(rng);
    const int T = std::uniform_int_distribution<int>(1, 32)(rng);
    const NetworkSpec spec{D, H, L, std::uniform_int_distribution<int>(1, 4)(rng), 0};
    Network net = Network::init(spec, static_cast<std::uint64_t>(trial));
    const double wscale = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (auto& [name, t] : net.parameters()) {
      for (double& v : t->data()) v = nd(rng) * wscale;
    }
    const double xscale = std::ldexp(1.0, std::uniform_int_distribution<int>(-3, 4)(rng));
    std::vector<std::vector<double>> in(static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(D)));
    SequenceInput si;
    for (auto& step : in) {
      for (double& v : step) v = nd(rng) * xscale;
      si.steps.push_back(Tensor::row(step));
    }
    Tape tape;
    const NetworkVars vars = bind_network(tape, net);
    SequenceProbe emu;
    forward_sequence(vars, si, build_stack(spec, policy), tape, &emu);
    const EngineRun run = engine_run(EngineNetwork::from(net, *tables, DynamicScaleSet::standard()), in);
    const auto a = records_from_probe(emu);
    const auto b = records_from_probe(run.probe);
    compared += a.size();
    if (a != b) ++mismatched;
    cell_sat += run.counters.cell_saturations;
    for (const auto& rec : b) {
      if (rec.probe == Probe::kInputScaleExp) scales_seen.insert(rec.values.begin(), rec.values.end());
    }
  }
  o.pass = mismatched == 0;
  o.detail = fmt::format("{} configurations, {} probe records, {} mismatching runs, {} cell saturations, {} distinct input scales",
                         trials, compared, mismatched, cell_sat, scales_seen.size());
  return o;
}

// Small real-input LSTM loss for finite differences.
double fd_loss(const Network& net, const SequenceInput& in, const std::vector<int>& labels,
               Tape& tape, NetworkVars* out_vars, Var* out_loss) {
  const NetworkVars vars = bind_network(tape, net);
  const ForwardOutput f = forward_sequence(vars, in, build_stack(net.spec, QuantPolicy::off()), tape);
  const Var ce = ad::softmax_cross_entropy(f.output, labels);
  const Var reg = ad::mean(ad::square(ad::concat_cols(f.z)));
  const Var loss = ad::add(ce, ad::scale(reg, 0.01));
  if (out_vars) *out_vars = vars;
  if (out_loss) *out_loss = loss;
  return loss.value()[0];
}

Outcome gradient_contracts() {
  Outcome o;
  // (a) finite differences on a quantization-free network.
  double worst_fd = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const NetworkSpec spec{3, 4, 2, 3, 0};
    Network net = Network::init(spec, 40 + trial);
    std::mt19937_64 rng(50 + trial);
    std::normal_distribution<double> nd(0.0, 0.5);
    for (auto& [name, t] : net.parameters()) {
      for (double& v : t->data()) v = nd(rng);
    }
    SequenceInput in;
    for (int t = 0; t < 4; ++t) {
      Tensor x(2, 3);
      for (double& v : x.data()) v = nd(rng) * 2;
      in.steps.push_back(x);
    }
    const std::vector<int> labels{0, 2};
    Tape tape;
    NetworkVars vars;
    Var loss;
    fd_loss(net, in, labels, tape, &vars, &loss);
    tape.backward(loss);
    double num = 0.0;
    double den = 0.0;
    auto params = net.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
      Tensor& t = *params[p].second;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double orig = t[k];
        const double h = 1e-5 * std::max(1.0, std::fabs(orig));
        t[k] = orig + h;
        Tape tp;
        const double up = fd_loss(net, in, labels, tp, nullptr, nullptr);
        t[k] = orig - h;
        Tape tm;
        const double dn = fd_loss(net, in, labels, tm, nullptr, nullptr);
        t[k] = orig;
        const double fd = (up - dn) / (2 * h);
        const double ad_g = vars.leaves[p].grad()[k];
        num += (fd - ad_g) * (fd - ad_g);
        den += fd * fd;
      }
    }
    worst_fd = std::max(worst_fd, std::sqrt(num / den));
  }
  const bool fd_ok = worst_fd <= 1e-6;

  // (b) clipped-cosine factor against a quad-precision closed form.
  std::int64_t worst_ulp = 0;
  int exact_failures = 0;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ud(-8.0, 8.0);
  const double bin = kQ1_7.resolution();
  for (int i = 0; i < 100'000; ++i) {
    const double u = ud(rng);
    const double freq = (i % 10 == 9) ? 2.0 : 1.0;
    const double got = ste_factor(SteConfig::clipped_cosine(freq), u * bin, bin);
    worst_ulp = std::max(worst_ulp, ulp_distance(got, quad_clipped_cosine(u, freq)));
  }
  for (int k = -64; k <= 64; ++k) {
    const SteConfig ste = SteConfig::clipped_cosine();
    if (ste_factor(ste, k * bin, bin) != 1.0) ++exact_failures;
    for (double off : {0.25, -0.25, 0.5, -0.5}) {
      if (ste_factor(ste, (k + off) * bin, bin) != 0.0) ++exact_failures;
    }
  }
  const bool ste_ok = worst_ulp <= 1 && exact_failures == 0;

  // (c) activation-node backward is the true derivative.
  const TablePair tables = default_tables();
  double worst_act = 0.0;
  Tensor x(1, 20001);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = -10.0 + 20.0 * static_cast<double>(k) / 20000.0;
  for (const PwlTable* t : {&tables.tanh, &tables.sigmoid}) {
    Tape tape;
    const Var xv = tape.leaf(x);
    tape.backward(ad::sum(ad::activation(xv, *t)));
    for (std::size_t k = 0; k < x.size(); ++k) {
      double expect;
      if (t->kind() == ActivationKind::kTanh) {
        const double th = std::tanh(x[k]);
        expect = 1.0 - th * th;
      } else {
        const double s = 1.0 / (1.0 + std::exp(-x[k]));
        expect = s * (1.0 - s);
      }
      worst_act = std::max(worst_act, std::fabs(xv.grad()[k] - expect));
    }
  }
  const bool act_ok = worst_act <= 1e-12;
  o.pass = fd_ok && ste_ok && act_ok;
  o.detail = fmt::format("(a) FD rel error {:.2e}; (b) max {} ulp over 10^5 points, {} exact-point failures; (c) max |err| {:.2e}",
                         worst_fd, worst_ulp, exact_failures, worst_act);
  return o;
}

Outcome pwl_accuracy() {
  Outcome o;
  const TablePair tables = default_tables();
  double err_t = 0.0;
  double err_s = 0.0;
  bool mono = true;
  double prev_t = -2.0;
  double prev_s = -1.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double x = -8.0 + 16.0 * i / (n - 1);
    const double t = tables.tanh.eval(x);
    const double s = tables.sigmoid.eval(x);
    err_t = std::max(err_t, std::fabs(t - std::tanh(x)));
    err_s = std::max(err_s, std::fabs(s - 1.0 / (1.0 + std::exp(-x))));
    mono = mono && t >= prev_t && s >= prev_s;
    prev_t = t;
    prev_s = s;
  }
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> ud(-12.0, 12.0);
  std::vector<double> xs(1'000'000);
  for (double& x : xs) x = ud(rng);
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    mono = mono && tables.tanh.eval(xs[i]) >= tables.tanh.eval(xs[i - 1]) &&
           tables.sigmoid.eval(xs[i]) >= tables.sigmoid.eval(xs[i - 1]);
  }
  const bool exact = tables.tanh.eval(0.0) == 0.0 && tables.sigmoid.eval(0.0) == 0.5;
  o.pass = err_t <= 0.01 && err_s <= 0.01 && mono && exact;
  o.detail = fmt::format("max error tanh {:.6f}, sigmoid {:.6f}; tanh(0)={} sigmoid(0)={}; monotone {}",
                         err_t, err_s, tables.tanh.eval(0.0), tables.sigmoid.eval(0.0), mono ? "yes" : "no");
  return o;
}

ExperimentConfig desk_config() {
  ExperimentConfig c;  // library defaults are the desk configuration
  c.tables = std::make_shared<const TablePair>(default_tables());
  return c;
}

struct DeskRuns {
  TrainResult control;  // lambda = 0
  TrainResult regularized;
  Metrics control_m;
  Metrics regularized_m;
};

DeskRuns& desk_runs() {
  static DeskRuns runs;
  return runs;
}

Outcome activity_regularizer() {
  Outcome o;
  int failures = 0;
  const ActivityBounds b;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> inside(-4.0, 4.0);
  std::uniform_real_distribution<double> outside(4.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor z(3, 17);
    for (double& v : z.data()) v = inside(rng);
    if (trial % 3 == 0) z[0] = -4.0, z[1] = 4.0;  // the ends count as inside
    if (activity_value(z, b) != 0.0) ++failures;
    const bool poke = trial % 2 == 1;
    std::size_t k = 0;
    if (poke) {
      k = static_cast<std::size_t>(trial) % z.size();
      z[k] = (trial % 4 == 1 ? 1.0 : -1.0) * outside(rng);
      if (!(activity_value(z, b) > 0.0)) ++failures;
    }
    Tape tape;
    const Var zv = tape.leaf(z);
    tape.backward(activity_loss(zv, b));
    const double inv = 1.0 / static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double expect = z[i] > 4.0 ? inv : (z[i] < -4.0 ? -inv : 0.0);
      if (zv.grad()[i] != expect) ++failures;
    }
  }
  // Desk run: lambda = 0 control vs lambda = 2, same seed.
  const ExperimentConfig cfg = desk_config();
  const std::uint64_t seed = cfg.seeds.front();
  const Dataset train = gen_task(cfg.task, seed, Split::kTrain);
  const Dataset val = gen_task(cfg.task, seed, Split::kVal);
  const Dataset test = gen_task(cfg.task, seed, Split::kTest);
  DeskRuns& runs = desk_runs();
  runs.control = stage1_train(cfg.stage1_config(seed, 0.0), train, val);
  runs.regularized = stage1_train(cfg.stage1_config(seed, cfg.lambda), train, val);
  EvalOptions eo = cfg.eval;
  eo.bounds = cfg.bounds;
  runs.control_m = evaluate(runs.control.checkpoint.network, test, QuantPolicy::weights_only(), eo);
  runs.regularized_m = evaluate(runs.regularized.checkpoint.network, test, QuantPolicy::weights_only(), eo);
  const double before = runs.control_m.out_of_range;
  const double after = runs.regularized_m.out_of_range;
  const double drop = before > 0.0 ? (before - after) / before : 0.0;
  o.pass = failures == 0 && before > 0.0 && drop >= 0.5;
  o.detail = fmt::format("{} property failures; out-of-range fraction {:.6f} (lambda=0) -> {:.6f} (lambda={}), drop {:.1f}%; loss {:.4f} -> {:.4f}",
                         failures, before, after, cfg.lambda, 100.0 * drop,
                         runs.regularized.initial_loss, runs.regularized.final_loss);
  return o;
}

ExperimentResult& experiment_result() {
  static ExperimentResult r;
  return r;
}

Outcome table1_direction() {
  Outcome o;
  const ExperimentConfig cfg = desk_config();
  ExperimentResult& res = experiment_result();
  res = run_experiment(cfg);
  std::string d;
  for (const SeedResult& s : res.seeds) {
    const double fp = s.baseline_fp.metric;
    const double ptq = s.baseline_q.metric;
    const double aat = s.stage2_q.metric;
    const double degradation = (fp - ptq) / fp;
    const double recovered = fp > ptq ? (aat - ptq) / (fp - ptq) : 0.0;
    const bool ok = degradation > 0.02 && recovered >= 0.5 && aat >= ptq;
    o.pass = o.pass && ok;
    d += fmt::format("seed {}: FP {:.4f} PTQ {:.4f} AAT {:.4f} (degradation {:.1f}%, recovered {:.1f}%){}; ",
                     s.seed, fp, ptq, aat, 100.0 * degradation, 100.0 * recovered, ok ? "" : " FAIL");
  }
  o.detail = d;
  return o;
}

Outcome determinism() {
  Outcome o;
  int failures = 0;
  std::string notes;
  // Repeated desk pipeline: criterion 6's runs and the experiment's seed-1 runs
  // used the same config and seed.
  const ExperimentResult& res = experiment_result();
  if (!res.seeds.empty() && desk_runs().control.checkpoint.network.layers.size() > 0) {
    const auto a = serialize_checkpoint(desk_runs().control.checkpoint);
    const auto b = serialize_checkpoint(res.seeds.front().baseline.checkpoint);
    const auto c = serialize_checkpoint(desk_runs().regularized.checkpoint);
    const auto e = serialize_checkpoint(res.seeds.front().stage1.checkpoint);
    if (a != b || c != e) ++failures;
    notes += "desk checkpoints repeat; ";
  } else {
    ++failures;
    notes += "desk runs unavailable; ";
  }
  // Small pipeline twice: checkpoints, logs, reports and artifacts.
  ExperimentConfig small = desk_config();
  small.stage1_steps = 60;
  small.stage1_lr.total_steps = 60;
  small.stage2_steps = 20;
  small.seeds = {7};
  small.task.train_size = 256;
  small.task.val_size = 64;
  small.task.test_size = 64;
  const auto base = std::filesystem::temp_directory_path() / "nnaqat-acceptance";
  std::filesystem::remove_all(base);
  const ExperimentResult r1 = run_experiment(small, base / "a");
  const ExperimentResult r2 = run_experiment(small, base / "b");
  if (format_summary(r1) != format_summary(r2) || summary_json(r1) != summary_json(r2)) ++failures;
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(base / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), base / "a");
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(base / "b" / rel, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    if (sa != sb || sa.empty()) ++failures;
    ++files;
  }
  notes += fmt::format("{} pipeline artifacts byte-identical across reruns; ", files);
  // Golden traces.
  const std::string ckpt = serialize_checkpoint(r1.seeds.front().stage2.checkpoint);
  const std::string table = serialize_table(default_tables().tanh);
  std::mt19937_64 rng(808);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::vector<std::vector<double>> steps(20, std::vector<double>(2));
  for (auto& s : steps) {
    for (double& v : s) v = nd(rng);
  }
  const std::string input = serialize_sequence(steps, 2);
  const std::string t1 = serialize_trace(golden_run(ckpt, table, input));
  const std::string t2 = serialize_trace(golden_run(ckpt, table, input));
  if (t1 != t2) ++failures;
  if (compare_traces(parse_trace(t1), emulate_trace(ckpt, table, input))) ++failures;
  notes += fmt::format("golden trace ({} bytes) repeats", t1.size());
  std::filesystem::remove_all(base);
  o.pass = failures == 0;
  o.detail = fmt::format("{} failures; {}", failures, notes);
  return o;
}

}  // namespace

// Optional arguments select criteria by number; the default runs all of them.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<Criterion> criteria = {
      {1, "quantizer correctness", 10, quantizer_correctness},
      {2, "dynamic quantization", 30, dynamic_quantization},
      {3, "bit-exact emulator/engine equivalence", 120, emulator_engine_equivalence},
      {4, "gradient contracts", 60, gradient_contracts},
      {5, "PWL accuracy", 30, pwl_accuracy},
      {6, "activity regularizer", 600, activity_regularizer},
      {7, "directional PTQ-gap recovery", 1800, table1_direction},
      {8, "determinism", 600, determinism},
  };
  int failed = 0;
  int ran = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] criterion %d: %s (%.1fs, budget %.0fs%s) -- %s\n", pass ? "PASS" : "FAIL", c.id,
                c.name, secs, c.budget_s, in_time ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
