// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "nnaqat/error.hpp"

using namespace nnaqat;
using namespace nnaqat::cli;

namespace {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return kExitConfig;
    case ErrorCode::kDivergence:
      return kExitDivergence;
    case ErrorCode::kInvalidData:
    case ErrorCode::kParse:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kOverflow:
    case ErrorCode::kConstruction:
      return kExitInvariant;
  }
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point accelerator emulation and accelerator-aware training"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 I/O or unexpected error, 2 config/usage error,\n"
      "3 invariant violation or malformed file, 4 divergence (golden mismatch, non-finite loss).\n"
      "Environment: NNAQAT_<KEY> or NNAQAT_<SECTION>__<KEY> overrides config keys.");

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "Random seed (also restricts experiments to this seed)");
  app.add_option("--out", out, "Output directory");

  std::function<int(const Json&)> action;
  Path file;
  Path checkpoint;
  Path input;
  Path table;
  Path trace;
  std::optional<Path> from;
  std::optional<Path> init;
  std::string policy = "nna";
  std::string split = "test";
  std::size_t steps = 16;
  int stage = 1;

  auto* tables = app.add_subcommand("tables", "Build, inspect or export PWL activation tables");
  tables->require_subcommand(1);
  auto* tb = tables->add_subcommand("build", "Build tanh and sigmoid tables with a report");
  tb->add_option("--from", from, "Start from an existing tanh table file");
  tb->callback([&] { action = [&](const Json& c) { return tables_build(c, from); }; });
  auto* ti = tables->add_subcommand("inspect", "Validate a table file and report its accuracy");
  ti->add_option("file", file, "Table file")->required();
  ti->callback([&] { action = [&](const Json& c) { return tables_inspect(c, file); }; });
  auto* te = tables->add_subcommand("export", "Write a canonical copy and a plot series");
  te->add_option("file", file, "Table file")->required();
  te->callback([&] { action = [&](const Json& c) { return tables_export(c, file); }; });

  auto* an = app.add_subcommand("analyze", "Pre-activation ranges and quantization error");
  an->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  an->add_option("--policy", policy, "off, weights or nna")->capture_default_str();
  an->add_option("--split", split, "train, val or test")->capture_default_str();
  an->callback([&] {
    action = [&](const Json& c) { return analyze(c, checkpoint, policy, split); };
  });

  auto* golden = app.add_subcommand("golden", "Golden traces from the integer engine");
  golden->require_subcommand(1);
  auto* gi = golden->add_subcommand("input", "Write a random input sequence file");
  gi->add_option("--checkpoint", checkpoint, "Checkpoint (sets the input width)")->required();
  gi->add_option("--steps", steps, "Sequence length")->capture_default_str();
  gi->add_option("--input", input, "Output sequence file")->required();
  gi->callback([&] {
    action = [&](const Json& c) { return golden_input(c, checkpoint, steps, input); };
  });
  for (auto* sub : {golden->add_subcommand("generate", "Run the integer engine and record a trace"),
                    golden->add_subcommand("verify", "Replay through the emulator and compare")}) {
    sub->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    sub->add_option("--input", input, "Input sequence file")->required();
    sub->add_option("--table", table, "tanh table file")->required();
    sub->add_option("--trace", trace, "Trace file")->required();
  }
  golden->get_subcommand("generate")->callback([&] {
    action = [&](const Json& c) { return golden_generate(c, checkpoint, input, table, trace); };
  });
  golden->get_subcommand("verify")->callback([&] {
    action = [&](const Json& c) { return golden_verify(c, checkpoint, input, table, trace); };
  });

  auto* tr = app.add_subcommand("train", "Run one training stage");
  tr->add_option("--stage", stage, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  tr->add_option("--init", init, "Stage I checkpoint (stage 2)");
  tr->callback([&] { action = [&](const Json& c) { return train(c, stage, init); }; });

  auto* ex = app.add_subcommand("experiment", "Baseline vs two-stage training with a summary table");
  ex->callback([&] { action = [&](const Json& c) { return experiment(c); }; });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();
  for (auto* sub : {tables, golden}) {
    for (auto* leaf : sub->get_subcommands({})) leaf->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::optional<Path> cfg_file;
    if (config_path) cfg_file = Path(*config_path);
    const Json config = resolve_config(cfg_file, seed, out);
    write_resolved(config);
    return action(config);
  } catch (const Error& e) {
    std::cerr << "nnaqat: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "nnaqat: " << e.what() << "\n";
    return kExitFailure;
  }
}
