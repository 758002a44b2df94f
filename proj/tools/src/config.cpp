// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

extern char** environ;

namespace nnaqat::cli {

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, "config: " + msg);
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    // Integers may stand in for reals, not the other way round.
    return !(a.is_number_integer() && b.is_number_float());
  }
  if (a.is_null() || b.is_null()) return true;  // nullable string slots
  return a.type() == b.type();
}

void merge_checked(Json& base, const Json& patch, const std::string& where) {
  if (!patch.is_object()) config_error(fmt::format("'{}' must be an object", where));
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) config_error(fmt::format("unknown key '{}'", path));
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_checked(slot, it.value(), path);
    } else {
      if (!same_kind(slot, it.value())) {
        config_error(fmt::format("'{}' expects {}, got {}", path, slot.type_name(),
                                 it.value().type_name()));
      }
      slot = it.value();
    }
  }
}

template <typename T>
T get(const Json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(fmt::format("{}.{}: {}", section, key, e.what()));
  }
}

}  // namespace

Json default_config() {
  Json c;
  c["seed"] = 1;
  c["out"] = "nnaqat-out";
  c["task"] = {{"kind", "adding"},      {"length", 20},       {"vocab", 16},
               {"classes", 4},          {"train_size", 2048}, {"val_size", 512},
               {"test_size", 1024},     {"noise", 0.0},       {"tolerance", 0.04}};
  c["model"] = {{"hidden", 32}, {"layers", 2}, {"embed_dim", 8}};
  c["regularizer"] = {{"lambda", 2.0}, {"z_min", -4.0}, {"z_max", 4.0}, {"form", "two_sided"}};
  c["stage1"] = {{"steps", 3000}, {"batch", 32},  {"lr_peak", 3e-3}, {"lr_floor", 1e-4},
                 {"warmup", 100}, {"hold", 1000}, {"clip_norm", 1.0}};
  c["stage2"] = {{"steps", 300}, {"lr", 1e-3}};
  c["quant"] = {{"scales", "standard"}, {"ste_frequency", 1.0}, {"ste_unit", "per_bin"}};
  c["tables"] = {{"tanh", nullptr}, {"segments", 32}, {"grid_exponent", -12}};
  c["eval"] = {{"batch", 256}, {"edges", Json::array({-8, -7, -6, -5, -4, -3, -2, -1, 0, 1, 2, 3,
                                                      4, 5, 6, 7, 8})}};
  c["experiment"] = {{"seeds", Json::array({1, 2, 3})}, {"eval_every", 0}};
  return c;
}

void apply_override(Json& config, const std::string& key, const std::string& value) {
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;
  }
  Json patch;
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    patch[key] = parsed;
  } else {
    patch[key.substr(0, dot)][key.substr(dot + 1)] = parsed;
  }
  merge_checked(config, patch, "");
}

Json resolve_config(const std::optional<std::filesystem::path>& file,
                    const std::optional<std::uint64_t>& seed_flag,
                    const std::optional<std::string>& out_flag) {
  Json config = default_config();
  if (file) {
    std::ifstream in(*file);
    if (!in) config_error(fmt::format("cannot open '{}'", file->string()));
    Json user;
    try {
      user = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      config_error(fmt::format("'{}' is not valid JSON: {}", file->string(), e.what()));
    }
    merge_checked(config, user, "");
  }
  // NNAQAT_SEED=7, NNAQAT_STAGE1__STEPS=100: double underscore separates the
  // section from the key. Variables are applied in sorted order.
  std::vector<std::pair<std::string, std::string>> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    const std::string prefix = kEnvPrefix;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (const auto sep = name.find("__"); sep != std::string::npos) {
      name = name.substr(0, sep) + "." + name.substr(sep + 2);
    }
    env.emplace_back(name, entry.substr(eq + 1));
  }
  std::sort(env.begin(), env.end());
  for (const auto& [key, value] : env) apply_override(config, key, value);
  if (seed_flag) {
    config["seed"] = *seed_flag;
    config["experiment"]["seeds"] = Json::array({*seed_flag});
  }
  if (out_flag) config["out"] = *out_flag;
  // Materialize derived checks early so bad values fail as config errors.
  (void)experiment_config(config);
  return config;
}

std::shared_ptr<const TablePair> load_tables(const Json& config) {
  const Json& t = config.at("tables");
  if (!t.at("tanh").is_null()) {
    PwlTable tanh = load_table(t.at("tanh").get<std::string>());
    if (tanh.kind() != ActivationKind::kTanh) {
      throw Error(ErrorCode::kInvalidArgument, "config: tables.tanh must hold a tanh table");
    }
    PwlTable sig = derive_sigmoid_table(tanh);
    return std::make_shared<const TablePair>(TablePair{std::move(tanh), std::move(sig)});
  }
  const int segments = get<int>(config, "tables", "segments");
  const int grid_exp = get<int>(config, "tables", "grid_exponent");
  if (segments == kDefaultPwlSegments && grid_exp == kDefaultGridExponent) {
    return std::make_shared<const TablePair>(default_tables());
  }
  PwlTable tanh = build_tanh_table(segments, std::ldexp(1.0, grid_exp));
  PwlTable sig = derive_sigmoid_table(tanh);
  return std::make_shared<const TablePair>(TablePair{std::move(tanh), std::move(sig)});
}

EvalOptions eval_options(const Json& config) {
  EvalOptions e;
  e.batch = get<std::size_t>(config, "eval", "batch");
  e.edges = get<std::vector<double>>(config, "eval", "edges");
  if (e.batch == 0) config_error("eval.batch must be positive");
  if (e.edges.empty() || !std::is_sorted(e.edges.begin(), e.edges.end())) {
    config_error("eval.edges must be a non-empty ascending list");
  }
  return e;
}

ExperimentConfig experiment_config(const Json& config) {
  ExperimentConfig x;
  TaskSpec& task = x.task;
  task.kind = task_kind_from_string(get<std::string>(config, "task", "kind"));
  task.length = get<int>(config, "task", "length");
  task.vocab = get<int>(config, "task", "vocab");
  task.classes = get<int>(config, "task", "classes");
  task.train_size = get<std::size_t>(config, "task", "train_size");
  task.val_size = get<std::size_t>(config, "task", "val_size");
  task.test_size = get<std::size_t>(config, "task", "test_size");
  task.noise = get<double>(config, "task", "noise");
  task.tolerance = get<double>(config, "task", "tolerance");

  x.model.hidden = get<int>(config, "model", "hidden");
  x.model.layers = get<int>(config, "model", "layers");
  x.model.embed_dim = get<int>(config, "model", "embed_dim");

  x.lambda = get<double>(config, "regularizer", "lambda");
  x.bounds.z_min = get<double>(config, "regularizer", "z_min");
  x.bounds.z_max = get<double>(config, "regularizer", "z_max");
  const auto form = get<std::string>(config, "regularizer", "form");
  if (form == "two_sided") {
    x.bounds.form = HingeForm::kTwoSided;
  } else if (form == "literal") {
    x.bounds.form = HingeForm::kLiteral;
  } else {
    config_error(fmt::format("regularizer.form '{}' (expected two_sided or literal)", form));
  }

  x.stage1_steps = get<std::size_t>(config, "stage1", "steps");
  x.batch = get<std::size_t>(config, "stage1", "batch");
  x.stage1_lr.peak = get<double>(config, "stage1", "lr_peak");
  x.stage1_lr.floor = get<double>(config, "stage1", "lr_floor");
  x.stage1_lr.warmup = get<std::size_t>(config, "stage1", "warmup");
  x.stage1_lr.hold = get<std::size_t>(config, "stage1", "hold");
  x.stage1_lr.total_steps = x.stage1_steps;
  x.adam.clip_norm = get<double>(config, "stage1", "clip_norm");
  x.stage2_steps = get<std::size_t>(config, "stage2", "steps");
  x.stage2_lr = get<double>(config, "stage2", "lr");

  const Json& scales = config.at("quant").at("scales");
  if (scales.is_string()) {
    const auto name = scales.get<std::string>();
    if (name == "standard") {
      x.scales = DynamicScaleSet::standard();
    } else if (name == "sparse") {
      x.scales = DynamicScaleSet::sparse();
    } else {
      config_error(fmt::format("quant.scales '{}' (expected standard or sparse)", name));
    }
  } else {
    config_error("quant.scales must be \"standard\" or \"sparse\"");
  }
  x.ste = SteConfig::clipped_cosine(get<double>(config, "quant", "ste_frequency"));
  if (!(x.ste.frequency > 0.0)) config_error("quant.ste_frequency must be positive");
  const auto unit = get<std::string>(config, "quant", "ste_unit");
  if (unit == "per_bin") {
    x.ste.unit = SteConfig::CosineUnit::kPerBin;
  } else if (unit == "raw") {
    x.ste.unit = SteConfig::CosineUnit::kRawInput;
  } else {
    config_error(fmt::format("quant.ste_unit '{}' (expected per_bin or raw)", unit));
  }

  x.seeds = get<std::vector<std::uint64_t>>(config, "experiment", "seeds");
  x.eval_every = get<std::size_t>(config, "experiment", "eval_every");
  x.eval = eval_options(config);
  try {
    x.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return x;
}

TrainConfig train_config(const Json& config, Stage stage) {
  ExperimentConfig x = experiment_config(config);
  x.tables = load_tables(config);
  const auto seed = config.at("seed").get<std::uint64_t>();
  return stage == Stage::kOne ? x.stage1_config(seed, x.lambda) : x.stage2_config(seed);
}

std::filesystem::path out_dir(const Json& config) {
  return std::filesystem::path(config.at("out").get<std::string>());
}

void write_resolved(const Json& config) {
  const auto dir = out_dir(config);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "resolved_config.json") << config.dump(2) << "\n";
}

}  // namespace nnaqat::cli
