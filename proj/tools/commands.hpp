#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dcat/config.hpp"
#include "dcat/dataset.hpp"

namespace dcat::cli {

struct TrainOptions {
  std::string config_file;
  std::string preset = "desk";
  // Flag overrides; unset fields keep the preset / file value.
  std::optional<std::string> data_dir, output_dir, fusion_mode;
  std::optional<double> learning_rate, weight_decay, dropout_rate, threshold;
  std::optional<Index> batch_size, epochs, mc_passes, width, input_size;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct EvalOptions {
  std::string checkpoint;
  std::string data_dir;
  std::string split = "test";
  Index mc_passes = 100;
  std::optional<double> threshold;
  std::uint64_t seed = 0;
  std::optional<std::string> output_dir;  // default dcat_eval
};

struct GenSynthOptions {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::optional<std::string> output_dir;  // default synthetic
};

struct FlagOptions {
  std::string report;
  double threshold = 0.0;
};

struct ImportOptions {
  std::string maps;
  std::optional<Index> fine_size;
  std::string checkpoint;
  Index mc_passes = 100;
  std::uint64_t seed = 0;
  std::optional<std::string> output_dir;
};

/// Resolves the output directory: explicit flag, then DCAT_OUTPUT_DIR, then `fallback`.
std::string resolve_output_dir(const std::optional<std::string>& flag, const std::string& fallback);

RunConfig resolve_train_config(const TrainOptions& opts);

int run_train(const TrainOptions& opts);
int run_eval(const EvalOptions& opts);
int run_gen_synth(const GenSynthOptions& opts);
int run_flag(const FlagOptions& opts);
int run_import_features(const ImportOptions& opts);

}  // namespace dcat::cli
