#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "dcat/report.hpp"
#include "dcat/tensor_io.hpp"
#include "dcat/training.hpp"
#include "dcat/uncertainty.hpp"

namespace dcat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_dir(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " is not set");
  if (!fs::is_directory(path)) throw InputError(std::string(what) + " '" + path + "' does not exist");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " is not set");
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " '" + path + "' does not exist");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

std::string checkpoint_json(const ModelConfig& model, const TrainConfig& train,
                            const std::vector<std::string>& class_names) {
  return json{{"model", to_json(model)}, {"train", to_json(train)}, {"class_names", class_names}}.dump();
}

struct LoadedModel {
  DcatModel<float> model;
  std::vector<std::string> class_names;
};

LoadedModel load_checkpoint(const std::string& path) {
  require_file(path, "checkpoint");
  const auto records = load_container(path);
  const json cfg = parse_json(checkpoint_config(records), "checkpoint config");
  if (!cfg.contains("model") || !cfg.contains("class_names")) {
    throw FormatError("checkpoint config lacks model or class_names");
  }
  LoadedModel out{DcatModel<float>(model_config_from_json(cfg.at("model")), 0),
                  cfg.at("class_names").get<std::vector<std::string>>()};
  out.model.import_parameters(records);
  return out;
}

void write_evaluation(const fs::path& dir, const DcatModel<float>& model, const Dataset& data,
                      Index mc_passes, std::optional<double> threshold, std::uint64_t seed) {
  Evaluation eval = evaluate(model, data, mc_passes, seed);
  const double t = threshold.value_or(default_hus_threshold(data.num_classes()));
  const EvalReport report = build_report(eval, data.class_names, t);
  write_eval_outputs(dir, report, eval);
  std::printf("accuracy %.4f  macro-AUROC %s  HUS %ld / %ld (threshold %.4f)\n", report.accuracy,
              report.macro_auroc ? std::to_string(*report.macro_auroc).c_str() : "undefined",
              static_cast<long>(report.uncertainty.hus_count), static_cast<long>(report.num_samples), t);
}

}  // namespace

std::string resolve_output_dir(const std::optional<std::string>& flag, const std::string& fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DCAT_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

RunConfig resolve_train_config(const TrainOptions& o) {
  RunConfig cfg = preset_config(o.preset);
  if (!o.config_file.empty()) {
    if (!fs::is_regular_file(o.config_file)) throw ConfigError("config file '" + o.config_file + "' does not exist");
    cfg = merge_run_config(parse_json(read_file(o.config_file), "config file"), cfg);
  }
  if (o.data_dir) cfg.data_dir = *o.data_dir;
  cfg.output_dir = resolve_output_dir(o.output_dir, cfg.output_dir);
  if (o.fusion_mode) cfg.fusion_mode = parse_fusion_mode(*o.fusion_mode);
  if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
  if (o.weight_decay) cfg.train.weight_decay = *o.weight_decay;
  if (o.dropout_rate) cfg.train.dropout_rate = *o.dropout_rate;
  if (o.threshold) cfg.hus_threshold = *o.threshold;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.epochs) cfg.train.max_epochs = *o.epochs;
  if (o.mc_passes) cfg.train.mc_passes = *o.mc_passes;
  if (o.width) cfg.train.common_width = *o.width;
  if (o.input_size) cfg.train.input_size = *o.input_size;
  if (o.seed) cfg.train.seed = *o.seed;
  cfg.validate();
  return cfg;
}

int run_train(const TrainOptions& opts) {
  const RunConfig cfg = resolve_train_config(opts);
  require_dir(cfg.data_dir, "data directory");
  const SplitDataset data = read_dataset_dir(cfg.data_dir);
  const ModelConfig model_cfg = cfg.model_config(data.train.num_classes());
  DcatModel<float> model(model_cfg, cfg.train.seed);

  const TrainResult result = train(model, data, cfg.train, [&](const EpochLog& r) {
    if (!opts.quiet) {
      std::fprintf(stderr, "epoch %3ld  loss %.4f  train %.4f  test %.4f  %.0f ms\n",
                   static_cast<long>(r.epoch), r.loss, r.train_accuracy, r.test_accuracy, r.wall_ms);
    }
  });

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  write_log_csv(out / "train_log.csv", result.log);
  auto layout = model.parameters();
  save_container(out / "checkpoint.dcat",
                 checkpoint_records(result.best_parameters, layout, result.best_optimizer,
                                    checkpoint_json(model_cfg, cfg.train, data.train.class_names)));
  write_file_atomic(out / "run_config.json", dump_json(to_json(cfg)));

  model.import_parameters(result.best_parameters);
  std::printf("best epoch %ld (test accuracy %.4f)\n", static_cast<long>(result.best_epoch),
              result.best_test_accuracy);
  write_evaluation(out, model, data.test, cfg.train.mc_passes, cfg.hus_threshold, cfg.train.seed);
  return 0;
}

int run_eval(const EvalOptions& opts) {
  if (opts.split != "train" && opts.split != "test") throw ConfigError("split must be train or test");
  if (opts.mc_passes < 1) throw ConfigError("mc-passes must be at least 1");
  if (opts.threshold && !(*opts.threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
  require_dir(opts.data_dir, "data directory");
  LoadedModel loaded = load_checkpoint(opts.checkpoint);
  const SplitDataset data = read_dataset_dir(opts.data_dir);
  const Dataset& split = opts.split == "train" ? data.train : data.test;
  if (split.class_names != loaded.class_names) {
    throw FormatError("dataset classes differ from the checkpoint's");
  }
  write_evaluation(resolve_output_dir(opts.output_dir, "dcat_eval"), loaded.model, split,
                   opts.mc_passes, opts.threshold, opts.seed);
  return 0;
}

int run_gen_synth(const GenSynthOptions& opts) {
  const SplitDataset data = make_synthetic_dataset(opts.spec, opts.seed);
  const fs::path out = resolve_output_dir(opts.output_dir, "synthetic");
  write_dataset_dir(out, data);
  const json meta = {{"classes", opts.spec.n_classes},
                     {"per_class", opts.spec.n_per_class},
                     {"size", opts.spec.image_size},
                     {"contrast", opts.spec.contrast},
                     {"noise_sigma", opts.spec.noise_sigma},
                     {"seed", opts.seed},
                     {"train_samples", data.train.samples.size()},
                     {"test_samples", data.test.samples.size()}};
  write_file_atomic(out / "dataset.json", dump_json(meta));
  std::printf("wrote %zu train and %zu test samples to %s\n", data.train.samples.size(),
              data.test.samples.size(), out.string().c_str());
  return 0;
}

int run_flag(const FlagOptions& opts) {
  if (!(opts.threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
  require_file(opts.report, "uncertainty report");
  const auto rows = high_uncertainty_rows(parse_uncertainty_csv(read_file(opts.report)), opts.threshold);
  std::fputs(hus_table(rows).c_str(), stdout);
  std::printf("%zu high-uncertainty samples above %.6f\n", rows.size(), opts.threshold);
  return 0;
}

int run_import_features(const ImportOptions& opts) {
  require_file(opts.maps, "feature map file");
  const FeatureMapSet<float> maps = import_feature_maps(opts.maps, opts.fine_size);
  std::printf("a1 %s  a2 %s  b1 %s  b2 %s\n", shape_string(maps.a1.shape()).c_str(),
              shape_string(maps.a2.shape()).c_str(), shape_string(maps.b1.shape()).c_str(),
              shape_string(maps.b2.shape()).c_str());
  if (opts.checkpoint.empty()) return 0;
  if (opts.mc_passes < 1) throw ConfigError("mc-passes must be at least 1");
  LoadedModel loaded = load_checkpoint(opts.checkpoint);
  const auto dist = mc_forward_pooled(loaded.model, loaded.model.features_from_maps(maps),
                                      opts.mc_passes, opts.seed);
  json posterior = json::array();
  for (Index i = 0; i < dist.posterior.size(); ++i) posterior.push_back(dist.posterior[i]);
  const json out = {{"posterior", posterior},
                    {"entropy", dist.entropy},
                    {"predicted_label", dist.predicted_label()},
                    {"predicted_class", loaded.class_names.at(static_cast<std::size_t>(dist.predicted_label()))},
                    {"mc_passes", dist.num_passes()}};
  const fs::path dir = resolve_output_dir(opts.output_dir, "dcat_features");
  fs::create_directories(dir);
  write_file_atomic(dir / "prediction.json", dump_json(out));
  std::printf("predicted %s  entropy %.6f\n", out["predicted_class"].get<std::string>().c_str(),
              dist.entropy);
  return 0;
}

}  // namespace dcat::cli
