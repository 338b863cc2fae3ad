// dcat: train, evaluate and inspect dual-backbone cross-attention classifiers.

#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

template <typename T>
void set_if_given(const CLI::Option* opt, const T& value, std::optional<T>& out) {
  if (opt->count() > 0) out = value;
}

int fail(int code, const char* what) {
  std::fprintf(stderr, "dcat: %s\n", what);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dcat;
  CLI::App app{"Dual-backbone cross-attention image classifier with MC-dropout uncertainty"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  // train
  cli::TrainOptions train_opts;
  const RunConfig desk = preset_config("desk");
  std::string data_dir, output_dir = desk.output_dir, fusion_mode = "cross_attention";
  double lr = desk.train.learning_rate, wd = desk.train.weight_decay, dropout = desk.train.dropout_rate;
  double threshold = 0.0;
  Index batch = desk.train.batch_size, epochs = desk.train.max_epochs, passes = desk.train.mc_passes;
  Index width = desk.train.common_width, input_size = desk.train.input_size;
  std::uint64_t seed = desk.train.seed;

  auto* train = app.add_subcommand("train", "Train a model, then write checkpoint, log and test-set report");
  train->add_option("--config", train_opts.config_file, "JSON run configuration");
  train->add_option("--preset", train_opts.preset, "Base preset: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  auto* o_data = train->add_option("--data", data_dir, "Dataset directory (train.csv, test.csv, classes.txt)");
  auto* o_out = train->add_option("--output", output_dir, "Output directory (env DCAT_OUTPUT_DIR)");
  auto* o_mode = train->add_option("--fusion-mode", fusion_mode, "cross_attention or single_backbone");
  auto* o_lr = train->add_option("--lr", lr, "Adam learning rate");
  auto* o_wd = train->add_option("--weight-decay", wd, "Decoupled weight decay");
  auto* o_drop = train->add_option("--dropout", dropout, "Dropout rate before the classifier");
  auto* o_thr = train->add_option("--threshold", threshold, "Entropy threshold for flagging")
                     ->default_str("0.5 ln N");
  auto* o_batch = train->add_option("--batch-size", batch, "Mini-batch size");
  auto* o_epochs = train->add_option("--epochs", epochs, "Training epochs");
  auto* o_passes = train->add_option("--mc-passes", passes, "MC-dropout passes for the final report");
  auto* o_width = train->add_option("--width", width, "Common fusion width C");
  auto* o_size = train->add_option("--input-size", input_size, "Square input size");
  auto* o_seed = train->add_option("--seed", seed, "Seed for init, shuffling, dropout and MC passes");
  train->add_flag("--quiet", train_opts.quiet, "Suppress per-epoch progress");

  // eval
  cli::EvalOptions eval_opts;
  std::string eval_out = "dcat_eval";
  double eval_threshold = 0.0;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with MC-dropout");
  eval->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint file")->required();
  eval->add_option("--data", eval_opts.data_dir, "Dataset directory")->required();
  eval->add_option("--split", eval_opts.split, "Split to score: train or test");
  eval->add_option("--mc-passes", eval_opts.mc_passes, "Stochastic forward passes per sample");
  auto* o_eval_thr = eval->add_option("--threshold", eval_threshold, "Entropy threshold")
                        ->default_str("0.5 ln N");
  eval->add_option("--seed", eval_opts.seed, "Seed for the MC passes");
  auto* o_eval_out = eval->add_option("--output", eval_out, "Output directory (env DCAT_OUTPUT_DIR)");

  // gen-synth
  cli::GenSynthOptions synth_opts;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("gen-synth", "Write a seeded synthetic grating dataset");
  synth->add_option("--classes", synth_opts.spec.n_classes, "Number of classes");
  synth->add_option("--per-class", synth_opts.spec.n_per_class, "Samples per class (80/20 split)");
  synth->add_option("--size", synth_opts.spec.image_size, "Image height and width");
  synth->add_option("--contrast", synth_opts.spec.contrast, "Grating amplitude");
  synth->add_option("--noise", synth_opts.spec.noise_sigma, "Pixel noise standard deviation");
  synth->add_option("--seed", synth_opts.seed, "Generator seed");
  auto* o_synth_out = synth->add_option("--output", synth_out, "Output directory (env DCAT_OUTPUT_DIR)");

  // flag
  cli::FlagOptions flag_opts;
  auto* flag = app.add_subcommand("flag", "List high-uncertainty samples from an uncertainty CSV");
  flag->add_option("--report", flag_opts.report, "uncertainty.csv written by train or eval")->required();
  flag->add_option("--threshold", flag_opts.threshold, "Entropy threshold in nats")->required()->default_str("");

  // import-features
  cli::ImportOptions import_opts;
  std::string import_out = "dcat_features";
  Index fine_size = 0;
  auto* import = app.add_subcommand("import-features", "Validate external feature maps and optionally classify them");
  import->add_option("--maps", import_opts.maps, "Container with records a1, a2, b1, b2")->required();
  auto* o_fine = import->add_option("--fine-size", fine_size, "Expected scale-1 spatial size")
                    ->default_str("inferred");
  import->add_option("--checkpoint", import_opts.checkpoint, "Checkpoint to run the fusion head with");
  import->add_option("--mc-passes", import_opts.mc_passes, "Stochastic forward passes");
  import->add_option("--seed", import_opts.seed, "Seed for the MC passes");
  auto* o_import_out = import->add_option("--output", import_out, "Output directory (env DCAT_OUTPUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (train->parsed()) {
      set_if_given(o_data, data_dir, train_opts.data_dir);
      set_if_given(o_out, output_dir, train_opts.output_dir);
      set_if_given(o_mode, fusion_mode, train_opts.fusion_mode);
      set_if_given(o_lr, lr, train_opts.learning_rate);
      set_if_given(o_wd, wd, train_opts.weight_decay);
      set_if_given(o_drop, dropout, train_opts.dropout_rate);
      set_if_given(o_thr, threshold, train_opts.threshold);
      set_if_given(o_batch, batch, train_opts.batch_size);
      set_if_given(o_epochs, epochs, train_opts.epochs);
      set_if_given(o_passes, passes, train_opts.mc_passes);
      set_if_given(o_width, width, train_opts.width);
      set_if_given(o_size, input_size, train_opts.input_size);
      set_if_given(o_seed, seed, train_opts.seed);
      return cli::run_train(train_opts);
    }
    if (eval->parsed()) {
      set_if_given(o_eval_thr, eval_threshold, eval_opts.threshold);
      set_if_given(o_eval_out, eval_out, eval_opts.output_dir);
      return cli::run_eval(eval_opts);
    }
    if (synth->parsed()) {
      set_if_given(o_synth_out, synth_out, synth_opts.output_dir);
      return cli::run_gen_synth(synth_opts);
    }
    if (flag->parsed()) return cli::run_flag(flag_opts);
    set_if_given(o_fine, fine_size, import_opts.fine_size);
    set_if_given(o_import_out, import_out, import_opts.output_dir);
    return cli::run_import_features(import_opts);
  } catch (const ConfigError& e) {
    return fail(kConfigError, e.what());
  } catch (const ParameterError& e) {
    return fail(kConfigError, e.what());
  } catch (const NumericError& e) {
    return fail(kNumericError, e.what());
  } catch (const FormatError& e) {
    return fail(kDataError, e.what());
  } catch (const InputError& e) {
    return fail(kDataError, e.what());
  } catch (const DimensionError& e) {
    return fail(kDataError, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kDataError, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
}
