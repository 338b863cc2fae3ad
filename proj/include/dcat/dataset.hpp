#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dcat/tensor.hpp"

namespace dcat {

enum class Split { kTrain, kTest };

struct Sample {
  std::string id;
  Tensor image;  // 3 x H x W
  Index label = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names;
  Split split = Split::kTrain;

  Index num_classes() const { return static_cast<Index>(class_names.size()); }
  /// Non-empty, labels inside [0, N_cl), all images share one shape.
  void validate() const;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

// Class c is a sinusoidal grating with orientation pi*c/k and a class-specific
// spatial frequency, drawn with a random phase per sample, tinted per channel,
// plus i.i.d. Gaussian pixel noise.
struct SyntheticSpec {
  Index n_per_class = 250;
  Index n_classes = 4;
  Index image_size = 64;
  double noise_sigma = 0.3;
  double contrast = 0.03;
  double train_fraction = 0.8;
};

/// Noise-free image of class `cls` at the given phase.
Tensor synthetic_template(const SyntheticSpec& spec, Index cls, double phase);

/// Stratified split: the first round(train_fraction * n_per_class) samples
/// of every class go to train, the rest to test.
SplitDataset make_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed);

// On disk: images/<id>.dten, train.csv and test.csv with header "path,label"
// (paths relative to the directory), and classes.txt with one name per line.
void write_dataset_dir(const std::filesystem::path& dir, const SplitDataset& data);
SplitDataset read_dataset_dir(const std::filesystem::path& dir);

}  // namespace dcat
