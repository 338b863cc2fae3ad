#include "dcat/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dcat/random.hpp"
#include "dcat/tensor_io.hpp"

namespace dcat {

namespace {

constexpr double kTint[3] = {1.0, 0.8, 0.6};

std::string sample_id(Index cls, Index i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "c%ld_%04ld", static_cast<long>(cls), static_cast<long>(i));
  return buf;
}

std::string manifest_csv(const Dataset& d) {
  std::string out = "path,label\n";
  for (const auto& s : d.samples) out += "images/" + s.id + ".dten," + std::to_string(s.label) + "\n";
  return out;
}

Dataset read_manifest(const std::filesystem::path& dir, const std::string& name, Split split,
                      const std::vector<std::string>& classes) {
  std::istringstream in(read_file(dir / name));
  std::string line;
  if (!std::getline(in, line) || line != "path,label") {
    throw FormatError(name + ": expected header 'path,label'");
  }
  Dataset d;
  d.split = split;
  d.class_names = classes;
  Index row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw FormatError(name + ": malformed row " + std::to_string(row));
    Sample s;
    const std::filesystem::path rel = line.substr(0, comma);
    s.id = rel.stem().string();
    try {
      s.label = std::stol(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw FormatError(name + ": bad label on row " + std::to_string(row));
    }
    s.image = load_tensor(dir / rel);
    d.samples.push_back(std::move(s));
  }
  d.validate();
  return d;
}

}  // namespace

void Dataset::validate() const {
  if (samples.empty()) throw FormatError("dataset is empty");
  if (class_names.size() < 2) throw FormatError("dataset needs at least two classes");
  const Shape& shape = samples.front().image.shape();
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= num_classes()) {
      throw FormatError("sample '" + s.id + "' has label " + std::to_string(s.label) +
                        " outside [0, " + std::to_string(num_classes()) + ")");
    }
    if (s.image.shape() != shape) {
      throw FormatError("sample '" + s.id + "' has shape " + shape_string(s.image.shape()) +
                        ", expected " + shape_string(shape));
    }
  }
}

Tensor synthetic_template(const SyntheticSpec& spec, Index cls, double phase) {
  const Index n = spec.image_size;
  const double theta = std::numbers::pi * static_cast<double>(cls) / static_cast<double>(spec.n_classes);
  const double cycles = 3.0 + static_cast<double>(cls % 2);
  const double kx = 2.0 * std::numbers::pi * cycles * std::cos(theta) / static_cast<double>(n);
  const double ky = 2.0 * std::numbers::pi * cycles * std::sin(theta) / static_cast<double>(n);
  Tensor::Array v(3 * n * n);
  for (Index y = 0; y < n; ++y) {
    for (Index x = 0; x < n; ++x) {
      const double g = spec.contrast * std::cos(kx * double(x) + ky * double(y) + phase);
      for (Index c = 0; c < 3; ++c) v[(c * n + y) * n + x] = static_cast<float>(kTint[c] * g);
    }
  }
  return Tensor({3, n, n}, std::move(v));
}

SplitDataset make_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_classes < 2) throw ConfigError("synthetic data needs at least two classes");
  if (spec.n_per_class < 2) throw ConfigError("synthetic data needs two samples per class");
  if (spec.image_size < 1) throw ConfigError("image size must be positive");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  SplitDataset out;
  out.train.split = Split::kTrain;
  out.test.split = Split::kTest;
  for (Index c = 0; c < spec.n_classes; ++c) {
    out.train.class_names.push_back("class" + std::to_string(c));
  }
  out.test.class_names = out.train.class_names;
  const Index n_train = std::clamp<Index>(
      static_cast<Index>(std::lround(spec.train_fraction * double(spec.n_per_class))), 1,
      spec.n_per_class - 1);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  for (Index c = 0; c < spec.n_classes; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    for (Index i = 0; i < spec.n_per_class; ++i) {
      Tensor img = synthetic_template(spec, c, phase(rng));
      auto& v = img.mutable_data();
      for (Index k = 0; k < v.size(); ++k) v[k] += static_cast<float>(noise(rng));
      Sample s{sample_id(c, i), img, c};
      (i < n_train ? out.train : out.test).samples.push_back(std::move(s));
    }
  }
  return out;
}

void write_dataset_dir(const std::filesystem::path& dir, const SplitDataset& data) {
  std::filesystem::create_directories(dir / "images");
  for (const Dataset* d : {&data.train, &data.test}) {
    for (const auto& s : d->samples) save_tensor(dir / "images" / (s.id + ".dten"), s.image);
  }
  std::string classes;
  for (const auto& name : data.train.class_names) classes += name + "\n";
  write_file_atomic(dir / "classes.txt", classes);
  write_file_atomic(dir / "train.csv", manifest_csv(data.train));
  write_file_atomic(dir / "test.csv", manifest_csv(data.test));
}

SplitDataset read_dataset_dir(const std::filesystem::path& dir) {
  std::vector<std::string> classes;
  {
    std::istringstream in(read_file(dir / "classes.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) classes.push_back(line);
    }
  }
  SplitDataset out;
  out.train = read_manifest(dir, "train.csv", Split::kTrain, classes);
  out.test = read_manifest(dir, "test.csv", Split::kTest, classes);
  if (out.train.samples.front().image.shape() != out.test.samples.front().image.shape()) {
    throw FormatError("train and test images differ in shape");
  }
  return out;
}

}  // namespace dcat
