#include "dcat/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dcat/tensor_io.hpp"

namespace dcat {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

constexpr const char* kCsvHeader = "sample_id,true_label,predicted_label,entropy,max_prob,flagged";

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metric_json(const MetricValue& m) { return {{"value", m.value}, {"degenerate", m.degenerate}}; }

// The opening point's threshold is +inf, which JSON cannot carry; it becomes null.
json curve_json(const std::vector<CurvePoint>& points, const char* x_name, const char* y_name) {
  json out = json::array();
  for (const auto& p : points) {
    out.push_back({{"threshold", std::isfinite(p.threshold) ? json(p.threshold) : json(nullptr)},
                   {x_name, p.x},
                   {y_name, p.y}});
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

EvalReport build_report(Evaluation& eval, const std::vector<std::string>& class_names,
                        double hus_threshold) {
  const Index k = static_cast<Index>(class_names.size());
  if (k < 2) throw ConfigError("report needs at least two class names");
  EvalReport r;
  r.class_names = class_names;
  r.num_samples = static_cast<Index>(eval.scored.size());
  r.mc_passes = eval.mc_passes;
  r.confusion = ConfusionMatrix(k);
  for (std::size_t i = 0; i < eval.scored.size(); ++i) {
    r.confusion.add(eval.scored[i].true_label, eval.predicted[i]);
  }
  r.accuracy = accuracy(r.confusion);
  for (Index c = 0; c < k; ++c) {
    ClassReport cr;
    cr.name = class_names[static_cast<std::size_t>(c)];
    cr.precision = precision(r.confusion, c);
    cr.recall = recall(r.confusion, c);
    cr.specificity = specificity(r.confusion, c);
    cr.f1 = f1(r.confusion, c);
    try {
      cr.roc = roc_curve(eval.scored, c);
      cr.pr = pr_curve(eval.scored, c);
      cr.auroc = auroc(eval.scored, c);
      cr.aupr = aupr(eval.scored, c);
    } catch (const UndefinedCurveError&) {
    }
    r.per_class.push_back(std::move(cr));
  }
  r.macro_precision = macro_average(r.confusion, precision);
  r.macro_recall = macro_average(r.confusion, recall);
  r.macro_specificity = macro_average(r.confusion, specificity);
  r.macro_f1 = macro_average(r.confusion, f1);
  r.macro_auroc = macro_auroc(eval.scored, k);
  r.macro_aupr = macro_aupr(eval.scored, k);
  r.mcc = mcc(r.confusion);
  r.kappa = cohen_kappa(r.confusion);
  r.hus_threshold = hus_threshold;
  r.uncertainty = flag_high_uncertainty(eval.records, hus_threshold).summary;
  return r;
}

json to_json(const EvalReport& r) {
  json per_class = json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"name", c.name},
                         {"precision", metric_json(c.precision)},
                         {"recall", metric_json(c.recall)},
                         {"specificity", metric_json(c.specificity)},
                         {"f1", metric_json(c.f1)},
                         {"auroc", optional_number(c.auroc)},
                         {"aupr", optional_number(c.aupr)},
                         {"roc", curve_json(c.roc, "fpr", "tpr")},
                         {"pr", curve_json(c.pr, "recall", "precision")}});
  }
  json cm = json::array();
  for (Index i = 0; i < r.confusion.num_classes(); ++i) {
    json row = json::array();
    for (Index j = 0; j < r.confusion.num_classes(); ++j) row.push_back(r.confusion(i, j));
    cm.push_back(row);
  }
  return {{"num_samples", r.num_samples},
          {"num_classes", static_cast<Index>(r.class_names.size())},
          {"class_names", r.class_names},
          {"mc_passes", r.mc_passes},
          {"accuracy", r.accuracy},
          {"confusion_matrix", cm},
          {"per_class", per_class},
          {"macro",
           {{"precision", metric_json(r.macro_precision)},
            {"recall", metric_json(r.macro_recall)},
            {"specificity", metric_json(r.macro_specificity)},
            {"f1", metric_json(r.macro_f1)},
            {"auroc", optional_number(r.macro_auroc)},
            {"aupr", optional_number(r.macro_aupr)}}},
          {"mcc", metric_json(r.mcc)},
          {"kappa", metric_json(r.kappa)},
          {"uncertainty", uncertainty_summary_json(r)}};
}

json uncertainty_summary_json(const EvalReport& r) {
  return {{"threshold", r.hus_threshold},
          {"M", r.mc_passes},
          {"num_samples", r.num_samples},
          {"max_entropy", std::log(static_cast<double>(r.class_names.size()))},
          {"mean_entropy", r.uncertainty.mean_entropy},
          {"std_entropy", r.uncertainty.std_entropy},
          {"hus_count", r.uncertainty.hus_count},
          {"misclassified", r.uncertainty.misclassified_count}};
}

std::string uncertainty_csv(const std::vector<UncertaintyRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    out += r.sample_id + "," + (r.true_label ? std::to_string(*r.true_label) : std::string()) + "," +
           std::to_string(r.predicted_label) + "," + fmt(r.entropy) + "," + fmt(r.max_prob()) + "," +
           (r.flagged ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<UncertaintyRow> parse_uncertainty_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kCsvHeader, 0) != 0) {
    throw FormatError("uncertainty CSV has an unexpected header");
  }
  std::vector<UncertaintyRow> rows;
  Index row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() < 5) throw FormatError("uncertainty CSV row " + std::to_string(row_no) + " is short");
    try {
      UncertaintyRow r;
      r.sample_id = f[0];
      if (!f[1].empty()) r.true_label = std::stol(f[1]);
      r.predicted_label = std::stol(f[2]);
      r.entropy = std::stod(f[3]);
      r.max_prob = std::stod(f[4]);
      if (!std::isfinite(r.entropy) || r.entropy < 0.0) throw std::invalid_argument("entropy");
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("uncertainty CSV row " + std::to_string(row_no) + " is malformed");
    }
  }
  return rows;
}

std::vector<UncertaintyRow> high_uncertainty_rows(std::vector<UncertaintyRow> rows, double threshold) {
  std::erase_if(rows, [&](const UncertaintyRow& r) { return !(r.entropy > threshold); });
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.entropy > b.entropy; });
  return rows;
}

std::string hus_table(const std::vector<UncertaintyRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %10s %9s %10s %6s\n", "sample_id", "entropy", "predicted",
                "prob", "truth");
  out += buf;
  for (const auto& r : rows) {
    const std::string truth = r.true_label ? std::to_string(*r.true_label) : "-";
    std::snprintf(buf, sizeof buf, "%-24s %10.6f %9ld %10.6f %6s\n", r.sample_id.c_str(), r.entropy,
                  static_cast<long>(r.predicted_label), r.max_prob, truth.c_str());
    out += buf;
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  std::string out = "threshold,x,y\n";
  for (const auto& p : points) out += fmt(p.threshold) + "," + fmt(p.x) + "," + fmt(p.y) + "\n";
  return out;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_eval_outputs(const std::filesystem::path& dir, const EvalReport& report,
                        const Evaluation& eval) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "eval_report.json", dump_json(to_json(report)));
  write_file_atomic(dir / "uncertainty.csv", uncertainty_csv(eval.records));
  write_file_atomic(dir / "uncertainty_summary.json", dump_json(uncertainty_summary_json(report)));
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& cr = report.per_class[c];
    if (!cr.auroc) continue;
    write_file_atomic(dir / ("roc_" + std::to_string(c) + ".csv"), curve_csv(cr.roc));
    write_file_atomic(dir / ("pr_" + std::to_string(c) + ".csv"), curve_csv(cr.pr));
  }
}

}  // namespace dcat
