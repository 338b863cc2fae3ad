#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcat/metrics.hpp"
#include "dcat/training.hpp"
#include "dcat/uncertainty.hpp"

namespace dcat {

struct ClassReport {
  std::string name;
  MetricValue precision, recall, specificity, f1;
  std::optional<double> auroc, aupr;  // nullopt when the class curve is undefined
  std::vector<CurvePoint> roc, pr;
};

struct EvalReport {
  std::vector<std::string> class_names;
  Index num_samples = 0;
  Index mc_passes = 0;
  ConfusionMatrix confusion{1};
  double accuracy = 0.0;
  std::vector<ClassReport> per_class;
  MetricValue macro_precision, macro_recall, macro_specificity, macro_f1;
  std::optional<double> macro_auroc, macro_aupr;
  MetricValue mcc, kappa;
  double hus_threshold = 0.0;
  UncertaintySummary uncertainty;
};

/// Scores an evaluation and flags records above `hus_threshold` in place.
EvalReport build_report(Evaluation& eval, const std::vector<std::string>& class_names,
                        double hus_threshold);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json uncertainty_summary_json(const EvalReport& report);

/// One row per record: sample_id,true_label,predicted_label,entropy,max_prob,flagged.
std::string uncertainty_csv(const std::vector<UncertaintyRecord>& records);

struct UncertaintyRow {
  std::string sample_id;
  std::optional<Index> true_label;
  Index predicted_label = 0;
  double max_prob = 0.0;
  double entropy = 0.0;
};
std::vector<UncertaintyRow> parse_uncertainty_csv(const std::string& text);

/// Rows with entropy > threshold, highest entropy first (stable).
std::vector<UncertaintyRow> high_uncertainty_rows(std::vector<UncertaintyRow> rows, double threshold);
std::string hus_table(const std::vector<UncertaintyRow>& rows);

/// threshold,x,y with the opening point's threshold written as "inf".
std::string curve_csv(const std::vector<CurvePoint>& points);

/// Writes eval_report.json, uncertainty.csv, uncertainty_summary.json and
/// roc_<k>.csv / pr_<k>.csv for every class with a defined curve.
void write_eval_outputs(const std::filesystem::path& dir, const EvalReport& report,
                        const Evaluation& eval);

std::string dump_json(const nlohmann::json& j);

}  // namespace dcat
