#ifndef SEQEMO_EVAL_REPORT_HPP
#define SEQEMO_EVAL_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "seqemo/common.hpp"

namespace seqemo {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // True when a zero denominator forced one of the values to 0.
  bool degenerate = false;
};

// Confusion rows are true classes, columns are predictions.
struct EvalReport {
  std::vector<std::string> classes;
  std::vector<std::vector<int64_t>> confusion;
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  int64_t total = 0;
};

std::vector<std::vector<int64_t>> confusion_matrix(
    const std::vector<int64_t>& truth, const std::vector<int64_t>& predicted,
    int64_t num_classes);

std::vector<ClassMetrics> precision_recall_f1(
    const std::vector<std::vector<int64_t>>& m);

EvalReport evaluate(const std::vector<int64_t>& truth,
                    const std::vector<int64_t>& predicted,
                    const std::vector<std::string>& classes);

// Writes confusion_matrix.csv, metrics.csv, metrics.txt and summary.txt into
// out_dir, creating it if needed. Byte-deterministic for equal reports.
void emit_report(const EvalReport& report, const std::string& out_dir);

// One accuracy row per fold followed by an "Average" row.
void emit_fold_summary(const std::vector<double>& fold_accuracy,
                       const std::string& path);

}  // namespace seqemo

#endif  // SEQEMO_EVAL_REPORT_HPP
