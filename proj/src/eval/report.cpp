#include "seqemo/eval/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace seqemo {

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot open ", path, " for writing"));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) throw IoError(cat("failed while writing ", path));
}

}  // namespace

std::vector<std::vector<int64_t>> confusion_matrix(
    const std::vector<int64_t>& truth, const std::vector<int64_t>& predicted,
    int64_t num_classes) {
  if (num_classes < 1)
    throw DataError(cat("confusion matrix needs at least one class, got ",
                        num_classes));
  if (truth.size() != predicted.size())
    throw DataError(cat("label count mismatch: ", truth.size(), " true vs ",
                        predicted.size(), " predicted"));
  std::vector<std::vector<int64_t>> m(
      static_cast<size_t>(num_classes),
      std::vector<int64_t>(static_cast<size_t>(num_classes), 0));
  for (size_t i = 0; i < truth.size(); ++i) {
    const int64_t t = truth[i], p = predicted[i];
    if (t < 0 || t >= num_classes)
      throw DataError(cat("true label ", t, " at index ", i,
                          " outside [0, ", num_classes, ")"));
    if (p < 0 || p >= num_classes)
      throw DataError(cat("predicted label ", p, " at index ", i,
                          " outside [0, ", num_classes, ")"));
    m[static_cast<size_t>(t)][static_cast<size_t>(p)] += 1;
  }
  return m;
}

std::vector<ClassMetrics> precision_recall_f1(
    const std::vector<std::vector<int64_t>>& m) {
  const size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n)
      throw ShapeError(cat("confusion matrix must be square, row of ",
                           row.size(), " in a ", n, "-class matrix"));
  std::vector<ClassMetrics> out(n);
  for (size_t j = 0; j < n; ++j) {
    int64_t col = 0, row = 0;
    for (size_t i = 0; i < n; ++i) {
      col += m[i][j];
      row += m[j][i];
    }
    const int64_t tp = m[j][j];
    ClassMetrics& c = out[j];
    if (col > 0) {
      c.precision = static_cast<double>(tp) / static_cast<double>(col);
    } else {
      c.degenerate = true;
    }
    if (row > 0) {
      c.recall = static_cast<double>(tp) / static_cast<double>(row);
    } else {
      c.degenerate = true;
    }
    if (c.precision + c.recall > 0) {
      c.f1 = 2.0 * c.precision * c.recall / (c.precision + c.recall);
    } else {
      c.degenerate = true;
    }
  }
  return out;
}

EvalReport evaluate(const std::vector<int64_t>& truth,
                    const std::vector<int64_t>& predicted,
                    const std::vector<std::string>& classes) {
  if (classes.empty()) throw DataError("evaluate needs class names");
  if (truth.empty()) throw DataError("evaluate needs at least one item");
  EvalReport r;
  r.classes = classes;
  r.confusion =
      confusion_matrix(truth, predicted, static_cast<int64_t>(classes.size()));
  r.per_class = precision_recall_f1(r.confusion);
  r.total = static_cast<int64_t>(truth.size());
  int64_t trace = 0;
  for (size_t j = 0; j < classes.size(); ++j) trace += r.confusion[j][j];
  r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
  return r;
}

void emit_report(const EvalReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(cat("cannot create ", out_dir, ": ", ec.message()));

  const size_t n = report.classes.size();
  std::ostringstream cm;
  cm << "true";
  for (const auto& name : report.classes) cm << ',' << name;
  cm << '\n';
  for (size_t i = 0; i < n; ++i) {
    cm << report.classes[i];
    for (size_t j = 0; j < n; ++j) cm << ',' << report.confusion[i][j];
    cm << '\n';
  }
  write_text_file((fs::path(out_dir) / "confusion_matrix.csv").string(),
                  cm.str());

  std::ostringstream mc;
  mc << "class,precision,recall,f1,degenerate\n";
  for (size_t j = 0; j < n; ++j) {
    const auto& c = report.per_class[j];
    mc << report.classes[j] << ',' << fixed4(c.precision) << ','
       << fixed4(c.recall) << ',' << fixed4(c.f1) << ','
       << (c.degenerate ? 1 : 0) << '\n';
  }
  write_text_file((fs::path(out_dir) / "metrics.csv").string(), mc.str());

  size_t width = 5;
  for (const auto& name : report.classes) width = std::max(width, name.size());
  std::ostringstream mt;
  char line[160];
  std::snprintf(line, sizeof(line), "%-*s %9s %9s %9s\n",
                static_cast<int>(width), "class", "precision", "recall", "f1");
  mt << line;
  for (size_t j = 0; j < n; ++j) {
    const auto& c = report.per_class[j];
    std::snprintf(line, sizeof(line), "%-*s %9.4f %9.4f %9.4f%s\n",
                  static_cast<int>(width), report.classes[j].c_str(),
                  c.precision, c.recall, c.f1,
                  c.degenerate ? "  degenerate" : "");
    mt << line;
  }
  mt << '\n' << "items " << report.total << '\n'
     << "accuracy " << fixed4(report.accuracy) << '\n';
  write_text_file((fs::path(out_dir) / "metrics.txt").string(), mt.str());

  int64_t degenerate = 0;
  for (const auto& c : report.per_class) degenerate += c.degenerate ? 1 : 0;
  int64_t trace = 0;
  for (size_t j = 0; j < n; ++j) trace += report.confusion[j][j];
  std::ostringstream sm;
  sm << "items " << report.total << '\n'
     << "correct " << trace << '\n'
     << "accuracy " << fixed4(report.accuracy) << '\n'
     << "degenerate_classes " << degenerate << '\n';
  write_text_file((fs::path(out_dir) / "summary.txt").string(), sm.str());
}

void emit_fold_summary(const std::vector<double>& fold_accuracy,
                       const std::string& path) {
  if (fold_accuracy.empty()) throw DataError("no fold accuracies to write");
  std::ostringstream out;
  out << "fold,accuracy\n";
  double sum = 0.0;
  for (size_t f = 0; f < fold_accuracy.size(); ++f) {
    out << (f + 1) << ',' << fixed4(fold_accuracy[f]) << '\n';
    sum += fold_accuracy[f];
  }
  out << "Average," << fixed4(sum / static_cast<double>(fold_accuracy.size()))
      << '\n';
  write_text_file(path, out.str());
}

}  // namespace seqemo
