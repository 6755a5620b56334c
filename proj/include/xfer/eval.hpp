#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace xfer {

/// k x k counts, rows = actual class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k, std::vector<std::string> class_names = {});
  /// Takes ownership of explicit counts (row-major, k*k entries).
  ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> counts,
                  std::vector<std::string> class_names);

  std::size_t k() const { return k_; }
  const std::vector<std::string>& class_names() const { return names_; }
  std::uint64_t at(std::size_t actual, std::size_t predicted) const {
    return counts_[actual * k_ + predicted];
  }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// Throws DataError if either label is outside [0, k).
  void add(std::size_t actual, std::size_t predicted);
  /// Entrywise sum; matrices must have the same k.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t col_sum(std::size_t c) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::string> names_;
};

ConfusionMatrix confusion_from_predictions(std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                           std::size_t k,
                                           std::vector<std::string> class_names = {});

/// One-vs-rest tallies for a single class.
struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};
ClassCounts class_counts(const ConfusionMatrix& cm, std::size_t c);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Precision TP/(TP+FP), recall TP/(TP+FN), one-vs-rest accuracy
/// (TP+TN)/total, F1 = 2PR/(P+R). Any 0/0 is taken as 0.
/// Throws UsageError on an empty matrix.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);
/// Unweighted mean of each field. Throws UsageError on an empty list.
ClassMetrics macro_average(std::span<const ClassMetrics> per_class);

/// Exact non-negative rational, always reduced.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  static Ratio make(std::uint64_t num, std::uint64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};
/// Per-class one-vs-rest accuracy as exact fractions.
std::vector<Ratio> exact_accuracies(const ConfusionMatrix& cm);
/// Exact unweighted mean of fractions.
Ratio exact_mean(std::span<const Ratio> values);

struct ClassReport {
  std::string name;
  ClassMetrics metrics;
  friend bool operator==(const ClassReport&, const ClassReport&) = default;
};

struct MetricsReport {
  std::vector<ClassReport> classes;
  ClassMetrics macro;
  std::uint64_t total_examples = 0;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Per-class and macro metrics; classes without names get "class<i>".
MetricsReport make_report(const ConfusionMatrix& cm);

enum class ReportFormat { json, table };

/// JSON: {"classes":[{"name","precision","recall","accuracy","f1"}...],
/// "macro":{...},"total":n} with 6 fractional digits. Table: aligned
/// columns class/precision/recall/accuracy/f1 plus a macro row.
std::string emit_report(const MetricsReport& report, ReportFormat format);
MetricsReport parse_report_json(const std::string& text);

/// Confusion-matrix CSV: header row of class names, then k rows
/// `actual_name,c1,...,ck`. An optional leading header cell is ignored;
/// class names are taken from the row labels.
ConfusionMatrix parse_matrix_csv(const std::string& text);
std::string matrix_csv(const ConfusionMatrix& cm);

}  // namespace xfer
