#include "xfer/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "xfer/error.hpp"
#include "xfer/io.hpp"

namespace xfer {

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::vector<std::string> class_names)
    : ConfusionMatrix(k, std::vector<std::uint64_t>(k * k, 0), std::move(class_names)) {}

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> counts,
                                 std::vector<std::string> class_names)
    : k_(k), counts_(std::move(counts)), names_(std::move(class_names)) {
  if (k_ == 0) throw UsageError("confusion matrix needs at least one class");
  if (counts_.size() != k_ * k_) throw DataError("confusion matrix needs k*k counts");
  if (!names_.empty() && names_.size() != k_) {
    throw DataError("confusion matrix has " + std::to_string(k_) + " classes but " +
                    std::to_string(names_.size()) + " names");
  }
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted) {
  if (actual >= k_ || predicted >= k_) {
    throw DataError("label pair (" + std::to_string(actual) + ", " + std::to_string(predicted) +
                    ") out of range for " + std::to_string(k_) + " classes");
  }
  ++counts_[actual * k_ + predicted];
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw DataError("cannot merge confusion matrices of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < k_; ++c) t += at(c, c);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += at(c, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t a = 0; a < k_; ++a) s += at(a, c);
  return s;
}

ConfusionMatrix confusion_from_predictions(std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                           std::size_t k, std::vector<std::string> class_names) {
  ConfusionMatrix cm(k, std::move(class_names));
  for (const auto& [actual, predicted] : pairs) cm.add(actual, predicted);
  return cm;
}

ClassCounts class_counts(const ConfusionMatrix& cm, std::size_t c) {
  ClassCounts n;
  n.tp = cm.at(c, c);
  n.fn = cm.row_sum(c) - n.tp;
  n.fp = cm.col_sum(c) - n.tp;
  n.tn = cm.total() - n.tp - n.fp - n.fn;
  return n;
}

namespace {
double ratio_or_zero(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw UsageError("metrics of an empty confusion matrix are undefined");
  std::vector<ClassMetrics> out;
  out.reserve(cm.k());
  for (std::size_t c = 0; c < cm.k(); ++c) {
    const ClassCounts n = class_counts(cm, c);
    ClassMetrics m;
    m.precision = ratio_or_zero(n.tp, n.tp + n.fp);
    m.recall = ratio_or_zero(n.tp, n.tp + n.fn);
    m.accuracy = ratio_or_zero(n.tp + n.tn, total);
    const double pr = m.precision + m.recall;
    m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
    out.push_back(m);
  }
  return out;
}

ClassMetrics macro_average(std::span<const ClassMetrics> per_class) {
  if (per_class.empty()) throw UsageError("macro average of zero classes");
  ClassMetrics sum;
  for (const auto& m : per_class) {
    sum.precision += m.precision;
    sum.recall += m.recall;
    sum.accuracy += m.accuracy;
    sum.f1 += m.f1;
  }
  const auto n = static_cast<double>(per_class.size());
  return ClassMetrics{sum.precision / n, sum.recall / n, sum.accuracy / n, sum.f1 / n};
}

Ratio Ratio::make(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw UsageError("ratio with zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Ratio{0, 1} : Ratio{num / g, den / g};
}

std::vector<Ratio> exact_accuracies(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw UsageError("metrics of an empty confusion matrix are undefined");
  std::vector<Ratio> out;
  for (std::size_t c = 0; c < cm.k(); ++c) {
    const ClassCounts n = class_counts(cm, c);
    out.push_back(Ratio::make(n.tp + n.tn, total));
  }
  return out;
}

Ratio exact_mean(std::span<const Ratio> values) {
  if (values.empty()) throw UsageError("mean of zero values");
  Ratio sum{0, 1};
  for (const Ratio& r : values) {
    const std::uint64_t l = std::lcm(sum.den, r.den);
    sum = Ratio::make(sum.num * (l / sum.den) + r.num * (l / r.den), l);
  }
  return Ratio::make(sum.num, sum.den * values.size());
}

MetricsReport make_report(const ConfusionMatrix& cm) {
  const auto per = per_class_metrics(cm);
  MetricsReport r;
  for (std::size_t c = 0; c < cm.k(); ++c) {
    const std::string name =
        cm.class_names().empty() ? "class" + std::to_string(c) : cm.class_names()[c];
    r.classes.push_back(ClassReport{name, per[c]});
  }
  r.macro = macro_average(per);
  r.total_examples = cm.total();
  return r;
}

namespace {

std::string metrics_json(const ClassMetrics& m) {
  return "\"precision\": " + fixed(m.precision) + ", \"recall\": " + fixed(m.recall) +
         ", \"accuracy\": " + fixed(m.accuracy) + ", \"f1\": " + fixed(m.f1);
}

std::string report_json(const MetricsReport& r) {
  std::string out = "{\n  \"classes\": [";
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"name\": " + nlohmann::json(r.classes[i].name).dump() + ", " +
           metrics_json(r.classes[i].metrics) + "}";
  }
  out += "\n  ],\n  \"macro\": {" + metrics_json(r.macro) + "},\n";
  out += "  \"total\": " + std::to_string(r.total_examples) + "\n}\n";
  return out;
}

std::string report_table(const MetricsReport& r) {
  std::size_t width = 5;  // "class", "macro"
  for (const auto& c : r.classes) width = std::max(width, c.name.size());
  std::ostringstream os;
  const auto row = [&](const std::string& name, const std::string& p, const std::string& rc,
                       const std::string& a, const std::string& f) {
    os << std::left << std::setw(static_cast<int>(width)) << name << std::right << "  "
       << std::setw(9) << p << "  " << std::setw(9) << rc << "  " << std::setw(9) << a << "  "
       << std::setw(9) << f << "\n";
  };
  row("class", "precision", "recall", "accuracy", "f1");
  for (const auto& c : r.classes) {
    row(c.name, fixed(c.metrics.precision), fixed(c.metrics.recall), fixed(c.metrics.accuracy),
        fixed(c.metrics.f1));
  }
  row("macro", fixed(r.macro.precision), fixed(r.macro.recall), fixed(r.macro.accuracy),
      fixed(r.macro.f1));
  return os.str();
}

}  // namespace

std::string emit_report(const MetricsReport& report, ReportFormat format) {
  return format == ReportFormat::json ? report_json(report) : report_table(report);
}

MetricsReport parse_report_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto metrics = [](const nlohmann::json& j) {
      return ClassMetrics{j.at("precision").get<double>(), j.at("recall").get<double>(),
                          j.at("accuracy").get<double>(), j.at("f1").get<double>()};
    };
    MetricsReport r;
    for (const auto& c : doc.at("classes")) {
      r.classes.push_back(ClassReport{c.at("name").get<std::string>(), metrics(c)});
    }
    r.macro = metrics(doc.at("macro"));
    r.total_examples = doc.at("total").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

}  // namespace

ConfusionMatrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.size() < 2) throw DataError("confusion matrix CSV needs a header and at least one row");
  const std::size_t k = rows.size() - 1;
  std::vector<std::string> header = rows[0];
  if (header.size() == k + 1) header.erase(header.begin());
  if (header.size() != k) {
    throw DataError("confusion matrix CSV header has " + std::to_string(rows[0].size()) +
                    " cells for " + std::to_string(k) + " rows");
  }
  std::vector<std::uint64_t> counts;
  std::vector<std::string> names;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != k + 1) {
      throw DataError("confusion matrix CSV row " + std::to_string(r) + " needs " +
                      std::to_string(k + 1) + " cells");
    }
    names.push_back(rows[r][0]);
    for (std::size_t c = 1; c <= k; ++c) {
      const std::string& cell = rows[r][c];
      if (cell.empty() || cell.find_first_not_of("0123456789") != std::string::npos) {
        throw DataError("confusion matrix CSV row " + std::to_string(r) + ": '" + cell +
                        "' is not a non-negative integer");
      }
      counts.push_back(std::stoull(cell));
    }
  }
  return ConfusionMatrix(k, std::move(counts), std::move(names));
}

std::string matrix_csv(const ConfusionMatrix& cm) {
  std::vector<std::string> names = cm.class_names();
  if (names.empty()) {
    for (std::size_t c = 0; c < cm.k(); ++c) names.push_back("class" + std::to_string(c));
  }
  std::string out = "actual";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t a = 0; a < cm.k(); ++a) {
    out += names[a];
    for (std::size_t p = 0; p < cm.k(); ++p) out += "," + std::to_string(cm.at(a, p));
    out += "\n";
  }
  return out;
}

}  // namespace xfer
