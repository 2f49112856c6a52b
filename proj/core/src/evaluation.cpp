#include "fusionkit/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fusionkit/error.hpp"
#include "text_util.hpp"

namespace fusionkit {

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left_align) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left_align ? s + fill : fill + s;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::string> class_names)
    : classes_(classes), class_names_(std::move(class_names)), counts_(classes * classes, 0) {
  if (class_names_.empty()) {
    for (std::size_t k = 0; k < classes_; ++k) class_names_.push_back(std::to_string(k));
  }
  if (class_names_.size() != classes_) throw Error(Errc::Shape, "confusion: class name count mismatch");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
  if (truth >= classes_ || predicted >= classes_) {
    std::ostringstream msg;
    msg << "confusion: label pair (" << truth << ", " << predicted << ") out of range for " << classes_
        << " classes";
    throw Error(Errc::InvalidInput, msg.str());
  }
  counts_[truth * classes_ + predicted] += count;
}

std::size_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t t = 0;
  for (std::size_t k = 0; k < classes_; ++k) t += counts_[k * classes_ + k];
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < classes_; ++t) s += at(t, predicted);
  return s;
}

ConfusionMatrix confusion(std::span<const std::size_t> true_labels,
                          std::span<const std::size_t> predicted_labels, std::size_t classes,
                          std::vector<std::string> class_names) {
  if (true_labels.size() != predicted_labels.size()) {
    std::ostringstream msg;
    msg << "confusion: " << true_labels.size() << " true labels but " << predicted_labels.size()
        << " predictions";
    throw Error(Errc::Shape, msg.str());
  }
  ConfusionMatrix cm(classes, std::move(class_names));
  for (std::size_t i = 0; i < true_labels.size(); ++i) cm.add(true_labels[i], predicted_labels[i]);
  return cm;
}

double accuracy_percent(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.classes() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    const auto tp = static_cast<double>(cm.at(k, k));
    const auto predicted = static_cast<double>(cm.column_sum(k));
    const auto actual = static_cast<double>(cm.row_sum(k));
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = actual > 0 ? tp / actual : 0.0;
    if (precision + recall > 0.0) sum += 2.0 * precision * recall / (precision + recall);
  }
  return 100.0 * sum / static_cast<double>(cm.classes());
}

std::vector<double> per_class_recall(const ConfusionMatrix& cm) {
  std::vector<double> out;
  out.reserve(cm.classes());
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    const std::size_t row = cm.row_sum(k);
    out.push_back(row == 0 ? 0.0 : 100.0 * static_cast<double>(cm.at(k, k)) / static_cast<double>(row));
  }
  return out;
}

EvaluationReport evaluate(std::string method, std::string dataset, std::span<const std::size_t> true_labels,
                          std::span<const std::size_t> predicted_labels,
                          const std::vector<std::string>& class_names) {
  EvaluationReport report;
  report.method = std::move(method);
  report.dataset = std::move(dataset);
  report.confusion = confusion(true_labels, predicted_labels, class_names.size(), class_names);
  report.accuracy = accuracy_percent(report.confusion);
  report.macro_f1 = macro_f1(report.confusion);
  report.per_class_recall = per_class_recall(report.confusion);
  return report;
}

std::string render_report_text(const EvaluationReport& r) {
  std::ostringstream out;
  out << "method: " << r.method << "\n";
  out << "dataset: " << r.dataset << "\n";
  out << "metrics: accuracy (%), F1 = macro-averaged F1 over classes (%)\n";
  out << "samples: " << r.confusion.total() << "\n";
  out << "accuracy: " << percent(r.accuracy) << "\n";
  out << "macro_f1: " << percent(r.macro_f1) << "\n";
  for (const auto& [key, value] : r.config) out << "config." << key << ": " << value << "\n";
  if (!r.fusion_weights.empty()) {
    out << "fusion weights:\n";
    for (const auto& [name, w] : r.fusion_weights) out << "  " << name << ": " << detail::format_double(w) << "\n";
  }

  std::size_t name_width = 5;
  for (const std::string& n : r.confusion.class_names()) name_width = std::max(name_width, n.size());
  out << "per-class recall (%):\n";
  for (std::size_t k = 0; k < r.per_class_recall.size(); ++k) {
    out << "  " << pad(r.confusion.class_names()[k], name_width, true) << "  " << percent(r.per_class_recall[k])
        << "\n";
  }

  std::size_t cell = 6;
  for (std::size_t t = 0; t < r.confusion.classes(); ++t) {
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) {
      cell = std::max(cell, std::to_string(r.confusion.at(t, p)).size() + 1);
    }
  }
  out << "confusion (rows = true, columns = predicted):\n";
  out << "  " << pad("", name_width, true);
  for (std::size_t p = 0; p < r.confusion.classes(); ++p) out << pad(std::to_string(p), cell, false);
  out << "\n";
  for (std::size_t t = 0; t < r.confusion.classes(); ++t) {
    out << "  " << pad(r.confusion.class_names()[t], name_width, true);
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) {
      out << pad(std::to_string(r.confusion.at(t, p)), cell, false);
    }
    out << "\n";
  }
  return out.str();
}

std::string render_report_csv(const EvaluationReport& r) {
  std::ostringstream out;
  out << "key,value\n";
  out << "method," << csv_escape(r.method) << "\n";
  out << "dataset," << csv_escape(r.dataset) << "\n";
  out << "f1_variant,macro\n";
  out << "samples," << r.confusion.total() << "\n";
  out << "accuracy," << detail::format_double(r.accuracy) << "\n";
  out << "macro_f1," << detail::format_double(r.macro_f1) << "\n";
  for (std::size_t k = 0; k < r.per_class_recall.size(); ++k) {
    out << "recall." << csv_escape(r.confusion.class_names()[k]) << ","
        << detail::format_double(r.per_class_recall[k]) << "\n";
  }
  for (const auto& [name, w] : r.fusion_weights) {
    out << "weight." << csv_escape(name) << "," << detail::format_double(w) << "\n";
  }
  for (const auto& [key, value] : r.config) out << "config." << key << "," << csv_escape(value) << "\n";
  return out.str();
}

std::string render_confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\predicted";
  for (const std::string& n : cm.class_names()) out << "," << csv_escape(n);
  out << "\n";
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    out << csv_escape(cm.class_names()[t]);
    for (std::size_t p = 0; p < cm.classes(); ++p) out << "," << cm.at(t, p);
    out << "\n";
  }
  return out.str();
}

ComparisonTable comparison_table(std::span<const EvaluationReport> reports) {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  for (const EvaluationReport& r : reports) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  }
  const auto find = [&](const std::string& m, const std::string& d) -> const EvaluationReport* {
    for (const EvaluationReport& r : reports) {
      if (r.method == m && r.dataset == d) return &r;
    }
    return nullptr;
  };

  std::size_t method_width = 9;
  for (const std::string& m : methods) method_width = std::max(method_width, m.size());
  std::size_t col = 9;
  for (const std::string& d : datasets) col = std::max(col, d.size() / 2 + 2);

  std::ostringstream text;
  std::ostringstream csv;
  text << pad("Technique", method_width, true);
  csv << "method";
  for (const std::string& d : datasets) {
    text << "  " << pad(d, 2 * col + 2, true);
    csv << "," << csv_escape(d + " acc") << "," << csv_escape(d + " f1");
  }
  text << "\n" << pad("", method_width, true);
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    text << "  " << pad("Acc (%)", col, true) << "  " << pad("F1-score", col, true);
  }
  text << "\n";
  csv << "\n";
  for (const std::string& m : methods) {
    text << pad(m, method_width, true);
    csv << csv_escape(m);
    for (const std::string& d : datasets) {
      const EvaluationReport* r = find(m, d);
      text << "  " << pad(r ? percent(r->accuracy) : "-", col, true) << "  "
           << pad(r ? percent(r->macro_f1) : "-", col, true);
      csv << "," << (r ? detail::format_double(r->accuracy) : "") << ","
          << (r ? detail::format_double(r->macro_f1) : "");
    }
    text << "\n";
    csv << "\n";
  }
  return ComparisonTable{text.str(), csv.str()};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<ComparisonCell> parse_comparison_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::Parse, "comparison CSV: missing header");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "method" || header.size() % 2 != 1) {
    throw Error(Errc::Parse, "comparison CSV: malformed header");
  }
  std::vector<ComparisonCell> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) throw Error(Errc::Parse, "comparison CSV: ragged row");
    for (std::size_t i = 1; i + 1 < fields.size(); i += 2) {
      if (fields[i].empty()) continue;
      const auto acc = detail::parse_double(fields[i]);
      const auto f1 = detail::parse_double(fields[i + 1]);
      if (!acc || !f1) throw Error(Errc::Parse, "comparison CSV: non-numeric cell");
      std::string dataset = header[i];
      dataset = dataset.substr(0, dataset.size() - 4);  // strip " acc"
      out.push_back({fields[0], dataset, *acc, *f1});
    }
  }
  return out;
}

}  // namespace fusionkit
