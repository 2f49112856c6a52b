#include "fusionkit/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "fusionkit/error.hpp"
#include "text_util.hpp"

namespace fusionkit {

namespace detail {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

namespace {

namespace fs = std::filesystem;
using detail::parse_double;
using detail::trim;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

// Whitespace-separated numeric table; every non-blank line must have the same width.
Matrix read_numeric_table(const fs::path& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields{std::string(trim(line))};
    std::string token;
    std::size_t count = 0;
    while (fields >> token) {
      const auto v = parse_double(token);
      if (!v) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": not a number: '" << token << "'";
        throw Error(Errc::Parse, msg.str());
      }
      values.push_back(*v);
      ++count;
    }
    if (count == 0) continue;
    if (rows == 0) width = count;
    if (count != width) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected " << width << " values, found " << count;
      throw Error(Errc::Integrity, msg.str());
    }
    ++rows;
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  std::copy(values.begin(), values.end(), out.data());
  return out;
}

std::vector<std::size_t> read_ucihar_labels(const fs::path& path, std::size_t class_count) {
  const Matrix raw = read_numeric_table(path);
  if (raw.rows() > 0 && raw.cols() != 1) {
    throw Error(Errc::Integrity, path.string() + ": expected one label per line");
  }
  std::vector<std::size_t> labels;
  labels.reserve(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double v = raw(i, 0);
    if (v != std::floor(v) || v < 1 || v > static_cast<double>(class_count)) {
      std::ostringstream msg;
      msg << path.string() << ":" << (i + 1) << ": label " << v << " outside 1.." << class_count;
      throw Error(Errc::Integrity, msg.str());
    }
    labels.push_back(static_cast<std::size_t>(v) - 1);
  }
  return labels;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(Errc::Io, "missing file: '" + path.string() + "'");
}

void require_same_count(std::size_t a, const fs::path& pa, std::size_t b, const fs::path& pb) {
  if (a != b) {
    std::ostringstream msg;
    msg << "row count mismatch: '" << pa.string() << "' has " << a << " rows but '" << pb.string()
        << "' has " << b;
    throw Error(Errc::Integrity, msg.str());
  }
}

LabeledDataset load_ucihar_feature_split(const fs::path& root, const std::string& split,
                                         const std::vector<std::string>& names) {
  const fs::path x_path = root / split / ("X_" + split + ".txt");
  const fs::path y_path = root / split / ("y_" + split + ".txt");
  require_file(x_path);
  require_file(y_path);
  LabeledDataset data;
  data.features = read_numeric_table(x_path);
  data.labels = read_ucihar_labels(y_path, names.size());
  data.class_names = names;
  require_same_count(static_cast<std::size_t>(data.features.rows()), x_path, data.labels.size(), y_path);
  data.validate();
  return data;
}

InertialSet load_inertial_split(const fs::path& root, const std::string& split, std::size_t class_count) {
  static const char* kChannels[kUciHarChannelCount] = {
      "body_acc_x", "body_acc_y", "body_acc_z", "total_acc_x", "total_acc_y",
      "total_acc_z", "body_gyro_x", "body_gyro_y", "body_gyro_z"};
  const fs::path y_path = root / split / ("y_" + split + ".txt");
  require_file(y_path);
  InertialSet set;
  set.labels = read_ucihar_labels(y_path, class_count);

  std::vector<Matrix> channels;
  for (const char* name : kChannels) {
    const fs::path path = root / split / "Inertial Signals" / (std::string(name) + "_" + split + ".txt");
    require_file(path);
    Matrix m = read_numeric_table(path);
    require_same_count(static_cast<std::size_t>(m.rows()), path, set.labels.size(), y_path);
    if (static_cast<std::size_t>(m.cols()) != kUciHarWindowLength) {
      std::ostringstream msg;
      msg << path.string() << ": expected " << kUciHarWindowLength << " values per row, found " << m.cols();
      throw Error(Errc::Integrity, msg.str());
    }
    channels.push_back(std::move(m));
  }
  set.windows.resize(set.labels.size());
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    Matrix w(static_cast<Eigen::Index>(kUciHarChannelCount), static_cast<Eigen::Index>(kUciHarWindowLength));
    for (std::size_t ch = 0; ch < kUciHarChannelCount; ++ch) {
      w.row(static_cast<Eigen::Index>(ch)) = channels[ch].row(static_cast<Eigen::Index>(i));
    }
    set.windows[i].values = std::move(w);
  }
  return set;
}

}  // namespace

// ---------------------------------------------------------------------------
// UCI-HAR

std::vector<std::string> ucihar_class_names(const fs::path& root) {
  const fs::path path = root / "activity_labels.txt";
  std::vector<std::string> names{"WALKING", "WALKING_UPSTAIRS", "WALKING_DOWNSTAIRS",
                                 "SITTING", "STANDING", "LAYING"};
  if (!fs::is_regular_file(path)) return names;
  std::ifstream in = detail::open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields{std::string(trim(line))};
    std::size_t id = 0;
    std::string name;
    if (!(fields >> id >> name)) continue;
    if (id < 1 || id > names.size()) {
      throw Error(Errc::Integrity, path.string() + ": activity id out of range 1..6");
    }
    names[id - 1] = name;
  }
  return names;
}

UciHarFeatures load_ucihar_features(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(Errc::Io, "missing dataset directory: '" + root.string() + "'");
  const std::vector<std::string> names = ucihar_class_names(root);
  UciHarFeatures out;
  out.train = load_ucihar_feature_split(root, "train", names);
  out.test = load_ucihar_feature_split(root, "test", names);
  if (out.train.feature_count() != out.test.feature_count()) {
    throw Error(Errc::Integrity, "UCI-HAR train and test feature widths differ");
  }
  return out;
}

UciHarInertial load_ucihar_inertial(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(Errc::Io, "missing dataset directory: '" + root.string() + "'");
  UciHarInertial out;
  out.class_names = ucihar_class_names(root);
  out.train = load_inertial_split(root, "train", out.class_names.size());
  out.test = load_inertial_split(root, "test", out.class_names.size());
  return out;
}

// ---------------------------------------------------------------------------
// WISDM raw

const std::vector<std::string>& wisdm_class_names() {
  static const std::vector<std::string> names{"Walking", "Jogging", "Upstairs",
                                              "Downstairs", "Sitting", "Standing"};
  return names;
}

WisdmStream parse_wisdm_raw(std::istream& in, const std::string& source) {
  const std::vector<std::string>& names = wisdm_class_names();
  std::map<std::string, std::size_t> lookup;
  for (std::size_t k = 0; k < names.size(); ++k) lookup[lower(names[k])] = k;

  WisdmStream out;
  out.class_names = names;
  std::string line;
  std::size_t line_no = 0;
  std::size_t first_bad_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = trim(line);
    if (!text.empty() && text.back() == ';') text = trim(text.substr(0, text.size() - 1));
    if (text.empty()) {
      ++out.skipped_blank;
      continue;
    }
    const auto fields = detail::split(text, ',');
    bool ok = fields.size() == 6;
    WisdmSample s;
    if (ok) {
      const auto user = detail::parse_int<std::uint32_t>(fields[0]);
      const auto ts = detail::parse_int<std::int64_t>(fields[2]);
      const auto x = parse_double(fields[3]);
      const auto y = parse_double(fields[4]);
      const auto z = parse_double(fields[5]);
      ok = user && ts && x && y && z && std::isfinite(*x) && std::isfinite(*y) && std::isfinite(*z);
      if (ok) {
        const std::string activity = lower(trim(fields[1]));
        const auto it = lookup.find(activity);
        if (it == lookup.end()) {
          std::ostringstream msg;
          msg << source << ":" << line_no << ": unknown activity label '" << trim(fields[1])
              << "' (known: Walking, Jogging, Upstairs, Downstairs, Sitting, Standing)";
          throw Error(Errc::UnknownLabel, msg.str());
        }
        s = {*user, it->second, *ts, *x, *y, *z};
      }
    }
    if (!ok) {
      if (out.skipped_malformed == 0) first_bad_line = line_no;
      ++out.skipped_malformed;
      continue;
    }
    out.samples.push_back(s);
  }

  const std::size_t considered = out.samples.size() + out.skipped_malformed;
  if (out.skipped_malformed > 0) {
    std::ostringstream msg;
    msg << source << ": skipped " << out.skipped_malformed << " malformed line(s) (first at line "
        << first_bad_line << ")";
    out.warnings.push_back(msg.str());
  }
  if (out.skipped_blank > 0) {
    out.warnings.push_back(source + ": skipped " + std::to_string(out.skipped_blank) + " blank line(s)");
  }
  if (considered == 0) throw Error(Errc::ParseQuality, source + ": no WISDM records found");
  if (static_cast<double>(out.skipped_malformed) >
      kWisdmMaxMalformedFraction * static_cast<double>(considered)) {
    std::ostringstream msg;
    msg << source << ": " << out.skipped_malformed << " of " << considered
        << " lines are malformed (more than 1%)";
    throw Error(Errc::ParseQuality, msg.str());
  }
  return out;
}

WisdmStream load_wisdm_raw(const fs::path& path) {
  std::ifstream in = detail::open_input(path);
  return parse_wisdm_raw(in, path.string());
}

LabeledDataset wisdm_window_features(const WisdmStream& stream, std::size_t window, double overlap) {
  LabeledDataset out;
  out.class_names = stream.class_names;
  std::vector<std::vector<double>> rows;
  std::size_t begin = 0;
  while (begin < stream.samples.size()) {
    std::size_t end = begin;
    while (end < stream.samples.size() && stream.samples[end].user == stream.samples[begin].user) ++end;
    const std::size_t n = end - begin;
    if (n >= window) {
      Matrix samples(static_cast<Eigen::Index>(n), 3);
      std::vector<std::size_t> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        const WisdmSample& s = stream.samples[begin + i];
        samples.row(static_cast<Eigen::Index>(i)) << s.x, s.y, s.z;
        labels[i] = s.label;
      }
      for (const LabeledWindow& w : sliding_windows(samples, labels, window, overlap)) {
        rows.push_back(extract_wisdm_features(w.values));
        out.labels.push_back(w.label);
      }
    }
    begin = end;
  }
  out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kWisdmFeatureCount));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < kWisdmFeatureCount; ++j) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ARFF

namespace {

struct ArffAttribute {
  std::string name;
  bool numeric = false;
  std::vector<std::string> nominal_values;  // empty for numeric/other
};

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

// Splits on commas outside single or double quotes.
std::vector<std::string> split_arff_row(std::string_view row) {
  std::vector<std::string> out;
  std::string current;
  char quote = 0;
  for (char ch : row) {
    if (quote != 0) {
      current.push_back(ch);
      if (ch == quote) quote = 0;
    } else if (ch == '\'' || ch == '"') {
      quote = ch;
      current.push_back(ch);
    } else if (ch == ',') {
      out.push_back(unquote(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  out.push_back(unquote(current));
  return out;
}

ArffAttribute parse_attribute(std::string_view rest, const std::string& where) {
  rest = trim(rest);
  ArffAttribute attr;
  std::size_t name_end = 0;
  if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
    const std::size_t close = rest.find(rest.front(), 1);
    if (close == std::string_view::npos) throw Error(Errc::Parse, where + ": unterminated attribute name");
    attr.name = std::string(rest.substr(1, close - 1));
    name_end = close + 1;
  } else {
    name_end = rest.find_first_of(" \t{");
    if (name_end == std::string_view::npos) throw Error(Errc::Parse, where + ": attribute without a type");
    attr.name = std::string(rest.substr(0, name_end));
  }
  const std::string_view type = trim(rest.substr(name_end));
  if (!type.empty() && type.front() == '{') {
    const std::size_t close = type.rfind('}');
    if (close == std::string_view::npos) throw Error(Errc::Parse, where + ": unterminated nominal set");
    for (const std::string& v : split_arff_row(type.substr(1, close - 1))) attr.nominal_values.push_back(v);
    return attr;
  }
  const std::string t = lower(type);
  attr.numeric = t == "numeric" || t == "real" || t == "integer";
  return attr;
}

bool is_identifier_column(const std::string& name) {
  const std::string n = lower(name);
  return n == "unique_id" || n == "id";
}

}  // namespace

LabeledDataset parse_arff(std::istream& in, const std::string& source) {
  std::vector<ArffAttribute> attributes;
  bool in_data = false;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> class_index;
  std::vector<std::size_t> feature_columns;
  std::vector<double> values;
  LabeledDataset out;

  const auto where = [&] { return source + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '%') continue;

    if (!in_data) {
      const std::string head = lower(text.substr(0, std::min<std::size_t>(text.size(), 10)));
      if (head.rfind("@relation", 0) == 0) continue;
      if (head.rfind("@attribute", 0) == 0) {
        attributes.push_back(parse_attribute(text.substr(10), where()));
        continue;
      }
      if (head.rfind("@data", 0) == 0) {
        in_data = true;
        for (std::size_t a = 0; a < attributes.size(); ++a) {
          if (lower(attributes[a].name) == "class" && !attributes[a].nominal_values.empty()) class_index = a;
        }
        if (!class_index) {
          for (std::size_t a = attributes.size(); a-- > 0;) {
            if (!attributes[a].nominal_values.empty()) {
              class_index = a;
              break;
            }
          }
        }
        if (!class_index) throw Error(Errc::Schema, source + ": no nominal class attribute declared");
        for (std::size_t a = 0; a < attributes.size(); ++a) {
          if (a != *class_index && attributes[a].numeric && !is_identifier_column(attributes[a].name)) {
            feature_columns.push_back(a);
          }
        }
        out.class_names = attributes[*class_index].nominal_values;
        continue;
      }
      throw Error(Errc::Parse, where() + ": unexpected header line");
    }

    if (text.front() == '{') throw Error(Errc::Parse, where() + ": sparse ARFF rows are not supported");
    const std::vector<std::string> fields = split_arff_row(text);
    if (fields.size() != attributes.size()) {
      std::ostringstream msg;
      msg << where() << ": expected " << attributes.size() << " values, found " << fields.size();
      throw Error(Errc::Parse, msg.str());
    }
    for (std::size_t col : feature_columns) {
      const std::string& field = fields[col];
      if (field == "?") {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = parse_double(field);
      if (!v || !std::isfinite(*v)) {
        std::ostringstream msg;
        msg << where() << ": non-numeric value '" << field << "' in numeric attribute '"
            << attributes[col].name << "'";
        throw Error(Errc::Parse, msg.str());
      }
      values.push_back(*v);
    }
    const std::string& label = fields[*class_index];
    const auto& classes = out.class_names;
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
      std::ostringstream msg;
      msg << where() << ": class value '" << label << "' is not declared";
      throw Error(Errc::Parse, msg.str());
    }
    out.labels.push_back(static_cast<std::size_t>(it - classes.begin()));
  }
  if (!in_data) throw Error(Errc::Schema, source + ": missing @data section");

  out.features.resize(static_cast<Eigen::Index>(out.labels.size()),
                      static_cast<Eigen::Index>(feature_columns.size()));
  std::copy(values.begin(), values.end(), out.features.data());
  out.validate(/*allow_missing=*/true);
  return out;
}

LabeledDataset load_wisdm_arff(const fs::path& path) {
  std::ifstream in = detail::open_input(path);
  return parse_arff(in, path.string());
}

RowVector impute_missing(LabeledDataset& train, std::span<LabeledDataset* const> others) {
  const Eigen::Index cols = train.features.cols();
  RowVector means = RowVector::Zero(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    double total = 0.0;
    std::size_t n = 0;
    for (Eigen::Index r = 0; r < train.features.rows(); ++r) {
      const double v = train.features(r, c);
      if (!std::isnan(v)) {
        total += v;
        ++n;
      }
    }
    means(c) = n > 0 ? total / static_cast<double>(n) : 0.0;
  }
  const auto fill = [&](LabeledDataset& d) {
    if (d.features.cols() != cols) throw Error(Errc::Shape, "impute_missing: feature widths differ");
    for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (std::isnan(d.features(r, c))) d.features(r, c) = means(c);
      }
    }
  };
  fill(train);
  for (LabeledDataset* d : others) {
    if (d != nullptr) fill(*d);
  }
  return means;
}

// ---------------------------------------------------------------------------
// Scores CSV

ScoreTable parse_score_table(std::istream& in, const std::string& source) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (line_no == 1 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (trim(text).empty()) continue;
    const auto fields = detail::split(text, ',');
    if (!have_header) {
      if (fields.size() < 3 || trim(fields[0]) != "label") {
        throw Error(Errc::Parse, source + ":" + std::to_string(line_no) +
                                     ": header must be 'label,<class_0>,...,<class_{c-1}>' with c >= 2");
      }
      for (std::size_t k = 1; k < fields.size(); ++k) table.class_names.emplace_back(trim(fields[k]));
      have_header = true;
      continue;
    }
    if (fields.size() != table.class_names.size() + 1) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": expected " << table.class_names.size() + 1 << " fields, found "
          << fields.size();
      throw Error(Errc::Parse, msg.str());
    }
    const auto label = detail::parse_int<std::size_t>(fields[0]);
    if (!label || *label >= table.class_names.size()) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": label '" << trim(fields[0]) << "' is not a class index";
      throw Error(Errc::Parse, msg.str());
    }
    table.labels.push_back(*label);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v || !std::isfinite(*v)) {
        std::ostringstream msg;
        msg << source << ":" << line_no << ": field " << (k + 1) << " is not a finite number";
        throw Error(Errc::Parse, msg.str());
      }
      values.push_back(*v);
    }
  }
  if (!have_header) throw Error(Errc::Parse, source + ": empty scores file (header required)");
  if (table.labels.empty()) throw Error(Errc::Parse, source + ": scores file has no rows");
  table.values.resize(static_cast<Eigen::Index>(table.labels.size()),
                      static_cast<Eigen::Index>(table.class_names.size()));
  std::copy(values.begin(), values.end(), table.values.data());
  return table;
}

ScoreTable read_score_table(const fs::path& path) {
  std::ifstream in = detail::open_input(path);
  return parse_score_table(in, path.string());
}

ScoresFile scores_from_table(ScoreTable table, bool renormalize, const std::string& source) {
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    const double total = table.values.row(r).sum();
    const bool in_range = (table.values.row(r).array() >= 0.0).all();
    if (!in_range) {
      std::ostringstream msg;
      msg << source << ": row " << (r + 1) << " has a negative probability";
      throw Error(Errc::Calibration, msg.str());
    }
    if (std::abs(total - 1.0) <= kScoresCsvRowTolerance) continue;
    if (!renormalize || !(total > 0.0)) {
      std::ostringstream msg;
      msg.precision(10);
      msg << source << ": row " << (r + 1) << " sums to " << total << ", outside 1 +/- "
          << kScoresCsvRowTolerance << (renormalize ? "" : " (pass --renormalize to rescale)");
      throw Error(Errc::Calibration, msg.str());
    }
    table.values.row(r) /= total;
  }
  return ScoresFile{ScoreMatrix(std::move(table.values), std::move(table.class_names), kScoresCsvRowTolerance),
                    std::move(table.labels)};
}

ScoresFile load_scores_csv(const fs::path& path, bool renormalize) {
  return scores_from_table(read_score_table(path), renormalize, path.string());
}

std::string format_scores_csv(const Matrix& values, std::span<const std::string> class_names,
                              std::span<const std::size_t> labels) {
  if (static_cast<std::size_t>(values.rows()) != labels.size() ||
      static_cast<std::size_t>(values.cols()) != class_names.size()) {
    throw Error(Errc::Shape, "scores CSV: values, labels and class names disagree in shape");
  }
  std::string out = "label";
  for (const std::string& name : class_names) out += "," + name;
  out += "\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out += std::to_string(labels[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out += ",";
      out += detail::format_double(values(r, c));
    }
    out += "\n";
  }
  return out;
}

void save_scores_csv(const Matrix& values, std::span<const std::string> class_names,
                     std::span<const std::size_t> labels, const fs::path& path) {
  detail::write_file(path, format_scores_csv(values, class_names, labels));
}

void save_scores_csv(const ScoresFile& file, const fs::path& path) {
  save_scores_csv(file.scores.values(), file.scores.class_names(), file.labels, path);
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "split: train_fraction must lie in (0, 1)");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "split: validation_fraction must lie in (0, 1)");
  }
}

namespace {

struct Partition {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

// Moves round(fraction * |pool|) indices into `first`, the rest into `second`.
Partition partition(std::span<const std::size_t> pool, std::span<const std::size_t> labels,
                    double fraction, bool stratified, std::mt19937_64& rng) {
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  Partition out;
  if (!stratified) {
    std::vector<std::size_t> order(pool.begin(), pool.end());
    shuffle(order, rng);
    out.first.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target));
    out.second.assign(order.begin() + static_cast<std::ptrdiff_t>(target), order.end());
  } else {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t idx : pool) groups[labels[idx]].push_back(idx);
    for (const auto& [label, members] : groups) {
      if (members.size() < 3) {
        std::ostringstream msg;
        msg << "stratified split: class " << label << " has only " << members.size()
            << " sample(s); at least 3 are required";
        throw Error(Errc::Stratification, msg.str());
      }
    }
    std::vector<std::size_t> quota;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    std::size_t k = 0;
    for (const auto& [label, members] : groups) {
      const double exact = fraction * static_cast<double>(members.size());
      const auto base = static_cast<std::size_t>(std::floor(exact));
      quota.push_back(base);
      assigned += base;
      remainders.emplace_back(exact - static_cast<double>(base), k++);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
      ++quota[remainders[i].second];
      ++assigned;
    }
    k = 0;
    for (auto& [label, members] : groups) {
      shuffle(members, rng);
      const auto q = static_cast<std::ptrdiff_t>(std::min(quota[k++], members.size()));
      out.first.insert(out.first.end(), members.begin(), members.begin() + q);
      out.second.insert(out.second.end(), members.begin() + q, members.end());
    }
  }
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

}  // namespace

SplitIndices split_indices(std::span<const std::size_t> labels, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  Partition outer = partition(all, labels, spec.train_fraction, spec.stratified, rng);
  Partition inner = partition(outer.first, labels, spec.validation_fraction, spec.stratified, rng);
  return SplitIndices{std::move(inner.second), std::move(inner.first), std::move(outer.second)};
}

SplitIndices validation_indices(std::span<const std::size_t> labels, double validation_fraction,
                                std::uint64_t seed, bool stratified) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "split: validation_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  Partition p = partition(all, labels, validation_fraction, stratified, rng);
  return SplitIndices{std::move(p.second), std::move(p.first), {}};
}

DatasetSplit split(const LabeledDataset& data, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(data.labels, spec);
  return DatasetSplit{data.subset(idx.train), data.subset(idx.validation), data.subset(idx.test)};
}

}  // namespace fusionkit
