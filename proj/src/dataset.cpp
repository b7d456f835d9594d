#include "premium/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "premium/error.hpp"
#include "premium/rng.hpp"

namespace premium {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

void check_header(std::string_view line, std::string_view source) {
  auto cells = split_line(line);
  std::vector<std::string> got;
  for (auto c : cells) got.emplace_back(trim(c));
  // Tolerate a UTF-8 byte order mark on the first cell.
  if (!got.empty() && got.front().starts_with("\xEF\xBB\xBF")) {
    got.front().erase(0, 3);
  }
  const std::vector<std::string> expected(kCsvColumns.begin(),
                                          kCsvColumns.end());
  if (got == expected) return;

  std::set<std::string> got_set(got.begin(), got.end());
  std::set<std::string> want_set(expected.begin(), expected.end());
  std::vector<std::string> unexpected;
  std::vector<std::string> missing;
  for (const auto& g : got) {
    if (!want_set.contains(g)) unexpected.push_back(g);
  }
  for (const auto& w : expected) {
    if (!got_set.contains(w)) missing.push_back(w);
  }
  std::string msg = std::string(source) + ": header mismatch";
  if (!unexpected.empty()) msg += "; unexpected columns: " + join(unexpected);
  if (!missing.empty()) msg += "; missing columns: " + join(missing);
  if (unexpected.empty() && missing.empty()) {
    msg += "; columns are out of order (expected " + join(expected) + ")";
  }
  throw ValidationError(msg);
}

double parse_number(std::string_view cell, std::size_t line_no,
                    std::string_view column, std::string_view source) {
  const std::string_view t = trim(cell);
  auto where = [&] {
    return std::string(source) + ": line " + std::to_string(line_no) +
           ", column " + std::string(column);
  };
  if (t.empty()) throw ValidationError(where() + ": missing value");
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ValidationError(where() + ": non-numeric value '" + std::string(t) +
                          "'");
  }
  return value;
}

int as_integer(double value, std::size_t line_no, std::string_view column,
               std::string_view source) {
  if (value != std::floor(value) || value < 0.0 || value > 1e9) {
    throw ValidationError(std::string(source) + ": line " +
                          std::to_string(line_no) + ", column " +
                          std::string(column) +
                          ": expected a non-negative integer");
  }
  return static_cast<int>(value);
}

int as_flag(double value, std::size_t line_no, std::string_view column,
            std::string_view source) {
  if (value != 0.0 && value != 1.0) {
    throw ValidationError(std::string(source) + ": line " +
                          std::to_string(line_no) + ", column " +
                          std::string(column) +
                          ": binary value must be 0 or 1");
  }
  return static_cast<int>(value);
}

double as_positive(double value, std::size_t line_no, std::string_view column,
                   std::string_view source) {
  if (!(value > 0.0)) {
    throw ValidationError(std::string(source) + ": line " +
                          std::to_string(line_no) + ", column " +
                          std::string(column) + ": value must be > 0");
  }
  return value;
}

void require_rows(std::span<const std::size_t> rows, std::size_t n) {
  for (const auto r : rows) {
    if (r >= n) throw ValidationError("row index out of range");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw ValidationError("feature matrix has " + std::to_string(x.rows()) +
                          " rows but target has " + std::to_string(y.size()));
  }
  if (feature_names.size() != x.cols()) {
    throw ValidationError("feature name count does not match column count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names) {
    if (!seen.insert(name).second) {
      throw ValidationError("duplicate feature name '" + name + "'");
    }
  }
}

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const {
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return j;
  }
  return std::nullopt;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  require_rows(rows, n());
  Dataset out;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.x = x.select_rows(rows);
  out.y = select(y, rows);
  return out;
}

std::vector<RawRecord> parse_insurance_csv(std::string_view text,
                                           std::string_view source) {
  std::vector<RawRecord> records;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      check_header(line, source);
      header_seen = true;
      continue;
    }
    const auto cells = split_line(line);
    if (cells.size() != kCsvColumns.size()) {
      throw ValidationError(std::string(source) + ": line " +
                            std::to_string(line_no) + ": expected " +
                            std::to_string(kCsvColumns.size()) +
                            " cells, found " + std::to_string(cells.size()));
    }
    std::array<double, kCsvColumns.size()> v{};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      v[c] = parse_number(cells[c], line_no, kCsvColumns[c], source);
    }
    RawRecord r;
    r.age = as_integer(v[0], line_no, kCsvColumns[0], source);
    r.diabetes = as_flag(v[1], line_no, kCsvColumns[1], source);
    r.blood_pressure_problems = as_flag(v[2], line_no, kCsvColumns[2], source);
    r.any_transplants = as_flag(v[3], line_no, kCsvColumns[3], source);
    r.any_chronic_diseases = as_flag(v[4], line_no, kCsvColumns[4], source);
    r.height_cm = as_positive(v[5], line_no, kCsvColumns[5], source);
    r.weight_kg = as_positive(v[6], line_no, kCsvColumns[6], source);
    r.known_allergies = as_flag(v[7], line_no, kCsvColumns[7], source);
    r.history_of_cancer_in_family =
        as_flag(v[8], line_no, kCsvColumns[8], source);
    r.number_of_major_surgeries =
        as_integer(v[9], line_no, kCsvColumns[9], source);
    r.premium_price = as_positive(v[10], line_no, kCsvColumns[10], source);
    records.push_back(r);
  }
  if (!header_seen) throw ValidationError(std::string(source) + ": empty file");
  if (records.empty()) throw ValidationError(std::string(source) + ": no rows");
  return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path) {
  return parse_insurance_csv(read_text_file(path), path.string());
}

std::vector<std::vector<std::size_t>> detect_duplicates(
    std::span<const RawRecord> records) {
  std::map<RawRecord, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    groups[records[i]].push_back(i);
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto& [record, rows] : groups) {
    if (rows.size() > 1) out.push_back(std::move(rows));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

double body_mass_index(double weight_kg, double height_cm) {
  if (!(height_cm > 0.0)) {
    throw ValidationError("height must be > 0 to derive BMI");
  }
  const double height_m = height_cm / 100.0;
  return weight_kg / (height_m * height_m);
}

Dataset derive_features(std::span<const RawRecord> records) {
  Dataset out;
  out.feature_names.assign(kModelFeatures.begin(), kModelFeatures.end());
  out.x = Matrix(records.size(), kModelFeatures.size());
  out.y.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& r = records[i];
    auto row = out.x.row(i);
    row[0] = r.age;
    row[1] = r.diabetes;
    row[2] = r.blood_pressure_problems;
    row[3] = r.any_transplants;
    row[4] = r.any_chronic_diseases;
    row[5] = body_mass_index(r.weight_kg, r.height_cm);
    row[6] = r.known_allergies;
    row[7] = r.history_of_cancer_in_family;
    row[8] = r.number_of_major_surgeries;
    out.y[i] = r.premium_price;
  }
  return out;
}

Dataset raw_table(std::span<const RawRecord> records) {
  Dataset out;
  out.feature_names.assign(kCsvColumns.begin(), kCsvColumns.end() - 1);
  out.x = Matrix(records.size(), kCsvColumns.size() - 1);
  out.y.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& r = records[i];
    auto row = out.x.row(i);
    row[0] = r.age;
    row[1] = r.diabetes;
    row[2] = r.blood_pressure_problems;
    row[3] = r.any_transplants;
    row[4] = r.any_chronic_diseases;
    row[5] = r.height_cm;
    row[6] = r.weight_kg;
    row[7] = r.known_allergies;
    row[8] = r.history_of_cancer_in_family;
    row[9] = r.number_of_major_surgeries;
    out.y[i] = r.premium_price;
  }
  return out;
}

// ---------------------------------------------------------------------------

void ScalerState::transform(std::span<const double> in,
                            std::span<double> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw ValidationError("scaler expects " + std::to_string(size()) +
                          " columns, got " + std::to_string(in.size()));
  }
  for (std::size_t j = 0; j < in.size(); ++j) {
    out[j] = (in[j] - mean[j]) / stddev[j];
  }
}

void ScalerState::inverse(std::span<const double> in,
                          std::span<double> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw ValidationError("scaler expects " + std::to_string(size()) +
                          " columns, got " + std::to_string(in.size()));
  }
  for (std::size_t j = 0; j < in.size(); ++j) {
    out[j] = in[j] * stddev[j] + mean[j];
  }
}

ScalerState fit_scaler(const Dataset& data, std::span<const std::size_t> rows,
                       ConstantColumns policy) {
  data.validate();
  if (rows.size() < 2) {
    throw ValidationError("scaler needs at least two rows");
  }
  require_rows(rows, data.n());
  ScalerState state;
  state.mean.resize(data.m());
  state.stddev.resize(data.m());
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < data.m(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = data.x(rows[i], j);
    }
    const double sd = sample_stddev(column);
    if (sd == 0.0) {
      if (policy == ConstantColumns::kReject) {
        throw ValidationError("constant column '" + data.feature_names[j] +
                              "' cannot be standardized");
      }
      state.mean[j] = 0.0;
      state.stddev[j] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const double v : column) sum += v;
    state.mean[j] = sum / static_cast<double>(column.size());
    state.stddev[j] = sd;
  }
  return state;
}

Dataset apply_scaler(const ScalerState& state, const Dataset& data) {
  data.validate();
  if (state.size() != data.m()) {
    throw ValidationError("scaler fitted on " + std::to_string(state.size()) +
                          " columns, dataset has " + std::to_string(data.m()));
  }
  Dataset out = data;
  for (std::size_t i = 0; i < out.n(); ++i) {
    state.transform(data.x.row(i), out.x.row(i));
  }
  return out;
}

Matrix invert_scaler(const ScalerState& state, const Matrix& scaled) {
  if (state.size() != scaled.cols()) {
    throw ValidationError("scaler/matrix column count mismatch");
  }
  Matrix out(scaled.rows(), scaled.cols());
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    state.inverse(scaled.row(i), out.row(i));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t split_train_size(std::size_t n, double fraction) {
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 0.5));
}

SplitIndices train_test_split(std::size_t n, double fraction,
                              std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("split fraction must lie strictly between 0 and 1");
  }
  if (n < 2) throw ValidationError("need at least two rows to split");
  const std::size_t n_train = split_train_size(n, fraction);
  if (n_train == 0 || n_train == n) {
    throw ValidationError("split fraction leaves an empty partition");
  }
  RandomStream stream(seed, StreamTag::kSplit);
  const auto perm = stream.permutation(n);
  SplitIndices out;
  out.seed = seed;
  out.train_rows.assign(perm.begin(), perm.begin() + n_train);
  out.test_rows.assign(perm.begin() + n_train, perm.end());
  return out;
}

// ---------------------------------------------------------------------------

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ColumnSummary summarize_column(std::string name,
                               std::span<const double> values) {
  if (values.empty()) throw ValidationError("summary of an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  ColumnSummary s;
  s.name = std::move(name);
  s.count = values.size();
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.stddev = sample_stddev(values);
  s.min = sorted.front();
  s.q1 = quantile_linear(sorted, 0.25);
  s.median = quantile_linear(sorted, 0.5);
  s.q3 = quantile_linear(sorted, 0.75);
  s.max = sorted.back();
  return s;
}

SummaryStats summary_statistics(const Dataset& data) {
  data.validate();
  if (data.n() == 0) throw ValidationError("summary of an empty dataset");
  SummaryStats out;
  for (std::size_t j = 0; j < data.m(); ++j) {
    out.columns.push_back(
        summarize_column(data.feature_names[j], data.x.column(j)));
  }
  out.columns.push_back(summarize_column(data.target_name, data.y));
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("length mismatch");
  if (a.size() < 2) throw ValidationError("correlation needs n >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw NumericError("correlation undefined for a constant column");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CorrelationMatrix pearson_correlation(const Dataset& data,
                                      bool include_target) {
  data.validate();
  CorrelationMatrix out;
  std::vector<std::vector<double>> columns;
  for (std::size_t j = 0; j < data.m(); ++j) {
    out.names.push_back(data.feature_names[j]);
    columns.push_back(data.x.column(j));
  }
  if (include_target) {
    out.names.push_back(data.target_name);
    columns.push_back(data.y);
  }
  const std::size_t k = columns.size();
  out.r = Matrix(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    out.r(a, a) = 1.0;
    for (std::size_t b = a + 1; b < k; ++b) {
      const double r = pearson(columns[a], columns[b]);
      out.r(a, b) = r;
      out.r(b, a) = r;
    }
  }
  // A constant column has no unit self-correlation either.
  for (std::size_t a = 0; a < k; ++a) {
    if (sample_stddev(columns[a]) == 0.0) {
      throw NumericError("correlation undefined for constant column '" +
                         out.names[a] + "'");
    }
  }
  return out;
}

std::vector<GroupStats> group_summary(const Dataset& data,
                                      std::string_view feature) {
  data.validate();
  const auto j = data.feature_index(feature);
  if (!j) {
    throw ValidationError("unknown feature '" + std::string(feature) + "'");
  }
  std::map<double, std::vector<double>> groups;
  for (std::size_t i = 0; i < data.n(); ++i) {
    groups[data.x(i, *j)].push_back(data.y[i]);
  }
  std::vector<GroupStats> out;
  for (const auto& [value, targets] : groups) {
    GroupStats g;
    g.value = value;
    g.premium = summarize_column(data.target_name, targets);
    out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------

Json dataset_to_json(const Dataset& data, std::uint64_t seed) {
  data.validate();
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "dataset";
  doc["feature_names"] = data.feature_names;
  doc["target_name"] = data.target_name;
  doc["n"] = data.n();
  doc["m"] = data.m();
  Json rows = Json::array();
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = data.x.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["x"] = std::move(rows);
  doc["y"] = data.y;
  Json config;
  config["feature_names"] = data.feature_names;
  config["n"] = data.n();
  doc["meta"] = artifact_meta(seed, config);
  return doc;
}

Dataset dataset_from_json(const Json& doc) {
  require_document(doc, "dataset");
  try {
    Dataset out;
    out.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    out.target_name = doc.at("target_name").get<std::string>();
    const auto rows = doc.at("x").get<std::vector<std::vector<double>>>();
    out.x = rows.empty() ? Matrix(0, out.feature_names.size())
                         : Matrix::from_rows(rows);
    out.y = doc.at("y").get<std::vector<double>>();
    out.validate();
    return out;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed dataset document: ") + e.what());
  }
}

Json scaler_to_json(const ScalerState& state) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "scaler";
  doc["convention"] = "sample_stddev";
  doc["mean"] = state.mean;
  doc["stddev"] = state.stddev;
  return doc;
}

ScalerState scaler_from_json(const Json& doc) {
  require_document(doc, "scaler");
  try {
    ScalerState s;
    s.mean = doc.at("mean").get<std::vector<double>>();
    s.stddev = doc.at("stddev").get<std::vector<double>>();
    if (s.mean.size() != s.stddev.size()) {
      throw IoError("scaler mean/stddev length mismatch");
    }
    for (const double sd : s.stddev) {
      if (!(sd > 0.0)) throw IoError("scaler stddev must be > 0");
    }
    return s;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed scaler document: ") + e.what());
  }
}

Json split_to_json(const SplitIndices& split) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "split";
  doc["seed"] = split.seed;
  doc["train_rows"] = split.train_rows;
  doc["test_rows"] = split.test_rows;
  return doc;
}

SplitIndices split_from_json(const Json& doc) {
  require_document(doc, "split");
  try {
    SplitIndices s;
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.train_rows = doc.at("train_rows").get<std::vector<std::size_t>>();
    s.test_rows = doc.at("test_rows").get<std::vector<std::size_t>>();
    return s;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed split document: ") + e.what());
  }
}

}  // namespace premium
