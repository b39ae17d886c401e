#include "glassbox/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace glassbox {

namespace {

const std::map<std::string, ColumnRole>& role_names() {
  static const std::map<std::string, ColumnRole> names = {
      {"feature", ColumnRole::feature},
      {"label", ColumnRole::label},
      {"sensitive", ColumnRole::sensitive},
      {"quasi_identifier", ColumnRole::quasi_identifier},
      {"direct_identifier", ColumnRole::direct_identifier},
      {"resolving", ColumnRole::resolving},
  };
  return names;
}

std::string format_numeric(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(ColumnRole role) {
  for (const auto& [name, r] : role_names())
    if (r == role) return name;
  return "?";
}

std::string to_string(ColumnKind kind) {
  return kind == ColumnKind::numeric ? "numeric" : "categorical";
}

std::string to_string(TaskType type) {
  switch (type) {
    case TaskType::regression: return "regression";
    case TaskType::binary_classification: return "binary_classification";
    case TaskType::multiclass_classification: return "multiclass_classification";
    case TaskType::anomaly_detection: return "anomaly_detection";
  }
  return "?";
}

ColumnRole column_role_from_string(const std::string& s) {
  auto it = role_names().find(s);
  if (it == role_names().end()) throw IngestionError("unknown column role: " + s);
  return it->second;
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  throw IngestionError("unknown column kind: " + s);
}

TaskType task_type_from_string(const std::string& s) {
  if (s == "regression") return TaskType::regression;
  if (s == "binary_classification") return TaskType::binary_classification;
  if (s == "multiclass_classification") return TaskType::multiclass_classification;
  if (s == "anomaly_detection") return TaskType::anomaly_detection;
  throw IngestionError("unknown task kind: " + s);
}

void Schema::validate() const {
  std::set<std::string> seen;
  std::size_t labels = 0;
  for (const auto& col : columns) {
    if (!seen.insert(col.name).second)
      throw ArgumentError("duplicate column name in schema: " + col.name);
    if (col.has_role(ColumnRole::label)) ++labels;
    if (col.has_role(ColumnRole::direct_identifier) && col.has_role(ColumnRole::feature))
      throw ArgumentError("direct identifier column cannot be a feature: " + col.name);
  }
  if (labels > 1) throw ArgumentError("schema declares more than one label column");
  if (labels == 1) {
    const auto& label = columns[*label_index()];
    const bool needs_categorical = task.is_classification();
    if (needs_categorical && label.kind != ColumnKind::categorical)
      throw ArgumentError("classification label column must be categorical: " + label.name);
    if (!needs_categorical && label.kind != ColumnKind::numeric)
      throw ArgumentError("regression label column must be numeric: " + label.name);
  }
}

bool Schema::has_column(const std::string& name) const {
  return std::any_of(columns.begin(), columns.end(),
                     [&](const ColumnSpec& c) { return c.name == name; });
}

std::size_t Schema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  throw ArgumentError("unknown column: " + name);
}

std::optional<std::size_t> Schema::label_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].has_role(ColumnRole::label)) return i;
  return std::nullopt;
}

std::vector<std::size_t> Schema::role_indices(ColumnRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].has_role(role)) out.push_back(i);
  return out;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json j;
  j["task"] = {{"kind", to_string(task.type)}, {"classes", task.classes}};
  j["columns"] = nlohmann::json::array();
  for (const auto& col : columns) {
    nlohmann::json roles = nlohmann::json::array();
    for (ColumnRole r : col.roles) roles.push_back(to_string(r));
    j["columns"].push_back(
        {{"name", col.name}, {"kind", to_string(col.kind)}, {"roles", roles}});
  }
  return j;
}

Schema Schema::from_json(const nlohmann::json& j) {
  Schema schema;
  if (!j.contains("task") || !j.contains("columns"))
    throw IngestionError("schema document needs 'task' and 'columns'");
  schema.task.type = task_type_from_string(j["task"].at("kind").get<std::string>());
  schema.task.classes = j["task"].value("classes", 2);
  for (const auto& cj : j["columns"]) {
    ColumnSpec col;
    col.name = cj.at("name").get<std::string>();
    col.kind = column_kind_from_string(cj.at("kind").get<std::string>());
    for (const auto& rj : cj.at("roles")) col.roles.insert(column_role_from_string(rj.get<std::string>()));
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

void Schema::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write schema file: " + path.string());
  out << to_json().dump(2) << "\n";
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read schema file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("invalid schema file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::string Schema::fingerprint() const {
  std::uint64_t h = hash_string(to_json().dump());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

int Column::code_for(const std::string& name) const {
  for (std::size_t i = 0; i < categories.size(); ++i)
    if (categories[i] == name) return static_cast<int>(i);
  return -1;
}

int Column::intern(const std::string& name) {
  int code = code_for(name);
  if (code >= 0) return code;
  categories.push_back(name);
  return static_cast<int>(categories.size() - 1);
}

std::string Column::value_as_text(std::size_t row) const {
  if (spec.kind == ColumnKind::numeric) return format_numeric(numeric[row]);
  return categories.at(static_cast<std::size_t>(codes[row]));
}

Dataset::Dataset(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  schema_.validate();
  if (columns_.size() != schema_.columns.size())
    throw ArgumentError("dataset column count does not match schema");
  for (std::size_t i = 0; i < columns_.size(); ++i) columns_[i].spec = schema_.columns[i];
  n_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].size() != n_rows_)
      throw ArgumentError("ragged dataset: column " + schema_.columns[i].name);
}

const Column& Dataset::column(const std::string& name) const {
  return columns_.at(schema_.column_index(name));
}

std::size_t Dataset::encoded_feature_count() const {
  std::size_t m = 0;
  for (std::size_t i : schema_.feature_indices()) {
    const Column& col = columns_[i];
    m += col.spec.kind == ColumnKind::numeric ? 1 : std::max<std::size_t>(col.categories.size(), 1);
  }
  return m;
}

std::vector<std::string> Dataset::encoded_feature_names() const {
  std::vector<std::string> names;
  for (std::size_t i : schema_.feature_indices()) {
    const Column& col = columns_[i];
    if (col.spec.kind == ColumnKind::numeric) {
      names.push_back(col.spec.name);
    } else {
      for (const auto& cat : col.categories) names.push_back(col.spec.name + "=" + cat);
    }
  }
  return names;
}

Matrix Dataset::feature_matrix() const {
  const auto features = schema_.feature_indices();
  for (std::size_t i : features)
    if (columns_[i].spec.kind != ColumnKind::numeric)
      throw ArgumentError("categorical feature column '" + columns_[i].spec.name +
                          "' must be one-hot encoded before building a feature matrix");
  Matrix x(n_rows_, features.size());
  for (std::size_t c = 0; c < features.size(); ++c) {
    const auto& vals = columns_[features[c]].numeric;
    for (std::size_t r = 0; r < n_rows_; ++r) x(r, c) = vals[r];
  }
  return x;
}

std::vector<int> Dataset::label_codes() const {
  auto idx = schema_.label_index();
  if (!idx) throw ArgumentError("dataset has no label column");
  if (!schema_.task.is_classification())
    throw ArgumentError("label codes are only defined for classification tasks");
  return columns_[*idx].codes;
}

const std::vector<std::string>& Dataset::label_names() const {
  auto idx = schema_.label_index();
  if (!idx) throw ArgumentError("dataset has no label column");
  return columns_[*idx].categories;
}

std::vector<double> Dataset::numeric_labels() const {
  auto idx = schema_.label_index();
  if (!idx) throw ArgumentError("dataset has no label column");
  if (schema_.task.is_classification())
    throw ArgumentError("numeric labels are only defined for regression tasks");
  return columns_[*idx].numeric;
}

Dataset Dataset::take_rows(const std::vector<std::size_t>& indices) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const Column& col : columns_) {
    Column out;
    out.spec = col.spec;
    out.categories = col.categories;
    if (col.spec.kind == ColumnKind::numeric) {
      out.numeric.reserve(indices.size());
      for (std::size_t i : indices) out.numeric.push_back(col.numeric.at(i));
    } else {
      out.codes.reserve(indices.size());
      for (std::size_t i : indices) out.codes.push_back(col.codes.at(i));
    }
    cols.push_back(std::move(out));
  }
  return Dataset(schema_, std::move(cols));
}

Dataset Dataset::with_label_codes(const std::vector<int>& new_codes) const {
  auto idx = schema_.label_index();
  if (!idx) throw ArgumentError("dataset has no label column");
  if (new_codes.size() != n_rows_) throw ArgumentError("label vector size mismatch");
  std::vector<Column> cols = columns_;
  for (int code : new_codes)
    if (code < 0 || static_cast<std::size_t>(code) >= cols[*idx].categories.size())
      throw ArgumentError("label code out of range");
  cols[*idx].codes = new_codes;
  return Dataset(schema_, std::move(cols));
}

namespace {

// RFC-4180 style row reader; returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      // swallow; \r\n handled by the following \n
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(field);
  return true;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

double parse_numeric_cell(const std::string& cell, std::size_t row, const std::string& column) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw IngestionError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse numeric value '" + cell + "'");
  }
  while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\t')) ++pos;
  if (pos != cell.size())
    throw IngestionError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse numeric value '" + cell + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  schema.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open CSV file: " + path.string());

  std::vector<std::string> header;
  if (!read_csv_record(in, header))
    throw IngestionError("empty CSV file (missing header): " + path.string());

  // Order-insensitive header match: every header cell must name a schema
  // column exactly once, and every schema column must appear.
  std::vector<std::size_t> schema_of_field(header.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!seen.insert(header[i]).second)
      throw IngestionError("duplicate header column: " + header[i]);
    if (!schema.has_column(header[i]))
      throw IngestionError("unknown column in header: " + header[i]);
    schema_of_field[i] = schema.column_index(header[i]);
  }
  if (header.size() != schema.columns.size())
    throw IngestionError("header has " + std::to_string(header.size()) + " columns, schema has " +
                         std::to_string(schema.columns.size()));

  std::vector<Column> cols(schema.columns.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i].spec = schema.columns[i];

  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    ++row;
    if (fields.size() != header.size())
      throw IngestionError("row " + std::to_string(row) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    for (std::size_t f = 0; f < fields.size(); ++f) {
      Column& col = cols[schema_of_field[f]];
      const std::string& cell = fields[f];
      if (cell.empty())
        throw IngestionError("row " + std::to_string(row) + ", column '" + col.spec.name +
                             "': missing value");
      if (col.spec.kind == ColumnKind::numeric) {
        col.numeric.push_back(parse_numeric_cell(cell, row, col.spec.name));
      } else {
        col.codes.push_back(col.intern(cell));
      }
    }
  }
  return Dataset(schema, std::move(cols));
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write CSV file: " + path.string());
  const auto& cols = dataset.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(cols[i].spec.name);
  }
  out << '\n';
  for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(cols[i].value_as_text(r));
    }
    out << '\n';
  }
}

Dataset generate_covid_toy(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("generate_covid_toy requires n >= 2");

  Schema schema;
  schema.task = {TaskType::binary_classification, 2};
  schema.columns = {
      {"LungCapacity", ColumnKind::numeric, {ColumnRole::feature}},
      {"COLevel", ColumnKind::numeric, {ColumnRole::feature}},
      {"Covid", ColumnKind::categorical, {ColumnRole::label}},
  };

  constexpr double kNoCovidLung = 4.7, kNoCovidCo = 3.0;
  constexpr double kCovidLung = 3.1, kCovidCo = 5.5;
  constexpr double kSd = 0.6;

  auto rng_no = seeded_rng(seed, 0);
  auto rng_yes = seeded_rng(seed, 1);
  std::normal_distribution<double> gauss(0.0, kSd);

  Column lung, co, label;
  label.intern("NoCovid");
  label.intern("Covid");
  for (std::size_t i = 0; i < n; ++i) {
    const bool covid = (i % 2) == 1;  // NoCovid first so its label id is 0
    auto& rng = covid ? rng_yes : rng_no;
    lung.numeric.push_back((covid ? kCovidLung : kNoCovidLung) + gauss(rng));
    co.numeric.push_back((covid ? kCovidCo : kNoCovidCo) + gauss(rng));
    label.codes.push_back(covid ? 1 : 0);
  }
  return Dataset(schema, {std::move(lung), std::move(co), std::move(label)});
}

Dataset one_hot_encode(const Dataset& dataset) {
  Schema schema;
  schema.task = dataset.schema().task;
  std::vector<Column> cols;
  for (const Column& col : dataset.columns()) {
    const bool encode = col.spec.kind == ColumnKind::categorical &&
                        col.spec.has_role(ColumnRole::feature);
    if (!encode) {
      schema.columns.push_back(col.spec);
      cols.push_back(col);
      continue;
    }
    for (std::size_t c = 0; c < col.categories.size(); ++c) {
      ColumnSpec spec;
      spec.name = col.spec.name + "=" + col.categories[c];
      spec.kind = ColumnKind::numeric;
      spec.roles = col.spec.roles;
      Column derived;
      derived.spec = spec;
      derived.numeric.resize(col.codes.size());
      for (std::size_t r = 0; r < col.codes.size(); ++r)
        derived.numeric[r] = col.codes[r] == static_cast<int>(c) ? 1.0 : 0.0;
      schema.columns.push_back(spec);
      cols.push_back(std::move(derived));
    }
  }
  return Dataset(std::move(schema), std::move(cols));
}

bool ScalerParams::any_constant() const {
  return std::any_of(columns.begin(), columns.end(),
                     [](const ColumnScaler& c) { return !c.scaled; });
}

const ColumnScaler* ScalerParams::find(const std::string& column) const {
  for (const auto& c : columns)
    if (c.column == column) return &c;
  return nullptr;
}

std::pair<Dataset, ScalerParams> standardize(const Dataset& dataset) {
  ScalerParams params;
  std::vector<Column> cols = dataset.columns();
  const std::size_t n = dataset.n_rows();
  for (Column& col : cols) {
    if (col.spec.kind != ColumnKind::numeric || !col.spec.has_role(ColumnRole::feature)) continue;
    ColumnScaler scaler;
    scaler.column = col.spec.name;
    double mean = 0.0;
    for (double v : col.numeric) mean += v;
    mean /= n == 0 ? 1.0 : static_cast<double>(n);
    double var = 0.0;
    for (double v : col.numeric) var += (v - mean) * (v - mean);
    var /= n == 0 ? 1.0 : static_cast<double>(n);  // population convention
    scaler.mean = mean;
    scaler.sd = std::sqrt(var);
    scaler.scaled = scaler.sd > 0.0;
    if (scaler.scaled)
      for (double& v : col.numeric) v = (v - mean) / scaler.sd;
    params.columns.push_back(scaler);
  }
  return {Dataset(dataset.schema(), std::move(cols)), std::move(params)};
}

Dataset unstandardize(const Dataset& dataset, const ScalerParams& params) {
  std::vector<Column> cols = dataset.columns();
  for (Column& col : cols) {
    const ColumnScaler* scaler = params.find(col.spec.name);
    if (!scaler || !scaler->scaled) continue;
    for (double& v : col.numeric) v = v * scaler->sd + scaler->mean;
  }
  return Dataset(dataset.schema(), std::move(cols));
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  if (dataset.n_rows() < 2) throw ArgumentError("split requires at least 2 rows");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw ArgumentError("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(dataset.n_rows());
  std::iota(order.begin(), order.end(), 0);
  auto rng = seeded_rng(seed, 0x5eed5eedULL);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(dataset.n_rows());
  auto train_size = static_cast<std::size_t>(std::llround(train_fraction * n));
  train_size = std::clamp<std::size_t>(train_size, 1, dataset.n_rows() - 1);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
  return {dataset.take_rows(train_idx), dataset.take_rows(test_idx)};
}

}  // namespace glassbox
