#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "glassbox/common.hpp"
#include "json.hpp"

namespace glassbox {

enum class ColumnRole {
  feature,
  label,
  sensitive,
  quasi_identifier,
  direct_identifier,
  resolving,
};

enum class ColumnKind { numeric, categorical };

enum class TaskType {
  regression,
  binary_classification,
  multiclass_classification,
  anomaly_detection,
};

struct TaskKind {
  TaskType type = TaskType::binary_classification;
  // Distinct labels for multiclass; 2 otherwise. For anomaly detection the
  // positive class (label id 1) is the anomaly class.
  int classes = 2;

  bool is_classification() const { return type != TaskType::regression; }
};

std::string to_string(ColumnRole role);
std::string to_string(ColumnKind kind);
std::string to_string(TaskType type);
ColumnRole column_role_from_string(const std::string& s);
ColumnKind column_kind_from_string(const std::string& s);
TaskType task_type_from_string(const std::string& s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::set<ColumnRole> roles;

  bool has_role(ColumnRole role) const { return roles.count(role) > 0; }
};

class Schema {
 public:
  std::vector<ColumnSpec> columns;
  TaskKind task;

  // Throws ArgumentError on duplicate names, a feature-role direct
  // identifier, more than one label column, or a label kind that does not
  // match the task.
  void validate() const;

  bool has_column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
  std::optional<std::size_t> label_index() const;
  std::vector<std::size_t> role_indices(ColumnRole role) const;
  std::vector<std::size_t> feature_indices() const { return role_indices(ColumnRole::feature); }

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Schema load(const std::filesystem::path& path);

  // Stable digest over names/kinds/roles/task; stored in model files so a
  // model refuses data with a different layout.
  std::string fingerprint() const;
};

// One column of data. Numeric columns hold doubles; categorical columns
// hold integer codes assigned in first-appearance order plus the code ->
// name table.
struct Column {
  ColumnSpec spec;
  std::vector<double> numeric;
  std::vector<int> codes;
  std::vector<std::string> categories;

  std::size_t size() const {
    return spec.kind == ColumnKind::numeric ? numeric.size() : codes.size();
  }
  int code_for(const std::string& name) const;
  int intern(const std::string& name);
  std::string value_as_text(std::size_t row) const;
};

// Immutable after construction; shared read-only across threads.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<Column> columns);

  std::size_t n_rows() const { return n_rows_; }
  const Schema& schema() const { return schema_; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(const std::string& name) const;

  // Feature count after one-hot encoding (categorical feature with v
  // categories counts v).
  std::size_t encoded_feature_count() const;

  // Names of the encoded feature columns, in schema order.
  std::vector<std::string> encoded_feature_names() const;

  // Requires every feature column to be numeric (run one_hot_encode
  // first); throws ArgumentError otherwise.
  Matrix feature_matrix() const;

  // Classification label codes; throws for regression tasks.
  std::vector<int> label_codes() const;
  const std::vector<std::string>& label_names() const;
  // Regression targets; throws for classification tasks.
  std::vector<double> numeric_labels() const;

  Dataset take_rows(const std::vector<std::size_t>& indices) const;
  // Same rows, relabeled: classification label code of row i replaced by
  // new_codes[i]. Used to inject label noise in audits.
  Dataset with_label_codes(const std::vector<int>& new_codes) const;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

// CSV: UTF-8, comma separated, first row header, quoted fields with
// doubled-quote escaping. Header must contain exactly the schema's columns
// (order-insensitive). Missing values are ingestion errors.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

// Two Gaussian blobs over (LungCapacity, COLevel): NoCovid at (4.7, 3.0),
// Covid at (3.1, 5.5), sd 0.6 per axis, classes alternating so counts are
// 50/50 (NoCovid gets the extra row when n is odd).
Dataset generate_covid_toy(std::size_t n, std::uint64_t seed);

// Each categorical feature column with v categories becomes v binary
// numeric columns named "col=value"; derived columns inherit the roles.
Dataset one_hot_encode(const Dataset& dataset);

struct ColumnScaler {
  std::string column;
  double mean = 0.0;
  double sd = 1.0;       // population convention (divide by n)
  bool scaled = true;    // false when the column was constant
};

struct ScalerParams {
  std::vector<ColumnScaler> columns;
  bool any_constant() const;
  const ColumnScaler* find(const std::string& column) const;
};

// Scales every numeric feature column to mean 0 / population sd 1.
// Constant columns pass through with scaled=false.
std::pair<Dataset, ScalerParams> standardize(const Dataset& dataset);
Dataset unstandardize(const Dataset& dataset, const ScalerParams& params);

// Deterministic shuffled partition; train size = round(fraction * n).
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

}  // namespace glassbox
