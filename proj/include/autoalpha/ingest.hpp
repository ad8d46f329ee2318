#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "autoalpha/bandit_core.hpp"
#include "autoalpha/environments.hpp"

namespace autoalpha::ingest {

enum class ColumnKind { continuous, categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind;
};

// Attribute columns in file order, followed by one label column.
struct Schema {
  std::vector<ColumnSpec> columns;
  std::string label_name;
  std::string positive_label;  // compared after stripping a trailing '.'
  std::string missing_marker = "?";

  std::size_t field_count() const noexcept { return columns.size() + 1; }
};

// The 14-attribute Adult census schema; label 1 means income ">50K".
const Schema& adult_schema();

struct RawRecord {
  std::vector<std::string> fields;  // attribute values, trimmed
  std::string label;                // trimmed, trailing '.' kept as read
  std::size_t line = 0;
};

// Comma-separated records, whitespace around fields ignored. Blank lines and
// lines starting with '|' (comment lines in the published test split) are
// skipped. Throws ParseError naming the line on a wrong field count.
std::vector<RawRecord> parse_adult(std::istream& in, const Schema& schema = adult_schema());
std::vector<RawRecord> parse_adult_file(const std::string& path, const Schema& schema = adult_schema());

struct ContinuousEncoding {
  double mean = 0.0;
  double sd = 1.0;  // population formula; 1 when the column is constant
  double impute = 0.0;  // median of observed values
};

struct CategoricalEncoding {
  std::vector<std::string> levels;  // sorted; one-hot block order
  std::string impute;               // mode of observed values
};

struct EncoderSpec {
  Schema schema;
  // Indexed by schema column; only the member matching the kind is used.
  std::vector<ContinuousEncoding> continuous;
  std::vector<CategoricalEncoding> categorical;

  std::size_t dimension() const;
  // "age", "workclass=Private", ... in encoded order.
  std::vector<std::string> encoded_names() const;
};

// Levels, means, sds and imputation values from `records` only.
EncoderSpec fit_encoder(const std::vector<RawRecord>& records, const Schema& schema = adult_schema());

// Continuous -> (v - mean) / sd; categorical -> one-hot (unseen level gives
// an all-zero block); missing values imputed first. Throws EncodeError on an
// unparsable number.
std::pair<Context, int> encode(const EncoderSpec& spec, const RawRecord& record);

int encode_label(const Schema& schema, const std::string& label);

struct EncodedDataset {
  std::vector<std::string> column_names;
  LabeledRows rows;

  std::size_t dimension() const noexcept { return column_names.size(); }
};

EncodedDataset encode_all(const EncoderSpec& spec, const std::vector<RawRecord>& records);

// Columnar text cache: a header "label:label,<name>:<kind>,..." then one
// line per row with the label followed by the encoded values.
void write_cache(std::ostream& out, const EncoderSpec& spec, const EncodedDataset& data);
EncodedDataset read_cache(std::istream& in);

}  // namespace autoalpha::ingest
