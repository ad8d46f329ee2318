#include "autoalpha/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "autoalpha/errors.hpp"

namespace autoalpha::ingest {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string strip_period(std::string s) {
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const Schema& adult_schema() {
  static const Schema schema{
      {
          {"age", ColumnKind::continuous},
          {"workclass", ColumnKind::categorical},
          {"fnlwgt", ColumnKind::continuous},
          {"education", ColumnKind::categorical},
          {"education-num", ColumnKind::continuous},
          {"marital-status", ColumnKind::categorical},
          {"occupation", ColumnKind::categorical},
          {"relationship", ColumnKind::categorical},
          {"race", ColumnKind::categorical},
          {"sex", ColumnKind::categorical},
          {"capital-gain", ColumnKind::continuous},
          {"capital-loss", ColumnKind::continuous},
          {"hours-per-week", ColumnKind::continuous},
          {"native-country", ColumnKind::categorical},
      },
      "income",
      ">50K",
      "?",
  };
  return schema;
}

std::vector<RawRecord> parse_adult(std::istream& in, const Schema& schema) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '|') continue;
    auto fields = split_commas(t);
    if (fields.size() != schema.field_count()) {
      throw ParseError(line_no, "expected " + std::to_string(schema.field_count()) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    RawRecord rec;
    rec.label = std::move(fields.back());
    fields.pop_back();
    rec.fields = std::move(fields);
    rec.line = line_no;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> parse_adult_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  try {
    return parse_adult(in, schema);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

int encode_label(const Schema& schema, const std::string& label) {
  return strip_period(trim(label)) == schema.positive_label ? 1 : 0;
}

std::size_t EncoderSpec::dimension() const {
  std::size_t d = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    d += schema.columns[c].kind == ColumnKind::continuous ? 1 : categorical[c].levels.size();
  }
  return d;
}

std::vector<std::string> EncoderSpec::encoded_names() const {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& col = schema.columns[c];
    if (col.kind == ColumnKind::continuous) {
      names.push_back(col.name);
    } else {
      for (const auto& level : categorical[c].levels) names.push_back(col.name + "=" + level);
    }
  }
  return names;
}

EncoderSpec fit_encoder(const std::vector<RawRecord>& records, const Schema& schema) {
  if (records.empty()) throw std::invalid_argument("fit_encoder: no records");
  EncoderSpec spec;
  spec.schema = schema;
  const std::size_t ncols = schema.columns.size();
  spec.continuous.resize(ncols);
  spec.categorical.resize(ncols);

  for (std::size_t c = 0; c < ncols; ++c) {
    if (schema.columns[c].kind == ColumnKind::continuous) {
      std::vector<double> observed;
      std::size_t missing = 0;
      for (const auto& rec : records) {
        const std::string& f = rec.fields.at(c);
        if (f == schema.missing_marker) {
          ++missing;
          continue;
        }
        double v = 0.0;
        if (!parse_double(f, v)) {
          throw EncodeError("line " + std::to_string(rec.line) + ": column '" + schema.columns[c].name +
                            "' value '" + f + "' is not numeric");
        }
        observed.push_back(v);
      }
      ContinuousEncoding enc;
      if (!observed.empty()) {
        std::vector<double> sorted = observed;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        enc.impute = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
      }
      // Moments over imputed values so the encoded column is exactly standardized.
      const double total = static_cast<double>(observed.size() + missing);
      double sum = enc.impute * static_cast<double>(missing);
      for (double v : observed) sum += v;
      enc.mean = sum / total;
      double ss = static_cast<double>(missing) * (enc.impute - enc.mean) * (enc.impute - enc.mean);
      for (double v : observed) ss += (v - enc.mean) * (v - enc.mean);
      const double sd = std::sqrt(ss / total);
      enc.sd = sd > 0.0 ? sd : 1.0;
      spec.continuous[c] = enc;
    } else {
      std::map<std::string, std::size_t> counts;
      for (const auto& rec : records) {
        const std::string& f = rec.fields.at(c);
        if (f != schema.missing_marker) ++counts[f];
      }
      CategoricalEncoding enc;
      if (counts.empty()) {
        enc.levels = {"missing"};
        enc.impute = "missing";
      } else {
        std::size_t best = 0;
        for (const auto& [level, n] : counts) {
          enc.levels.push_back(level);
          if (n > best) {
            best = n;
            enc.impute = level;
          }
        }
      }
      spec.categorical[c] = std::move(enc);
    }
  }
  return spec;
}

std::pair<Context, int> encode(const EncoderSpec& spec, const RawRecord& record) {
  const auto& schema = spec.schema;
  if (record.fields.size() != schema.columns.size()) {
    throw EncodeError("line " + std::to_string(record.line) + ": record does not match schema");
  }
  Context x = Context::Zero(static_cast<Eigen::Index>(spec.dimension()));
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const std::string& f = record.fields[c];
    const bool missing = f == schema.missing_marker;
    if (schema.columns[c].kind == ColumnKind::continuous) {
      const auto& enc = spec.continuous[c];
      double v = enc.impute;
      if (!missing && !parse_double(f, v)) {
        throw EncodeError("line " + std::to_string(record.line) + ": column '" + schema.columns[c].name +
                          "' value '" + f + "' is not numeric");
      }
      x[at++] = (v - enc.mean) / enc.sd;
    } else {
      const auto& enc = spec.categorical[c];
      const std::string& level = missing ? enc.impute : f;
      const auto it = std::lower_bound(enc.levels.begin(), enc.levels.end(), level);
      if (it != enc.levels.end() && *it == level) x[at + (it - enc.levels.begin())] = 1.0;
      at += static_cast<Eigen::Index>(enc.levels.size());
    }
  }
  return {std::move(x), encode_label(schema, record.label)};
}

EncodedDataset encode_all(const EncoderSpec& spec, const std::vector<RawRecord>& records) {
  EncodedDataset out;
  out.column_names = spec.encoded_names();
  out.rows.reserve(records.size());
  for (const auto& rec : records) {
    auto [x, label] = encode(spec, rec);
    out.rows.push_back(LabeledRow{std::move(x), label});
  }
  return out;
}

void write_cache(std::ostream& out, const EncoderSpec& spec, const EncodedDataset& data) {
  out << "label:label";
  std::size_t name = 0;
  for (std::size_t c = 0; c < spec.schema.columns.size(); ++c) {
    const bool cont = spec.schema.columns[c].kind == ColumnKind::continuous;
    const std::size_t width = cont ? 1 : spec.categorical[c].levels.size();
    for (std::size_t k = 0; k < width; ++k) {
      out << ',' << data.column_names.at(name++) << ':' << (cont ? "continuous" : "onehot");
    }
  }
  out << '\n';
  for (const auto& row : data.rows) {
    out << row.label;
    for (Eigen::Index i = 0; i < row.context.size(); ++i) out << ',' << format_double(row.context[i]);
    out << '\n';
  }
}

EncodedDataset read_cache(std::istream& in) {
  EncodedDataset data;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing cache header");
  const auto header = split_commas(line);
  if (header.empty() || header.front() != "label:label") throw ParseError(1, "cache header must start with label:label");
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto colon = header[i].rfind(':');
    if (colon == std::string::npos) throw ParseError(1, "column '" + header[i] + "' lacks a kind");
    const std::string kind = header[i].substr(colon + 1);
    if (kind != "continuous" && kind != "onehot") throw ParseError(1, "unknown column kind '" + kind + "'");
    data.column_names.push_back(header[i].substr(0, colon));
  }
  const auto d = static_cast<Eigen::Index>(data.column_names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != static_cast<std::size_t>(d) + 1) {
      throw ParseError(line_no, "expected " + std::to_string(d + 1) + " fields, got " + std::to_string(fields.size()));
    }
    LabeledRow row;
    if (fields[0] != "0" && fields[0] != "1") throw ParseError(line_no, "label must be 0 or 1");
    row.label = fields[0] == "1" ? 1 : 0;
    row.context.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!parse_double(fields[static_cast<std::size_t>(i) + 1], row.context[i])) {
        throw ParseError(line_no, "field " + std::to_string(i + 1) + " is not numeric");
      }
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace autoalpha::ingest
