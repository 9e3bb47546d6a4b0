#include "sfgof/io.hpp"

#include <Eigen/QR>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_map>

#include "sfgof/error.hpp"

namespace sfgof::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no, fields.size() + 1);
  fields.emplace_back(trim(field));
  return fields;
}

double parse_number(const std::string& cell, std::size_t line_no, std::size_t data_row, std::size_t column,
                    const std::string& name) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    const std::string what = cell.empty() ? "missing value" : "non-numeric value '" + cell + "'";
    throw ParseError("row " + std::to_string(data_row) + ": " + what + " in column '" + name + "'", line_no,
                     column);
  }
  return value;
}

}  // namespace

ColumnRole parse_role(std::string_view name) {
  if (name == "response" || name == "y") return ColumnRole::response;
  if (name == "regressor" || name == "x") return ColumnRole::regressor;
  if (name == "id") return ColumnRole::id;
  throw ConfigError("unknown column role '" + std::string(name) + "' (expected response, regressor or id)");
}

std::string_view to_string(ColumnRole role) noexcept {
  switch (role) {
    case ColumnRole::response:
      return "response";
    case ColumnRole::regressor:
      return "regressor";
    case ColumnRole::id:
      return "id";
  }
  return "regressor";
}

ColumnMap ColumnMap::parse(const std::vector<std::string>& specs) {
  ColumnMap map;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("column mapping '" + spec + "' is not name=role");
    map.entries.emplace_back(std::string(trim(spec.substr(0, eq))), parse_role(trim(spec.substr(eq + 1))));
  }
  map.validate();
  return map;
}

void ColumnMap::validate() const {
  std::size_t responses = 0;
  std::size_t ids = 0;
  std::set<std::string> seen;
  for (const auto& [name, role] : entries) {
    if (!seen.insert(name).second) throw ConfigError("column '" + name + "' is mapped twice");
    responses += role == ColumnRole::response;
    ids += role == ColumnRole::id;
  }
  if (responses != 1) throw ConfigError("exactly one response column is required");
  if (ids > 1) throw ConfigError("at most one id column is allowed");
}

Dataset read_csv(std::istream& in, const ColumnMap& columns, const IngestOptions& options) {
  columns.validate();
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_record(line, line_no);
      break;
    }
  }
  if (header.empty()) throw ParseError("empty file: no header row", line_no == 0 ? 1 : line_no, 1);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
  std::size_t response_col = 0;
  std::optional<std::size_t> id_col;
  std::vector<std::size_t> regressor_cols;
  Dataset out;
  if (options.add_intercept) out.regressors.emplace_back("(intercept)");
  for (const auto& [name, role] : columns.entries) {
    const auto it = index.find(name);
    if (it == index.end()) throw ParseError("column '" + name + "' not found in header", line_no, 1);
    if (role == ColumnRole::response) response_col = it->second;
    if (role == ColumnRole::id) id_col = it->second;
    if (role == ColumnRole::regressor) {
      regressor_cols.push_back(it->second);
      out.regressors.push_back(name);
    }
  }

  std::vector<double> y;
  std::vector<std::vector<double>> x;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++data_row;
    const auto fields = split_record(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(data_row) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       line_no, std::min(fields.size(), header.size()) + 1);
    }
    y.push_back(parse_number(fields[response_col], line_no, data_row, response_col + 1, header[response_col]));
    std::vector<double> row;
    row.reserve(regressor_cols.size());
    for (auto col : regressor_cols) row.push_back(parse_number(fields[col], line_no, data_row, col + 1, header[col]));
    x.push_back(std::move(row));
    out.ids.push_back(id_col ? fields[*id_col] : std::to_string(data_row));
  }
  if (y.empty()) throw ParseError("no data rows after the header", line_no, 1);

  const auto n = static_cast<Eigen::Index>(y.size());
  const auto offset = static_cast<Eigen::Index>(options.add_intercept ? 1 : 0);
  const auto k = static_cast<Eigen::Index>(regressor_cols.size()) + offset;
  if (k == 0) throw ConfigError("the design has no columns");
  const double sign = options.cost ? -1.0 : 1.0;
  out.sample.x.resize(n, k);
  out.sample.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out.sample.y(i) = sign * y[r];
    if (options.add_intercept) out.sample.x(i, 0) = sign;
    for (Eigen::Index j = offset; j < k; ++j) out.sample.x(i, j) = sign * x[r][static_cast<std::size_t>(j - offset)];
  }
  if (n > k) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(out.sample.x);
    if (qr.rank() < k) {
      out.warnings.push_back("design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(k) +
                             " columns");
    }
  } else {
    out.warnings.push_back("fewer observations than design columns");
  }
  return out;
}

Dataset ingest_csv(const std::filesystem::path& path, const ColumnMap& columns, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_csv(in, columns, options);
}

}  // namespace sfgof::io
