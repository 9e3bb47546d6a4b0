#pragma once

// CSV ingestion into a regression sample.

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfgof/model.hpp"

namespace sfgof::io {

enum class ColumnRole { response, regressor, id };

ColumnRole parse_role(std::string_view name);
std::string_view to_string(ColumnRole role) noexcept;

/// Ordered column-to-role assignments; regressors keep their listed order.
struct ColumnMap {
  std::vector<std::pair<std::string, ColumnRole>> entries;

  /// Parses "name=role" specifications.
  static ColumnMap parse(const std::vector<std::string>& specs);
  void validate() const;
};

struct IngestOptions {
  /// Cost frontier: Y and X are negated so the production form applies.
  bool cost = false;
  bool add_intercept = true;
};

struct Dataset {
  Sample sample;
  std::vector<std::string> ids;
  /// Names of the design columns, "(intercept)" first when prepended.
  std::vector<std::string> regressors;
  std::vector<std::string> warnings;
};

Dataset read_csv(std::istream& in, const ColumnMap& columns, const IngestOptions& options = {});
Dataset ingest_csv(const std::filesystem::path& path, const ColumnMap& columns, const IngestOptions& options = {});

}  // namespace sfgof::io
