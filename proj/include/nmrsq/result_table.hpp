#pragma once

// Tabular results and the fixed text formats they are written in.

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace nmrsq {

/// Empty cell, number, or text.
using Cell = std::variant<std::monostate, double, std::string>;

/// Shortest decimal that parses back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_double(double v);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Written as leading "# key: value" lines.
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Throws Validation if the row width differs from the header.
  void add_row(std::vector<Cell> row);
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
};

/// Compact dump with sorted keys; the digest input.
std::string canonical_json(const nlohmann::json& j);

std::string sha256_hex(std::string_view bytes);

/// Writes text to path atomically enough for our purposes (temp file + rename).
void write_text_file(const std::string& path, std::string_view text);

}  // namespace nmrsq
