#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spearlab::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, -1 when absent.
  int column(std::string_view name) const;
};

/// RFC 4180-style parsing: quoted fields, embedded commas/newlines, "" escapes.
Table parse(std::string_view text, bool has_header = true);

std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

}  // namespace spearlab::csv
