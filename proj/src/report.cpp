#include "diffcone/report.hpp"

#include <algorithm>
#include <cstdio>

#include "diffcone/error.hpp"

namespace diffcone {

std::string format_number(double value, int precision) {
  char buffer[64];
  if (precision < 0) {
    std::snprintf(buffer, sizeof buffer, "%.6g", value);
  } else {
    std::snprintf(buffer, sizeof buffer, "%.*f", precision, value);
  }
  std::string text(buffer);
  // Avoid "-0" / "-0.0000" for values that round to zero.
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != headers_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "table row has " + std::to_string(cells.size()) + " cells, expected " +
                                                 std::to_string(headers_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string Table::tsv() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += '\t';
      out += cells[c];
    }
    out += '\n';
  };
  emit(headers_);
  for (const auto& row : rows_) emit(row);
  return out;
}

std::string Table::aligned() const {
  std::vector<std::size_t> widths(headers_.size());
  for (std::size_t c = 0; c < headers_.size(); ++c) widths[c] = headers_[c].size();
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(widths[c] - cells[c].size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? cells[c] + pad : pad + cells[c];
    }
    line.erase(line.find_last_not_of(' ') + 1);
    out += line + '\n';
  };
  emit(headers_);
  std::size_t total = 0;
  for (auto w : widths) total += w;
  out += std::string(total + 2 * (widths.size() - 1), '-') + '\n';
  for (const auto& row : rows_) emit(row);
  return out;
}

}  // namespace diffcone
