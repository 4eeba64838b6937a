#pragma once

#include <string>
#include <vector>

namespace diffcone {

// precision < 0: six significant digits; otherwise fixed decimals.
std::string format_number(double value, int precision = -1);

// Rows of preformatted cells, rendered as TSV or as an aligned text table.
class Table {
 public:
  explicit Table(std::vector<std::string> headers) : headers_(std::move(headers)) {}

  void add_row(std::vector<std::string> cells);
  std::size_t row_count() const { return rows_.size(); }

  std::string tsv() const;
  // First column left-aligned, the rest right-aligned.
  std::string aligned() const;

 private:
  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace diffcone
