#include "gpi/dataset_csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "gpi/errors.hpp"

namespace gpi {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && !cell.empty();
}

}  // namespace

CsvTable read_csv_table(std::istream& in) {
  std::string line;
  // UTF-8 BOM is tolerated on the header line.
  if (!std::getline(in, line)) throw Error(ErrorKind::DataError, "empty CSV input");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);

  CsvTable table;
  const auto head = split(line);
  bool all_numeric = true;
  for (auto cell : head) {
    double dummy = 0.0;
    all_numeric = all_numeric && parse_double(cell, dummy);
    table.header.emplace_back(cell);
  }
  if (all_numeric) throw Error(ErrorKind::DataError, "CSV header row is required (first row is numeric)");
  const std::size_t cols = head.size();

  std::vector<double> flat;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols) {
      throw Error(ErrorKind::DataError, "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                                            " columns, found " + std::to_string(cells.size()));
    }
    for (auto cell : cells) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw Error(ErrorKind::DataError, "line " + std::to_string(line_no) + ": cannot parse '" + std::string(cell) + "'");
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::DataError, "CSV has a header but no data rows");

  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * cols + c];
    }
  }
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::DataError, "cannot open " + path.string());
  return read_csv_table(in);
}

Dataset dataset_from_table(const CsvTable& table, bool intercept) {
  const Eigen::Index cols = table.values.cols();
  if (cols < 2) throw Error(ErrorKind::DataError, "dataset CSV needs at least one x column and a y column");
  Dataset data(table.values.leftCols(cols - 1), table.values.col(cols - 1));
  return intercept ? data.with_intercept() : data;
}

Dataset read_dataset_csv(const std::filesystem::path& path, bool intercept) {
  return dataset_from_table(read_csv_table(path), intercept);
}

Eigen::MatrixXd read_design_csv(const std::filesystem::path& path) {
  auto table = read_csv_table(path);
  validate_design(table.values);
  return std::move(table.values);
}

}  // namespace gpi
