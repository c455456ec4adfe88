#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>

#include "gpi/model_core.hpp"

namespace gpi {

/// Numeric CSV table: one header row, then rows of '.'-decimal numbers.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// Throws DataError on a missing header, ragged rows or unparsable cells.
[[nodiscard]] CsvTable read_csv_table(std::istream& in);
[[nodiscard]] CsvTable read_csv_table(const std::filesystem::path& path);

/// Columns x1..xp then y. With intercept, a ones column is prepended to X.
[[nodiscard]] Dataset read_dataset_csv(const std::filesystem::path& path, bool intercept);
[[nodiscard]] Dataset dataset_from_table(const CsvTable& table, bool intercept);

/// Design-only CSV (columns x1..xp), used by file-backed simulation designs.
[[nodiscard]] Eigen::MatrixXd read_design_csv(const std::filesystem::path& path);

}  // namespace gpi
