#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpi/intervals.hpp"
#include "gpi/model_core.hpp"
#include "gpi/simulation.hpp"

namespace gpi {

using json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Pretty JSON with sorted keys and a trailing newline. Emitted reports
/// re-serialise to identical bytes after a parse.
[[nodiscard]] std::string dump_canonical(const json& j);

[[nodiscard]] json to_json(const PredictionInterval& pi);
[[nodiscard]] json to_json(const FittedModel& model);
[[nodiscard]] json to_json(const ErrorDistribution& dist);
[[nodiscard]] json to_json(const SimConfig& cfg);
[[nodiscard]] json to_json(const SimulationReport& report);

[[nodiscard]] ErrorDistribution error_distribution_from_json(const json& j);

/// Parses a simulation config document. Relative design paths resolve against
/// base_dir. Throws InvalidConfig on any schema violation, including unknown
/// keys.
[[nodiscard]] SimConfig sim_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] SimConfig read_sim_config(const std::filesystem::path& path);

/// Flat (method, metric, value) rows.
[[nodiscard]] std::string report_csv(const SimulationReport& report);
/// (bin_low, bin_high, count) rows.
[[nodiscard]] std::string histogram_csv(const std::vector<HistogramBin>& bins);

/// Fixed-width summary laid out like the coverage/guarantee tables.
[[nodiscard]] std::string summary_table(const SimulationReport& report);

/// Writes report.json, report.csv and histogram_<method>.csv into out_dir.
/// Returns the written paths.
std::vector<std::filesystem::path> write_report_files(const SimulationReport& report,
                                                      const std::filesystem::path& out_dir);

}  // namespace gpi
