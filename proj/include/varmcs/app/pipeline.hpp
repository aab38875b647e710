#pragma once

#include "varmcs/app/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace varmcs::app {

struct Artifact {
    std::string name;  // file name inside the output directory
    std::string checksum;
};

struct PipelineResult {
    std::vector<Artifact> artifacts;
    std::vector<risk::FailedModel> failed_models;
    std::vector<std::string> survivors;
};

/// Data -> summary table -> rolling forecasts -> losses -> MCS -> combination -> backtests.
/// Artifacts written to config.output_dir:
///   table1.csv, forecast_panel.csv, loss_matrix.csv, ssm.csv (table 2), ssm.json,
///   combination.csv, combination_weights.csv, backtest.csv, table3.csv, manifest.txt
/// A failing stage is rethrown with its name prefixed; files written before it and the
/// manifest are kept.
PipelineResult run_pipeline(const RunConfig& config);

/// FNV-1a checksum of a file's bytes as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace varmcs::app
