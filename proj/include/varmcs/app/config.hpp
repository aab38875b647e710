#pragma once

#include "varmcs/loss/loss.hpp"
#include "varmcs/mcs/mcs.hpp"
#include "varmcs/risk/models.hpp"
#include "varmcs/risk/rolling.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace varmcs::app {

/// Declarative description of a pipeline run, read from YAML. Relative paths are
/// resolved against the directory of the config file. See README for the schema.
struct RunConfig {
    std::string asset = "asset";
    std::filesystem::path data_path;
    std::string date_column = "date";
    std::string value_column;  // empty: price if present, else return
    std::size_t out_of_sample = 0;
    double tau = 0.05;
    std::vector<risk::ModelSpec> models;
    loss::VarLossType loss_type = loss::VarLossType::Normal;
    double loss_delta = loss::kDefaultSmoothness;
    mcs::McsConfig mcs;
    double eta = 10.0;
    double lambda = 0.99;
    risk::RollingOptions rolling;
    unsigned workers = 1;
    std::filesystem::path output_dir;

    /// Numeric bounds of every section. Does not require two models; the MCS stage checks that.
    void validate() const;
};

RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Stable text rendering of every setting that affects the artifacts (not workers or
/// the output directory). The manifest hashes it.
std::string canonical_config(const RunConfig& config);

}  // namespace varmcs::app
