#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regimevol/csv.hpp"
#include "regimevol/date.hpp"
#include "regimevol/garch_midas.hpp"

namespace regimevol {

/// Column transform applied to a MIDAS covariate after loading.
enum class SeriesTransform { None, Diff, LogDiff };

struct CovariateConfig {
    std::string path;
    std::string name;
    SeriesTransform transform = SeriesTransform::None;
};

/**
 * @brief Parsed pipeline configuration.
 *
 * The on-disk format is a flat key-value file with [section] headers; the
 * full key list is documented in the README. All validation errors are
 * collected, not just the first.
 */
struct PipelineConfig {
    // [data]
    std::string returns_path;
    CsvSchema returns_schema = CsvSchema::DateValue;
    bool returns_are_returns = false;  // returns_kind = returns | prices
    CovariateConfig covariate1;
    CovariateConfig covariate2;
    std::vector<std::pair<std::string, std::string>> regressors;  // name -> path

    // [sample]
    std::optional<Date> start;
    std::optional<Date> end;

    // [garch_midas]
    GarchMidasSpec gm_spec;
    int lag_months = 0;

    // [msr]
    int msr_regimes = 2;
    bool switching_variance = true;

    // [qr]
    std::vector<double> taus;  // default 0.05 .. 0.95 step 0.05

    // [stage2]
    bool ltv_monthly = true;
    int stage2_lag = 0;

    // [output] / [run]
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 42;

    std::filesystem::path source_path;  // file the config was read from
};

using ConfigErrors = std::vector<std::pair<std::string, std::string>>;  // key, message

/// Parses and validates; every problem is reported in `errors` (empty on
/// success). Throws Error(IoError) only when the file cannot be read.
PipelineConfig load_pipeline_config(const std::filesystem::path& path, ConfigErrors& errors);

/// FNV-1a hash of the raw config bytes, recorded in the run manifest.
std::uint64_t file_hash(const std::filesystem::path& path);

/// Simulation scenario request, loadable from the same key-value format:
/// a [scenario] section with name, seed and output directory.
struct ScenarioConfig {
    std::string name = "pipeline-fixture";
    std::uint64_t seed = 42;
    std::filesystem::path output_dir = "fixture";
};

ScenarioConfig load_scenario_config(const std::filesystem::path& path, ConfigErrors& errors);

}  // namespace regimevol
