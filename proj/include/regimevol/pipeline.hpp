#pragma once

#include <string>
#include <vector>

#include "regimevol/config.hpp"

namespace regimevol {

enum class PipelineStage { All, Diagnostics, GarchMidas, Msr, Qr };

/// Parses run/diagnostics/garch/msr/qr; throws Error(ConfigError).
PipelineStage stage_from_string(const std::string& name);

struct PipelineResult {
    int exit_code = 0;                   // 0 ok, 2 estimation failure
    std::vector<std::string> artifacts;  // files written under the output dir
    std::string error;                   // populated when exit_code != 0
};

/**
 * @brief End-to-end orchestration: ingest, diagnostics, volatility fit,
 * regime and quantile regressions, tables and plot data.
 *
 * Stages write their artifacts into config.output_dir and later stages
 * reload persisted stv.csv / ltv.csv, so any stage can be rerun without
 * refitting. On failure the partial artifacts stay in place next to a
 * FAILED marker naming the stage.
 */
PipelineResult run_pipeline(const PipelineConfig& config,
                            PipelineStage stage = PipelineStage::All);

/// Writes the simulation fixture for `scenario` (data CSVs plus a ready
/// config) into `directory` and returns the config path.
std::filesystem::path write_fixture(const std::string& scenario,
                                    const std::filesystem::path& directory,
                                    std::uint64_t seed);

}  // namespace regimevol
