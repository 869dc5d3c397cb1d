#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace regimevol {

struct SvgSeries {
    std::string label;
    std::vector<double> values;
    std::string color = "#1f77b4";
};

/// Optional shaded band around the first series (confidence envelopes).
struct SvgBand {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Minimal deterministic line chart: shared x grid, left axis ticks,
/// legend in the top-right corner. x_labels thins automatically.
void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::vector<std::string>& x_labels,
                          const std::vector<SvgSeries>& series, const SvgBand* band = nullptr);

}  // namespace regimevol
