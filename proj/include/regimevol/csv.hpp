#pragma once

#include <filesystem>

#include "regimevol/time_series.hpp"

namespace regimevol {

/// Supported input layouts. DateValue is `date,value` with a header row;
/// YahooOhlc is the standard seven-column export, of which the adjusted
/// close is consumed.
enum class CsvSchema { DateValue, YahooOhlc };

/**
 * @brief Loads a CSV file into a TimeSeries sorted by date.
 *
 * Frequency is inferred from the dates: a file whose dates never repeat a
 * month and are at least 28 days apart is treated as monthly, anything
 * else as daily. Duplicate dates are rejected (DuplicateDate), malformed
 * rows raise ParseError with the row number, and an empty file raises
 * EmptySeries.
 */
TimeSeries load_csv(const std::filesystem::path& path, CsvSchema schema);

/// Writes `date,value` rows with a header, mirroring the DateValue schema.
void write_csv(const TimeSeries& series, const std::filesystem::path& path);

}  // namespace regimevol
