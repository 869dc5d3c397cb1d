#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "regimevol/date.hpp"

namespace regimevol {

enum class Frequency { Daily, Monthly };

/**
 * @brief Date-indexed numeric series, the universal carrier between modules.
 *
 * Invariants enforced at construction:
 * - dates strictly increasing, no duplicates
 * - values.size() == dates.size(), series non-empty
 * - Monthly series are canonicalized to first-of-month dates
 *
 * Instances are immutable after construction and safe to share across
 * threads.
 */
class TimeSeries {
public:
    TimeSeries(std::vector<Date> dates, std::vector<double> values, Frequency frequency);

    std::size_t size() const { return dates_.size(); }
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<double>& values() const { return values_; }
    Frequency frequency() const { return frequency_; }

    const Date& date(std::size_t i) const { return dates_[i]; }
    double value(std::size_t i) const { return values_[i]; }
    const Date& first_date() const { return dates_.front(); }
    const Date& last_date() const { return dates_.back(); }

    /// Restricts to dates in [start, end]; throws Error(NoOverlap) if empty.
    TimeSeries slice(const Date& start, const Date& end) const;

private:
    std::vector<Date> dates_;
    std::vector<double> values_;
    Frequency frequency_;
};

/// Daily log returns in percent; length is one less than the price series.
struct ReturnSeries {
    std::vector<Date> dates;     // the later date of each price pair
    std::vector<double> returns; // 100 * ln(p_i / p_{i-1})
};

/// r_i = 100 * ln(p_i / p_{i-1}). Throws NonPositivePrice / TooShort.
ReturnSeries log_returns(const TimeSeries& prices);

struct NamedSeries {
    std::string name;
    TimeSeries series;
};

/**
 * @brief Daily panel with monthly columns broadcast across the days of
 * their month.
 *
 * period_index[i] gives, for each daily date, the index into period_dates
 * of the month it belongs to.
 */
struct AlignedPanel {
    std::vector<Date> daily_dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // one per name, daily frequency
    std::vector<std::size_t> period_index;
    std::vector<Date> period_dates;  // first-of-month

    const std::vector<double>& column(const std::string& name) const;
};

/**
 * @brief Aligns daily and monthly series onto the common daily span.
 *
 * Monthly values are held constant across all daily dates of their month.
 * The panel is restricted to dates covered by every input. Throws
 * NoOverlap when the intersection is empty and FrequencyMismatch when a
 * series appears in the wrong list.
 */
AlignedPanel align(std::span<const NamedSeries> daily, std::span<const NamedSeries> monthly);

/// Shifts a monthly covariate back k months: the value observed for month
/// t becomes effective at month t + k.
TimeSeries lag_months(const TimeSeries& monthly, int k);

/// Compresses a daily series to monthly frequency by within-month means.
TimeSeries to_monthly_mean(const TimeSeries& daily);

}  // namespace regimevol
