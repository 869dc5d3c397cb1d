#include "regimevol/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "regimevol/error.hpp"

namespace regimevol {

TimeSeries::TimeSeries(std::vector<Date> dates, std::vector<double> values, Frequency frequency)
    : dates_(std::move(dates)), values_(std::move(values)), frequency_(frequency) {
    if (dates_.empty()) fail(ErrorCode::EmptySeries, "series has no observations");
    if (dates_.size() != values_.size()) {
        fail(ErrorCode::ParseError, "dates and values lengths differ");
    }
    if (frequency_ == Frequency::Monthly) {
        for (auto& d : dates_) d = d.first_of_month();
    }
    for (std::size_t i = 0; i < dates_.size(); ++i) {
        if (!dates_[i].valid()) {
            fail(ErrorCode::ParseError, "invalid date " + dates_[i].to_string());
        }
        if (i > 0 && !(dates_[i - 1] < dates_[i])) {
            fail(ErrorCode::DuplicateDate,
                 "dates not strictly increasing at " + dates_[i].to_string());
        }
    }
}

TimeSeries TimeSeries::slice(const Date& start, const Date& end) const {
    std::vector<Date> d;
    std::vector<double> v;
    for (std::size_t i = 0; i < size(); ++i) {
        if (dates_[i] < start || end < dates_[i]) continue;
        d.push_back(dates_[i]);
        v.push_back(values_[i]);
    }
    if (d.empty()) {
        fail(ErrorCode::NoOverlap, "no observations in [" + start.to_string() + ", " +
                                       end.to_string() + "]");
    }
    return TimeSeries(std::move(d), std::move(v), frequency_);
}

ReturnSeries log_returns(const TimeSeries& prices) {
    if (prices.size() < 2) fail(ErrorCode::TooShort, "need at least two prices");
    ReturnSeries out;
    out.dates.reserve(prices.size() - 1);
    out.returns.reserve(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices.value(i) > 0.0)) {
            fail(ErrorCode::NonPositivePrice,
                 "price at " + prices.date(i).to_string() + " is not positive");
        }
        if (i == 0) continue;
        out.dates.push_back(prices.date(i));
        out.returns.push_back(100.0 * std::log(prices.value(i) / prices.value(i - 1)));
    }
    return out;
}

const std::vector<double>& AlignedPanel::column(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) return columns[j];
    }
    fail(ErrorCode::ConfigError, "panel has no column named '" + name + "'");
}

AlignedPanel align(std::span<const NamedSeries> daily, std::span<const NamedSeries> monthly) {
    if (daily.empty()) fail(ErrorCode::EmptySeries, "align requires at least one daily series");
    for (const auto& s : daily) {
        if (s.series.frequency() != Frequency::Daily) {
            fail(ErrorCode::FrequencyMismatch, "series '" + s.name + "' is not daily");
        }
    }
    for (const auto& s : monthly) {
        if (s.series.frequency() != Frequency::Monthly) {
            fail(ErrorCode::FrequencyMismatch, "series '" + s.name + "' is not monthly");
        }
    }

    // Candidate days: present in every daily series.
    Date lo = daily.front().series.first_date();
    Date hi = daily.front().series.last_date();
    for (const auto& s : daily) {
        lo = std::max(lo, s.series.first_date());
        hi = std::min(hi, s.series.last_date());
    }
    std::map<Date, std::size_t> counts;
    for (const auto& s : daily) {
        for (const auto& d : s.series.dates()) {
            if (d < lo || hi < d) continue;
            counts[d]++;
        }
    }

    // Keep days whose month every monthly series observes.
    auto month_observed = [](const NamedSeries& s, int key) {
        const auto& ds = s.series.dates();
        auto it = std::lower_bound(ds.begin(), ds.end(), Date::from_month_key(key));
        return it != ds.end() && it->month_key() == key;
    };
    std::vector<Date> kept;
    for (const auto& [d, c] : counts) {
        if (c != daily.size()) continue;
        bool ok = true;
        for (const auto& s : monthly) ok = ok && month_observed(s, d.month_key());
        if (ok) kept.push_back(d);
    }
    if (kept.empty()) fail(ErrorCode::NoOverlap, "no common daily dates after alignment");

    AlignedPanel panel;
    panel.daily_dates = kept;
    panel.period_index.reserve(kept.size());
    int prev_key = kept.front().month_key() - 1;
    for (const auto& d : kept) {
        int key = d.month_key();
        if (key != prev_key) {
            panel.period_dates.push_back(Date::from_month_key(key));
            prev_key = key;
        }
        panel.period_index.push_back(panel.period_dates.size() - 1);
    }

    for (const auto& s : daily) {
        std::vector<double> col;
        col.reserve(kept.size());
        std::size_t pos = 0;
        const auto& ds = s.series.dates();
        for (const auto& d : kept) {
            while (pos < ds.size() && ds[pos] < d) ++pos;
            col.push_back(s.series.value(pos));
        }
        panel.names.push_back(s.name);
        panel.columns.push_back(std::move(col));
    }
    for (const auto& s : monthly) {
        std::vector<double> col;
        col.reserve(kept.size());
        for (const auto& d : kept) {
            int key = d.month_key();
            // binary search on month keys
            const auto& ds = s.series.dates();
            std::size_t lo_i = 0, hi_i = ds.size();
            while (lo_i < hi_i) {
                std::size_t mid = (lo_i + hi_i) / 2;
                if (ds[mid].month_key() < key) {
                    lo_i = mid + 1;
                } else {
                    hi_i = mid;
                }
            }
            if (lo_i >= ds.size() || ds[lo_i].month_key() != key) {
                fail(ErrorCode::NoOverlap, "month " + d.first_of_month().to_string() +
                                               " missing from series '" + s.name + "'");
            }
            col.push_back(s.series.value(lo_i));
        }
        panel.names.push_back(s.name);
        panel.columns.push_back(std::move(col));
    }
    return panel;
}

TimeSeries lag_months(const TimeSeries& monthly, int k) {
    if (monthly.frequency() != Frequency::Monthly) {
        fail(ErrorCode::FrequencyMismatch, "lag_months expects a monthly series");
    }
    std::vector<Date> dates;
    dates.reserve(monthly.size());
    for (const auto& d : monthly.dates()) dates.push_back(d.add_months(k));
    return TimeSeries(std::move(dates), monthly.values(), Frequency::Monthly);
}

TimeSeries to_monthly_mean(const TimeSeries& daily) {
    if (daily.frequency() != Frequency::Daily) {
        fail(ErrorCode::FrequencyMismatch, "to_monthly_mean expects a daily series");
    }
    std::vector<Date> dates;
    std::vector<double> values;
    int current_key = daily.first_date().month_key();
    double sum = 0.0;
    std::size_t count = 0;
    auto flush = [&]() {
        if (count == 0) return;
        dates.push_back(Date::from_month_key(current_key));
        values.push_back(sum / static_cast<double>(count));
    };
    for (std::size_t i = 0; i < daily.size(); ++i) {
        int key = daily.date(i).month_key();
        if (key != current_key) {
            flush();
            current_key = key;
            sum = 0.0;
            count = 0;
        }
        sum += daily.value(i);
        ++count;
    }
    flush();
    return TimeSeries(std::move(dates), std::move(values), Frequency::Monthly);
}

}  // namespace regimevol
