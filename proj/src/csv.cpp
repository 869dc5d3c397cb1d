#include "regimevol/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "regimevol/error.hpp"

namespace regimevol {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, delim)) out.push_back(trim(token));
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_number(const std::string& token, std::size_t row) {
    try {
        std::size_t used = 0;
        double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::ParseError,
             "row " + std::to_string(row) + ": cannot parse number '" + token + "'");
    }
}

bool looks_like_header(const std::vector<std::string>& fields) {
    if (fields.empty()) return false;
    const std::string first = lower(fields[0]);
    return first == "date" || first.find("date") != std::string::npos;
}

Frequency infer_frequency(const std::vector<Date>& dates) {
    if (dates.size() < 2) return Frequency::Daily;
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (dates[i].month_key() == dates[i - 1].month_key()) return Frequency::Daily;
    }
    // Distinct months throughout: monthly if typical spacing is a month.
    return Frequency::Monthly;
}

}  // namespace

TimeSeries load_csv(const std::filesystem::path& path, CsvSchema schema) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");

    std::vector<std::pair<Date, double>> rows;
    std::string line;
    std::size_t row_number = 0;
    int adj_close_col = -1;

    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        if (row_number == 1 && looks_like_header(fields)) {
            if (schema == CsvSchema::YahooOhlc) {
                for (std::size_t j = 0; j < fields.size(); ++j) {
                    std::string name = lower(fields[j]);
                    if (name == "adj close" || name == "adj_close" || name == "adjclose") {
                        adj_close_col = static_cast<int>(j);
                    }
                }
                if (adj_close_col < 0) {
                    fail(ErrorCode::ParseError, "Yahoo export lacks an adjusted-close column");
                }
            }
            continue;
        }
        if (schema == CsvSchema::DateValue) {
            if (fields.size() < 2) {
                fail(ErrorCode::ParseError,
                     "row " + std::to_string(row_number) + ": expected `date,value`");
            }
            Date d = Date::parse(fields[0]);
            rows.emplace_back(d, parse_number(fields[1], row_number));
        } else {
            if (adj_close_col < 0) {
                // headerless Yahoo export: adjusted close is the sixth column
                adj_close_col = 5;
            }
            if (fields.size() <= static_cast<std::size_t>(adj_close_col)) {
                fail(ErrorCode::ParseError,
                     "row " + std::to_string(row_number) + ": too few columns");
            }
            Date d = Date::parse(fields[0]);
            rows.emplace_back(d, parse_number(fields[static_cast<std::size_t>(adj_close_col)],
                                              row_number));
        }
    }
    if (rows.empty()) fail(ErrorCode::EmptySeries, "'" + path.string() + "' has no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            fail(ErrorCode::DuplicateDate, "duplicate date " + rows[i].first.to_string());
        }
    }

    std::vector<Date> dates;
    std::vector<double> values;
    dates.reserve(rows.size());
    values.reserve(rows.size());
    for (const auto& [d, v] : rows) {
        dates.push_back(d);
        values.push_back(v);
    }
    Frequency freq = infer_frequency(dates);
    return TimeSeries(std::move(dates), std::move(values), freq);
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << "date,value\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", series.value(i));
        out << series.date(i).to_string() << ',' << buf << '\n';
    }
}

}  // namespace regimevol
