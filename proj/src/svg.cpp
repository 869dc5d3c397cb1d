#include "regimevol/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "regimevol/error.hpp"

namespace regimevol {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 320.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 880.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 280.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::vector<std::string>& x_labels,
                          const std::vector<SvgSeries>& series, const SvgBand* band) {
    if (series.empty() || series.front().values.empty()) {
        fail(ErrorCode::InvalidParams, "chart needs at least one non-empty series");
    }
    const std::size_t n = series.front().values.size();

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto absorb = [&](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) continue;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    };
    for (const auto& s : series) absorb(s.values);
    if (band) {
        absorb(band->lower);
        absorb(band->upper);
    }
    if (!(hi > lo)) {
        hi = lo + 1.0;
        lo -= 1.0;
    }
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto x_at = [&](std::size_t i) {
        if (n == 1) return (kLeft + kRight) / 2.0;
        return kLeft + (kRight - kLeft) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    auto y_at = [&](double v) { return kBottom - (kBottom - kTop) * (v - lo) / (hi - lo); };

    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
        << title << "</text>\n";

    // y axis with 5 ticks
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
        << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        double v = lo + (hi - lo) * tick / 4.0;
        double y = y_at(v);
        out << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft
            << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }

    // sparse x labels
    if (!x_labels.empty()) {
        std::size_t step = std::max<std::size_t>(1, x_labels.size() / 8);
        for (std::size_t i = 0; i < x_labels.size(); i += step) {
            double x = x_at(i);
            out << "<text x=\"" << fmt(x) << "\" y=\"" << kBottom + 18
                << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
                << x_labels[i] << "</text>\n";
        }
    }

    if (band && band->lower.size() == n && band->upper.size() == n) {
        out << "<polygon fill=\"#1f77b4\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            out << fmt(x_at(i)) << ',' << fmt(y_at(band->upper[i])) << ' ';
        }
        for (std::size_t i = n; i-- > 0;) {
            out << fmt(x_at(i)) << ',' << fmt(y_at(band->lower[i])) << ' ';
        }
        out << "\"/>\n";
    }

    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.values.size() && i < n; ++i) {
            out << fmt(x_at(i)) << ',' << fmt(y_at(s.values[i])) << ' ';
        }
        out << "\"/>\n";
    }

    double legend_y = kTop + 4;
    for (const auto& s : series) {
        out << "<rect x=\"" << kRight - 150 << "\" y=\"" << fmt(legend_y - 9)
            << "\" width=\"12\" height=\"4\" fill=\"" << s.color << "\"/>\n";
        out << "<text x=\"" << kRight - 132 << "\" y=\"" << fmt(legend_y)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace regimevol
