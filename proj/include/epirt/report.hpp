#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epirt/core.hpp"
#include "epirt/csv.hpp"
#include "epirt/dates.hpp"
#include "epirt/stats.hpp"

namespace epirt {

// Writes one row per day with full-precision (shortest round-trip) numbers.
inline void emit_rt_table(const RtSeries& rt, const std::string& path) {
    if (rt.points.empty()) {
        throw std::invalid_argument("emit_rt_table: empty series");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("emit_rt_table: cannot write '" + path + "'");
    }
    out << "date,mean,variance,lower,upper,burn_in\n";
    for (std::size_t i = 0; i < rt.size(); ++i) {
        const auto& p = rt.points[i];
        out << format_date(rt.date_at(i)) << ',' << format_double(p.mean) << ','
            << format_double(p.variance) << ',' << format_double(p.lower) << ','
            << format_double(p.upper) << ',' << (p.burn_in ? '1' : '0') << '\n';
    }
}

struct RtTableRow {
    Date date;
    double mean;
    double variance;
    double lower;
    double upper;
    bool burn_in;
};

inline std::vector<RtTableRow> read_rt_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_rt_table: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) !=
            std::vector<std::string>{"date", "mean", "variance", "lower", "upper", "burn_in"}) {
        throw std::runtime_error("read_rt_table: unexpected header in '" + path + "'");
    }
    std::vector<RtTableRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 6) {
            throw std::runtime_error("read_rt_table: malformed row in '" + path + "'");
        }
        rows.push_back({parse_date(f[0]), parse_double(f[1]), parse_double(f[2]),
                        parse_double(f[3]), parse_double(f[4]), f[5] == "1"});
    }
    return rows;
}

struct ChartSeries {
    std::string name;
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<double> lower;  // with upper: a credible band; empty otherwise
    std::vector<double> upper;
};

namespace detail {

inline std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Tick label: enough digits to tell neighbouring ticks apart, no noise.
inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace detail

// Standalone SVG line chart: one polyline per series, a translucent polygon
// per credible band, a dashed guide at R=1, date and value axes. Output is a
// pure function of the input.
inline void emit_chart(const std::vector<ChartSeries>& series_set, const std::string& path) {
    if (series_set.empty()) {
        throw std::invalid_argument("emit_chart: no series");
    }
    Date min_date = Date::max();
    Date max_date = Date::min();
    double min_v = std::numeric_limits<double>::infinity();
    double max_v = -std::numeric_limits<double>::infinity();
    for (const auto& s : series_set) {
        if (s.dates.empty() || s.dates.size() != s.values.size()) {
            throw std::invalid_argument("emit_chart: series '" + s.name +
                                        "' needs matching non-empty dates and values");
        }
        const bool banded = !s.lower.empty() || !s.upper.empty();
        if (banded && (s.lower.size() != s.values.size() || s.upper.size() != s.values.size())) {
            throw std::invalid_argument("emit_chart: band bounds of '" + s.name +
                                        "' must match the value count");
        }
        for (std::size_t i = 0; i < s.dates.size(); ++i) {
            min_date = std::min(min_date, s.dates[i]);
            max_date = std::max(max_date, s.dates[i]);
            min_v = std::min(min_v, s.values[i]);
            max_v = std::max(max_v, s.values[i]);
            if (banded) {
                min_v = std::min(min_v, s.lower[i]);
                max_v = std::max(max_v, s.upper[i]);
            }
        }
    }
    // Keep the R=1 guide inside the frame.
    min_v = std::min(min_v, 1.0);
    max_v = std::max(max_v, 1.0);
    const double pad = (max_v - min_v) > 0.0 ? 0.05 * (max_v - min_v) : 1.0;
    min_v -= pad;
    max_v += pad;

    const double width = 900.0;
    const double height = 480.0;
    const double ml = 64.0;
    const double mr = 20.0;
    const double mt = 24.0;
    const double mb = 48.0;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;
    const double span_days = std::max<double>(1.0, static_cast<double>(days_between(min_date, max_date)));
    auto x_of = [&](Date d) {
        return ml + plot_w * static_cast<double>(days_between(min_date, d)) / span_days;
    };
    auto y_of = [&](double v) { return mt + plot_h * (max_v - v) / (max_v - min_v); };

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("emit_chart: cannot write '" + path + "'");
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"480\" "
           "viewBox=\"0 0 900 480\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"900\" height=\"480\" fill=\"white\"/>\n";

    // Bands first so every line stays visible on top of them.
    for (std::size_t k = 0; k < series_set.size(); ++k) {
        const auto& s = series_set[k];
        if (s.lower.empty()) continue;
        const char* color = kPalette[k % kPaletteSize];
        out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.dates.size(); ++i) {
            out << detail::svg_num(x_of(s.dates[i])) << ',' << detail::svg_num(y_of(s.upper[i]))
                << ' ';
        }
        for (std::size_t i = s.dates.size(); i-- > 0;) {
            out << detail::svg_num(x_of(s.dates[i])) << ',' << detail::svg_num(y_of(s.lower[i]));
            if (i != 0) out << ' ';
        }
        out << "\"/>\n";
    }

    // Guide at R = 1.
    out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(y_of(1.0))
        << "\" x2=\"" << detail::svg_num(ml + plot_w) << "\" y2=\"" << detail::svg_num(y_of(1.0))
        << "\" stroke=\"#999999\" stroke-dasharray=\"6,4\"/>\n";

    for (std::size_t k = 0; k < series_set.size(); ++k) {
        const auto& s = series_set[k];
        const char* color = kPalette[k % kPaletteSize];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.dates.size(); ++i) {
            if (i != 0) out << ' ';
            out << detail::svg_num(x_of(s.dates[i])) << ',' << detail::svg_num(y_of(s.values[i]));
        }
        out << "\"/>\n";
        // Legend row.
        const double ly = mt + 16.0 * static_cast<double>(k);
        out << "<line x1=\"" << detail::svg_num(ml + 8.0) << "\" y1=\"" << detail::svg_num(ly)
            << "\" x2=\"" << detail::svg_num(ml + 28.0) << "\" y2=\"" << detail::svg_num(ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << detail::svg_num(ml + 34.0) << "\" y=\"" << detail::svg_num(ly + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(s.name)
            << "</text>\n";
    }

    // Axes.
    out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(mt) << "\" x2=\""
        << detail::svg_num(ml) << "\" y2=\"" << detail::svg_num(mt + plot_h)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(mt + plot_h)
        << "\" x2=\"" << detail::svg_num(ml + plot_w) << "\" y2=\""
        << detail::svg_num(mt + plot_h) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = min_v + (max_v - min_v) * static_cast<double>(t) / 4.0;
        const double y = y_of(v);
        out << "<line x1=\"" << detail::svg_num(ml - 4.0) << "\" y1=\"" << detail::svg_num(y)
            << "\" x2=\"" << detail::svg_num(ml) << "\" y2=\"" << detail::svg_num(y)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::svg_num(ml - 8.0) << "\" y=\"" << detail::svg_num(y + 4.0)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(v) << "</text>\n";
    }
    const int date_ticks = std::min<int>(5, static_cast<int>(span_days));
    for (int t = 0; t <= date_ticks; ++t) {
        const Date d = min_date + Days{static_cast<long>(
                                      span_days * static_cast<double>(t) /
                                      static_cast<double>(std::max(date_ticks, 1)))};
        const double x = x_of(d);
        out << "<line x1=\"" << detail::svg_num(x) << "\" y1=\"" << detail::svg_num(mt + plot_h)
            << "\" x2=\"" << detail::svg_num(x) << "\" y2=\"" << detail::svg_num(mt + plot_h + 4.0)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::svg_num(x) << "\" y=\"" << detail::svg_num(mt + plot_h + 18.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_date(d) << "</text>\n";
    }
    out << "</svg>\n";
}

// Table of per-unit correlations sorted by unit label; undefined entries
// keep their fields empty and carry the reason.
inline void emit_correlation_matrix(std::vector<CorrelationRow> rows, const std::string& path) {
    if (rows.empty()) {
        throw std::invalid_argument("emit_correlation_matrix: empty table");
    }
    std::sort(rows.begin(), rows.end(),
              [](const CorrelationRow& a, const CorrelationRow& b) {
                  return a.unit.label() < b.unit.label();
              });
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("emit_correlation_matrix: cannot write '" + path + "'");
    }
    out << "unit,r,lower,upper,reason\n";
    for (const auto& row : rows) {
        out << row.unit.label() << ',';
        if (row.r) out << format_double(*row.r);
        out << ',';
        if (row.lower) out << format_double(*row.lower);
        out << ',';
        if (row.upper) out << format_double(*row.upper);
        out << ',' << csv_escape(row.note) << '\n';
    }
}

// Side-by-side row for the moving-average and R(t) indicators of one unit.
struct ComparisonRow {
    GeoUnit unit;
    std::optional<double> r_ma;
    std::optional<double> r_rt;
    std::optional<double> rt_lower;
    std::optional<double> rt_upper;
    std::string note;
};

inline void emit_correlation_comparison(std::vector<ComparisonRow> rows,
                                        const std::string& path) {
    if (rows.empty()) {
        throw std::invalid_argument("emit_correlation_comparison: empty table");
    }
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        return a.unit.label() < b.unit.label();
    });
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("emit_correlation_comparison: cannot write '" + path + "'");
    }
    out << "unit,r_ma,r_rt,rt_lower,rt_upper,reason\n";
    for (const auto& row : rows) {
        out << row.unit.label() << ',';
        if (row.r_ma) out << format_double(*row.r_ma);
        out << ',';
        if (row.r_rt) out << format_double(*row.r_rt);
        out << ',';
        if (row.rt_lower) out << format_double(*row.rt_lower);
        out << ',';
        if (row.rt_upper) out << format_double(*row.rt_upper);
        out << ',' << csv_escape(row.note) << '\n';
    }
}

}  // namespace epirt
