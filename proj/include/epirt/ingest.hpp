#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "epirt/core.hpp"
#include "epirt/csv.hpp"
#include "epirt/dates.hpp"

namespace epirt {

enum class CasesSemantics { daily_new, cumulative_total };

// Single variant today; an enum keeps the sanitation contract explicit.
enum class NegativePolicy { clamp_zero_warn };

struct IngestConfig {
    std::string path;
    std::string date_column = "date";
    std::string unit_column = "state";
    std::string cases_column = "newCases";
    CasesSemantics cases_semantics = CasesSemantics::daily_new;
    Date start_date = make_date(2020, 5, 20);
    Date end_date = make_date(2021, 5, 20);
    NegativePolicy negative_policy = NegativePolicy::clamp_zero_warn;

    void validate() const {
        if (path.empty()) throw std::invalid_argument("IngestConfig: path is empty");
        if (date_column.empty() || unit_column.empty() || cases_column.empty()) {
            throw std::invalid_argument("IngestConfig: column names must be non-empty");
        }
        if (end_date < start_date) {
            throw std::invalid_argument("IngestConfig: start_date must not exceed end_date");
        }
    }
};

// One repaired or filled cell. `row` is the 1-based line number in the input
// file, or 0 when no input row exists (zero-filled dates).
struct SanitationEntry {
    std::size_t row;
    std::string field;  // "<STATE> <date>"
    std::string original;
    std::string replacement;
    std::string reason;
};

struct RowError {
    std::size_t row;
    std::string message;
};

struct SanitationReport {
    std::vector<SanitationEntry> entries;
    std::vector<RowError> row_errors;
    std::size_t rows_ignored = 0;  // rows for other units or outside the window
    std::size_t rows_total = 0;

    std::size_t modified_cells() const { return entries.size(); }
};

struct ParseResult {
    std::vector<IncidenceSeries> states;  // sorted by state code
    SanitationReport report;
};

// Reads the per-state CSV, filters to the configured window, repairs what
// the non-negativity and consecutive-day invariants require, and reports
// every repair. Aborts only when more than 1 percent of data rows fail.
inline ParseResult parse_csv(const IngestConfig& cfg) {
    cfg.validate();
    std::ifstream in(cfg.path);
    if (!in) {
        throw std::runtime_error("parse_csv: cannot open '" + cfg.path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("parse_csv: empty file '" + cfg.path + "'");
    }
    auto header = split_csv_line(line);
    auto column_index = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::runtime_error("parse_csv: missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = column_index(cfg.date_column);
    const std::size_t unit_col = column_index(cfg.unit_column);
    const std::size_t cases_col = column_index(cfg.cases_column);

    struct Cell {
        std::int64_t value;
        std::size_t row;
    };
    // Per state: in-window cells keyed by date, plus the latest pre-window
    // cumulative value to anchor first differences.
    std::map<std::string, std::map<Date, Cell>> cells;
    std::map<std::string, std::pair<Date, std::int64_t>> baselines;

    SanitationReport report;
    std::size_t line_no = 1;
    const bool cumulative = cfg.cases_semantics == CasesSemantics::cumulative_total;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++report.rows_total;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            report.row_errors.push_back({line_no, "expected " + std::to_string(header.size()) +
                                                      " fields, got " +
                                                      std::to_string(fields.size())});
            continue;
        }
        const std::string& unit = fields[unit_col];
        if (!is_state_code(unit)) {
            ++report.rows_ignored;
            continue;
        }
        Date date;
        std::int64_t value;
        try {
            date = parse_date(fields[date_col]);
            value = parse_int64(fields[cases_col]);
        } catch (const std::exception& e) {
            report.row_errors.push_back({line_no, e.what()});
            continue;
        }
        if (date > cfg.end_date) {
            ++report.rows_ignored;
            continue;
        }
        if (date < cfg.start_date) {
            if (cumulative) {
                auto it = baselines.find(unit);
                if (it == baselines.end() || it->second.first <= date) {
                    baselines[unit] = {date, value};
                }
            } else {
                ++report.rows_ignored;
            }
            continue;
        }
        auto [it, inserted] = cells[unit].insert({date, Cell{value, line_no}});
        if (!inserted) {
            report.entries.push_back({line_no, unit + " " + format_date(date),
                                      std::to_string(it->second.value), std::to_string(value),
                                      "duplicate row, last value kept"});
            it->second = Cell{value, line_no};
        }
    }

    if (report.row_errors.size() * 100 > report.rows_total) {
        throw std::runtime_error("parse_csv: " + std::to_string(report.row_errors.size()) +
                                 " of " + std::to_string(report.rows_total) +
                                 " rows failed (limit 1%)");
    }

    const auto span = static_cast<std::size_t>(days_between(cfg.start_date, cfg.end_date)) + 1;
    ParseResult out;
    // Baseline-only states surface as all-zero series rather than vanishing.
    for (const auto& [unit, baseline] : baselines) cells.try_emplace(unit);
    for (auto& [unit, by_date] : cells) {
        std::vector<std::int64_t> counts;
        counts.reserve(span);
        std::int64_t prev_cumulative = 0;
        if (cumulative) {
            auto it = baselines.find(unit);
            if (it != baselines.end()) prev_cumulative = it->second.second;
        }
        for (std::size_t d = 0; d < span; ++d) {
            const Date date = cfg.start_date + Days{static_cast<long>(d)};
            auto it = by_date.find(date);
            if (it == by_date.end()) {
                counts.push_back(0);
                report.entries.push_back({0, unit + " " + format_date(date), "", "0",
                                          "missing date zero-filled"});
                continue;
            }
            std::int64_t daily = it->second.value;
            if (cumulative) {
                daily = it->second.value - prev_cumulative;
                prev_cumulative = it->second.value;
            }
            if (daily < 0) {
                report.entries.push_back({it->second.row, unit + " " + format_date(date),
                                          std::to_string(daily), "0",
                                          cumulative ? "cumulative decrease clamped"
                                                     : "negative count clamped"});
                daily = 0;
            }
            counts.push_back(daily);
        }
        out.states.emplace_back(GeoUnit::state(unit), cfg.start_date, std::move(counts));
    }
    out.report = std::move(report);
    return out;
}

struct RegionMap {
    std::map<std::string, std::string> state_to_region;

    void validate() const {
        if (state_to_region.size() != state_codes().size()) {
            throw std::invalid_argument("RegionMap: must map all 27 states");
        }
        std::set<std::string> used;
        for (const auto& [state, region] : state_to_region) {
            if (!is_state_code(state)) {
                throw std::invalid_argument("RegionMap: unknown state '" + state + "'");
            }
            if (!is_region_code(region)) {
                throw std::invalid_argument("RegionMap: unknown region '" + region + "'");
            }
            used.insert(region);
        }
        if (used.size() != region_codes().size()) {
            throw std::invalid_argument("RegionMap: all 5 regions must be used");
        }
    }
};

inline const RegionMap& brazil_region_map() {
    static const RegionMap map = [] {
        RegionMap m;
        m.state_to_region = {
            {"AC", "N"},  {"AL", "NE"}, {"AM", "N"},  {"AP", "N"},  {"BA", "NE"}, {"CE", "NE"},
            {"DF", "CO"}, {"ES", "SE"}, {"GO", "CO"}, {"MA", "NE"}, {"MG", "SE"}, {"MS", "CO"},
            {"MT", "CO"}, {"PA", "N"},  {"PB", "NE"}, {"PE", "NE"}, {"PI", "NE"}, {"PR", "S"},
            {"RJ", "SE"}, {"RN", "NE"}, {"RO", "N"},  {"RR", "N"},  {"RS", "S"},  {"SC", "S"},
            {"SE", "NE"}, {"SP", "SE"}, {"TO", "N"}};
        m.validate();
        return m;
    }();
    return map;
}

struct AggregateResult {
    IncidenceSeries country;
    std::vector<IncidenceSeries> regions;  // region-code order, present regions only
};

// Daywise integer sums of the state series into their regions and the
// country. Regions with no member present are omitted.
inline AggregateResult aggregate(const std::vector<IncidenceSeries>& states,
                                 const RegionMap& rmap) {
    if (states.empty()) {
        throw std::invalid_argument("aggregate: no state series");
    }
    rmap.validate();
    const Date start = states.front().start_date;
    const std::size_t len = states.front().size();
    std::vector<std::int64_t> country(len, 0);
    std::map<std::string, std::vector<std::int64_t>> region_sums;
    for (const auto& s : states) {
        if (s.unit.kind() != GeoKind::state) {
            throw std::invalid_argument("aggregate: input must be state series");
        }
        if (s.start_date != start || s.size() != len) {
            throw std::invalid_argument("aggregate: date ranges are misaligned");
        }
        auto it = rmap.state_to_region.find(s.unit.code());
        if (it == rmap.state_to_region.end()) {
            throw std::invalid_argument("aggregate: state '" + s.unit.code() + "' is unmapped");
        }
        auto& region = region_sums.try_emplace(it->second, len, 0).first->second;
        for (std::size_t i = 0; i < len; ++i) {
            country[i] += s.counts[i];
            region[i] += s.counts[i];
        }
    }
    AggregateResult out{IncidenceSeries{GeoUnit::country(), start, std::move(country)}, {}};
    for (auto code : region_codes()) {
        auto it = region_sums.find(std::string(code));
        if (it != region_sums.end()) {
            out.regions.emplace_back(GeoUnit::region(code), start, std::move(it->second));
        }
    }
    return out;
}

struct ShareRow {
    std::string state;
    double case_share;                // percent of national cases
    std::optional<double> pop_share;  // percent of national population
};

// Reads the optional two-column population file (state_code, population).
// A header line is allowed and detected by its non-numeric second field.
inline std::map<std::string, std::int64_t> read_population_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_population_file: cannot open '" + path + "'");
    }
    std::map<std::string, std::int64_t> pop;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw std::runtime_error("read_population_file: line " + std::to_string(line_no) +
                                     ": expected 2 fields");
        }
        if (!is_state_code(fields[0])) {
            if (line_no == 1) continue;  // header
            throw std::runtime_error("read_population_file: line " + std::to_string(line_no) +
                                     ": unknown state '" + fields[0] + "'");
        }
        pop[fields[0]] = parse_int64(fields[1]);
    }
    return pop;
}

// Per-state percentage of national cases and, when a population table is
// given, of national population. Each share column sums to 100.
inline std::vector<ShareRow> relative_share_report(
    const std::vector<IncidenceSeries>& states,
    const std::optional<std::map<std::string, std::int64_t>>& population) {
    if (states.empty()) {
        throw std::invalid_argument("relative_share_report: no state series");
    }
    double national_cases = 0.0;
    for (const auto& s : states) {
        for (auto c : s.counts) national_cases += static_cast<double>(c);
    }
    if (national_cases == 0.0) {
        throw std::invalid_argument("relative_share_report: no cases in any state");
    }
    double national_pop = 0.0;
    if (population) {
        for (auto code : state_codes()) {
            auto it = population->find(std::string(code));
            if (it == population->end()) {
                throw std::invalid_argument("relative_share_report: population file misses '" +
                                            std::string(code) + "'");
            }
            national_pop += static_cast<double>(it->second);
        }
    }
    std::vector<ShareRow> rows;
    rows.reserve(states.size());
    for (const auto& s : states) {
        double total = 0.0;
        for (auto c : s.counts) total += static_cast<double>(c);
        ShareRow row{s.unit.code(), 100.0 * total / national_cases, std::nullopt};
        if (population) {
            row.pop_share = 100.0 *
                            static_cast<double>(population->at(s.unit.code())) / national_pop;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_sanitation_report(const SanitationReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_sanitation_report: cannot write '" + path + "'");
    }
    out << "row,field,original,replacement,reason\n";
    for (const auto& e : report.entries) {
        out << e.row << ',' << csv_escape(e.field) << ',' << csv_escape(e.original) << ','
            << csv_escape(e.replacement) << ',' << csv_escape(e.reason) << '\n';
    }
}

}  // namespace epirt
