// epirt: reproduction-number estimation toolkit.
//
// Subcommands: estimate (R(t) tables and charts per geographic unit),
// correlate (unit-vs-country correlation matrix for the 7-day moving average
// and the R(t) posterior mean), simulate (renewal-process generator), report
// (relative case/population shares).

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "epirt/epirt.hpp"

namespace fs = std::filesystem;
using namespace epirt;

namespace {

// Canonical ordering: country, then regions, then states.
int kind_rank(GeoKind k) {
    switch (k) {
        case GeoKind::country: return 0;
        case GeoKind::region: return 1;
        case GeoKind::state: return 2;
    }
    return 3;
}

bool canonical_less(const GeoUnit& a, const GeoUnit& b) {
    if (kind_rank(a.kind()) != kind_rank(b.kind())) {
        return kind_rank(a.kind()) < kind_rank(b.kind());
    }
    return a.code() < b.code();
}

// "BR" is the country, "region:SE" the Southeast region, bare codes are
// states first (so "SE" means Sergipe) and regions otherwise.
GeoUnit parse_unit(const std::string& spec) {
    if (spec == "BR") return GeoUnit::country();
    if (spec.rfind("region:", 0) == 0) return GeoUnit::region(spec.substr(7));
    if (is_state_code(spec)) return GeoUnit::state(spec);
    if (is_region_code(spec)) return GeoUnit::region(spec);
    throw std::invalid_argument("unknown unit '" + spec + "'");
}

std::vector<GeoUnit> parse_units(const std::vector<std::string>& specs) {
    std::vector<GeoUnit> units;
    for (const auto& spec : specs) {
        auto unit = parse_unit(spec);
        if (std::find(units.begin(), units.end(), unit) == units.end()) {
            units.push_back(unit);
        }
    }
    std::sort(units.begin(), units.end(), canonical_less);
    return units;
}

struct ProfileSpec {
    std::vector<ProfileSegment> segments;
};

// "2.0x60,0.7x120": R value times day count, comma-separated.
ProfileSpec parse_profile(const std::string& text) {
    ProfileSpec out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        std::string part = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        auto x = part.find('x');
        if (part.empty() || x == std::string::npos || x == 0 || x + 1 >= part.size()) {
            throw std::invalid_argument("malformed profile segment '" + part +
                                        "' (expected RxDAYS)");
        }
        double r = parse_double(part.substr(0, x));
        std::int64_t days = parse_int64(part.substr(x + 1));
        if (days <= 0) {
            throw std::invalid_argument("profile segment '" + part + "' needs positive days");
        }
        out.segments.push_back({r, static_cast<std::size_t>(days)});
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.segments.empty()) {
        throw std::invalid_argument("empty profile");
    }
    return out;
}

// "100x5": daily seed level times day count.
std::vector<std::int64_t> parse_seeds(const std::string& text) {
    auto x = text.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= text.size()) {
        throw std::invalid_argument("malformed seeds '" + text + "' (expected LEVELxDAYS)");
    }
    std::int64_t level = parse_int64(text.substr(0, x));
    std::int64_t days = parse_int64(text.substr(x + 1));
    if (level < 0 || days <= 0) {
        throw std::invalid_argument("seeds '" + text + "' need level >= 0 and days >= 1");
    }
    return std::vector<std::int64_t>(static_cast<std::size_t>(days), level);
}

// Tracks written files so a failed run never leaves partial outputs behind:
// files are discarded on destruction unless the run commits.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    ~OutputSet() {
        if (committed_) return;
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    std::string reserve(const std::string& name) {
        auto path = dir_ / name;
        written_.push_back(path);
        return path.string();
    }

    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

struct CommonOptions {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t workers = 0;

    std::uint64_t resolve_seed() {
        if (!seed_given) {
            std::random_device rd;
            seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            std::cerr << "seed: " << seed << "\n";
        }
        return seed;
    }

    std::size_t resolve_workers() const {
        if (workers > 0) return workers;
        auto hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1;
    }
};

void add_common_options(CLI::App& cmd, CommonOptions& opts) {
    cmd.add_option("--out-dir", opts.out_dir, "Output directory")
        ->envname("EPIRT_OUT_DIR")
        ->capture_default_str();
    cmd.add_option("--seed", opts.seed, "Master seed (entropy if omitted, printed to stderr)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd.add_option("--workers", opts.workers, "Worker threads (default: hardware)");
}

struct IngestOptions {
    std::string input;
    std::string from = "2020-05-20";
    std::string to = "2021-05-20";
    std::string date_column = "date";
    std::string unit_column = "state";
    std::string cases_column = "newCases";
    bool cumulative = false;

    IngestConfig to_config() const {
        IngestConfig cfg;
        cfg.path = input;
        cfg.start_date = parse_date(from);
        cfg.end_date = parse_date(to);
        cfg.date_column = date_column;
        cfg.unit_column = unit_column;
        cfg.cases_column = cases_column;
        cfg.cases_semantics =
            cumulative ? CasesSemantics::cumulative_total : CasesSemantics::daily_new;
        return cfg;
    }
};

void add_ingest_options(CLI::App& cmd, IngestOptions& opts) {
    cmd.add_option("--input", opts.input, "Per-state incidence CSV")->required();
    cmd.add_option("--from", opts.from, "Start date (YYYY-MM-DD)")->capture_default_str();
    cmd.add_option("--to", opts.to, "End date (YYYY-MM-DD)")->capture_default_str();
    cmd.add_option("--date-column", opts.date_column, "Date column name")->capture_default_str();
    cmd.add_option("--unit-column", opts.unit_column, "State column name")->capture_default_str();
    cmd.add_option("--cases-column", opts.cases_column, "Cases column name")
        ->capture_default_str();
    cmd.add_flag("--cumulative", opts.cumulative,
                 "Cases column holds cumulative totals (first differences are taken)");
}

struct EstimationOptions {
    int tau = 7;
    double prior_shape = 1.0;
    double prior_scale = 5.0;
    double gi_mean = 6.5;
    double gi_cv = 0.62;
    double gi_tail_eps = 1e-4;
    double mass = 0.95;

    EstimationConfig to_config() const {
        EstimationConfig cfg;
        cfg.window_tau = tau;
        cfg.prior = GammaParams{prior_shape, prior_scale};
        cfg.credible_mass = mass;
        cfg.validate();
        return cfg;
    }

    GenerationInterval to_interval() const {
        return discretize_generation_interval(gi_mean, gi_cv, gi_tail_eps);
    }
};

void add_estimation_options(CLI::App& cmd, EstimationOptions& opts) {
    cmd.add_option("--tau", opts.tau, "Sliding window length in days")->capture_default_str();
    cmd.add_option("--prior-shape", opts.prior_shape, "Gamma prior shape")->capture_default_str();
    cmd.add_option("--prior-scale", opts.prior_scale, "Gamma prior scale")->capture_default_str();
    cmd.add_option("--gi-mean", opts.gi_mean, "Generation interval mean (days)")
        ->capture_default_str();
    cmd.add_option("--gi-cv", opts.gi_cv, "Generation interval coefficient of variation")
        ->capture_default_str();
    cmd.add_option("--gi-tail-eps", opts.gi_tail_eps, "Discretization tail cutoff")
        ->capture_default_str();
    cmd.add_option("--mass", opts.mass, "Credible interval mass")->capture_default_str();
}

struct LoadedData {
    std::vector<IncidenceSeries> states;
    AggregateResult aggregated;
    SanitationReport report;

    const IncidenceSeries* find(const GeoUnit& unit) const {
        if (unit.kind() == GeoKind::country) return &aggregated.country;
        if (unit.kind() == GeoKind::region) {
            for (const auto& s : aggregated.regions) {
                if (s.unit == unit) return &s;
            }
            return nullptr;
        }
        for (const auto& s : states) {
            if (s.unit == unit) return &s;
        }
        return nullptr;
    }

    std::vector<GeoUnit> all_units() const {
        std::vector<GeoUnit> units;
        units.push_back(GeoUnit::country());
        for (const auto& r : aggregated.regions) units.push_back(r.unit);
        for (const auto& s : states) units.push_back(s.unit);
        std::sort(units.begin(), units.end(), canonical_less);
        return units;
    }
};

LoadedData load(const IngestOptions& opts) {
    auto parsed = parse_csv(opts.to_config());
    if (parsed.states.empty()) {
        throw std::runtime_error("input has no rows for any state in the requested window");
    }
    auto aggregated = aggregate(parsed.states, brazil_region_map());
    std::cerr << "parse: " << parsed.states.size() << " states, "
              << parsed.report.rows_ignored << " rows ignored, "
              << parsed.report.row_errors.size() << " rows failed, "
              << parsed.report.modified_cells() << " cells repaired\n";
    return LoadedData{std::move(parsed.states), std::move(aggregated),
                      std::move(parsed.report)};
}

void write_sanitation_if_dirty(const LoadedData& data, OutputSet& outputs) {
    if (data.report.entries.empty()) return;
    auto path = outputs.reserve("sanitation.csv");
    write_sanitation_report(data.report, path);
    std::cerr << "sanitation: " << data.report.modified_cells() << " repairs -> " << path << "\n";
}

std::vector<GeoUnit> select_units(const std::vector<std::string>& specs, const LoadedData& data,
                                  bool include_country_by_default) {
    std::vector<GeoUnit> units;
    if (specs.empty()) {
        units = data.all_units();
        if (!include_country_by_default) {
            std::erase_if(units, [](const GeoUnit& u) { return u.kind() == GeoKind::country; });
        }
    } else {
        units = parse_units(specs);
    }
    for (const auto& u : units) {
        if (data.find(u) == nullptr) {
            throw std::runtime_error("no data for unit '" + u.label() + "'");
        }
    }
    return units;
}

ChartSeries chart_series_for(const RtSeries& rt) {
    ChartSeries series;
    series.name = rt.unit.label();
    bool any_settled = false;
    for (const auto& p : rt.points) {
        if (!p.burn_in) {
            any_settled = true;
            break;
        }
    }
    for (std::size_t i = 0; i < rt.size(); ++i) {
        if (any_settled && rt.points[i].burn_in) continue;
        series.dates.push_back(rt.date_at(i));
        series.values.push_back(rt.points[i].mean);
        series.lower.push_back(rt.points[i].lower);
        series.upper.push_back(rt.points[i].upper);
    }
    return series;
}

int cmd_estimate(const IngestOptions& ingest, const EstimationOptions& est,
                 CommonOptions& common, const std::vector<std::string>& unit_specs) {
    common.resolve_seed();  // no randomness here; kept for interface uniformity
    auto data = load(ingest);
    auto units = select_units(unit_specs, data, true);
    auto gi = est.to_interval();
    auto cfg = est.to_config();

    std::vector<RtSeries> results;
    results.reserve(units.size());
    for (const auto& u : units) {
        results.push_back(RtSeries{u, Date{}, {}});
    }
    parallel_for(units.size(), common.resolve_workers(), [&](std::size_t i) {
        results[i] = estimate_series(*data.find(units[i]), gi, cfg);
    });

    OutputSet outputs{common.out_dir};
    write_sanitation_if_dirty(data, outputs);
    for (const auto& rt : results) {
        auto table_path = outputs.reserve("rt_" + rt.unit.label() + ".csv");
        emit_rt_table(rt, table_path);
        auto chart_path = outputs.reserve("rt_" + rt.unit.label() + ".svg");
        emit_chart({chart_series_for(rt)}, chart_path);
        std::cerr << "estimate: " << rt.unit.label() << " -> " << table_path << "\n";
    }
    outputs.commit();
    return 0;
}

int cmd_correlate(const IngestOptions& ingest, const EstimationOptions& est,
                  CommonOptions& common, const std::vector<std::string>& unit_specs,
                  std::size_t samples, int ma_window) {
    if (samples == 0) {
        throw std::invalid_argument("correlate: --samples must be >= 1");
    }
    const auto master_seed = common.resolve_seed();
    auto data = load(ingest);
    auto units = select_units(unit_specs, data, false);
    auto gi = est.to_interval();
    auto cfg = est.to_config();

    const auto& country = data.aggregated.country;
    auto country_rt = estimate_series(country, gi, cfg);
    auto country_ma_points = to_points(moving_average(country, ma_window));

    std::vector<ComparisonRow> rows;
    rows.reserve(units.size());
    for (const auto& u : units) {
        rows.push_back(ComparisonRow{u, std::nullopt, std::nullopt, std::nullopt, std::nullopt, ""});
    }
    parallel_for(units.size(), common.resolve_workers(), [&](std::size_t i) {
        const auto& unit = units[i];
        ComparisonRow row{unit, std::nullopt, std::nullopt, std::nullopt, std::nullopt, ""};
        std::string ma_note;
        std::string rt_note;
        try {
            auto ma_points = to_points(moving_average(*data.find(unit), ma_window));
            auto [x, y] = align_by_date(ma_points, country_ma_points);
            if (x.size() < 2) throw std::invalid_argument("fewer than two overlapping dates");
            row.r_ma = pearson(x, y);
        } catch (const std::exception& e) {
            ma_note = e.what();
        }
        try {
            auto unit_rt = estimate_series(*data.find(unit), gi, cfg);
            auto rng = make_stream(derive_seed(master_seed, i));
            auto ci = correlation_credible_interval(unit_rt, country_rt, samples,
                                                    cfg.credible_mass, rng);
            row.r_rt = ci.r;
            row.rt_lower = ci.lower;
            row.rt_upper = ci.upper;
        } catch (const std::exception& e) {
            rt_note = e.what();
        }
        if (!ma_note.empty()) row.note += "ma: " + ma_note;
        if (!rt_note.empty()) {
            if (!row.note.empty()) row.note += "; ";
            row.note += "rt: " + rt_note;
        }
        rows[i] = std::move(row);
    });

    OutputSet outputs{common.out_dir};
    write_sanitation_if_dirty(data, outputs);
    auto path = outputs.reserve("correlations.csv");
    emit_correlation_comparison(rows, path);
    std::cerr << "correlate: " << rows.size() << " units -> " << path << "\n";
    outputs.commit();
    return 0;
}

int cmd_simulate(const std::string& profile_text, const std::string& seeds_text,
                 const EstimationOptions& est, CommonOptions& common, bool with_estimate,
                 const std::string& start_text) {
    const auto master_seed = common.resolve_seed();
    auto profile = expand_profile(parse_profile(profile_text).segments);
    auto seed_cases = parse_seeds(seeds_text);
    if (seed_cases.size() > profile.size()) {
        throw std::invalid_argument("seed prefix is longer than the profile horizon");
    }
    auto gi = est.to_interval();
    auto rng = make_stream(master_seed);
    auto start = parse_date(start_text);
    auto sim = simulate(profile, gi, seed_cases, profile.size(), rng, GeoUnit::country(), start);

    OutputSet outputs{common.out_dir};
    auto incidence_path = outputs.reserve("sim_incidence.csv");
    {
        std::ofstream out(incidence_path);
        if (!out) throw std::runtime_error("cannot write '" + incidence_path + "'");
        out << "date,cases,r_true\n";
        for (std::size_t i = 0; i < sim.size(); ++i) {
            out << format_date(sim.date_at(i)) << ',' << sim.counts[i] << ','
                << format_double(profile[i]) << '\n';
        }
    }
    std::cerr << "simulate: " << sim.size() << " days -> " << incidence_path << "\n";

    if (with_estimate) {
        auto rt = estimate_series(sim, gi, est.to_config());
        auto rt_path = outputs.reserve("sim_rt.csv");
        emit_rt_table(rt, rt_path);
        std::cerr << "simulate: estimate -> " << rt_path << "\n";
    }
    outputs.commit();
    return 0;
}

int cmd_report(const IngestOptions& ingest, CommonOptions& common,
               const std::string& population_path) {
    auto data = load(ingest);
    std::optional<std::map<std::string, std::int64_t>> population;
    if (!population_path.empty()) {
        population = read_population_file(population_path);
    }
    auto rows = relative_share_report(data.states, population);

    OutputSet outputs{common.out_dir};
    write_sanitation_if_dirty(data, outputs);
    auto path = outputs.reserve("shares.csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "state,case_share,population_share\n";
    for (const auto& row : rows) {
        out << row.state << ',' << format_double(row.case_share) << ',';
        if (row.pop_share) out << format_double(*row.pop_share);
        out << '\n';
    }
    out.close();
    std::cerr << "report: " << rows.size() << " states -> " << path << "\n";
    outputs.commit();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reproduction-number estimation from daily incidence data"};
    app.require_subcommand(1);

    IngestOptions ingest;
    EstimationOptions est;
    CommonOptions common;
    std::vector<std::string> unit_specs;
    std::size_t samples = 1000;
    int ma_window = 7;
    std::string profile_text;
    std::string seeds_text = "100x5";
    std::string sim_start = "2020-01-01";
    bool with_estimate = false;
    std::string population_path;

    auto* estimate = app.add_subcommand("estimate", "Estimate R(t) per geographic unit");
    add_ingest_options(*estimate, ingest);
    add_estimation_options(*estimate, est);
    add_common_options(*estimate, common);
    estimate->add_option("--units", unit_specs,
                         "Units (BR, state codes, N/NE/S/SE/CO or region:CODE; default: all)")
        ->delimiter(',');

    auto* correlate = app.add_subcommand("correlate",
                                         "Correlate each unit against the national series");
    add_ingest_options(*correlate, ingest);
    add_estimation_options(*correlate, est);
    add_common_options(*correlate, common);
    correlate->add_option("--units", unit_specs, "Units to correlate (default: all but BR)")
        ->delimiter(',');
    correlate->add_option("--samples", samples, "Trajectory pairs per credible interval")
        ->capture_default_str();
    correlate->add_option("--ma-window", ma_window, "Moving average window (days)")
        ->capture_default_str();

    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a renewal-process epidemic");
    simulate_cmd->add_option("--profile", profile_text, "Piecewise R, e.g. 2.0x60,0.7x120")
        ->required();
    simulate_cmd->add_option("--seeds", seeds_text, "Seed prefix, e.g. 100x5")
        ->capture_default_str();
    simulate_cmd->add_option("--start-date", sim_start, "Date of the first simulated day")
        ->capture_default_str();
    simulate_cmd->add_flag("--estimate", with_estimate, "Also estimate R(t) from the output");
    add_estimation_options(*simulate_cmd, est);
    add_common_options(*simulate_cmd, common);

    auto* report = app.add_subcommand("report", "Relative case and population shares per state");
    add_ingest_options(*report, ingest);
    add_common_options(*report, common);
    report->add_option("--population", population_path,
                       "Population CSV (state_code,population) for population shares");

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) return cmd_estimate(ingest, est, common, unit_specs);
        if (correlate->parsed()) {
            return cmd_correlate(ingest, est, common, unit_specs, samples, ma_window);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(profile_text, seeds_text, est, common, with_estimate, sim_start);
        }
        if (report->parsed()) return cmd_report(ingest, common, population_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
