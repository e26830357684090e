#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "epirt/core.hpp"
#include "epirt/estimator.hpp"
#include "epirt/rng.hpp"

namespace epirt {

class UndefinedCorrelation : public std::runtime_error {
public:
    explicit UndefinedCorrelation(const std::string& what) : std::runtime_error(what) {}
};

// Trailing moving average over the preceding `window` days, first value at
// day window-1. Integer rolling sums, so there is no accumulation drift.
inline DatedSeries moving_average(const IncidenceSeries& series, int window) {
    if (window < 1) {
        throw std::invalid_argument("moving_average: window must be >= 1");
    }
    const auto w = static_cast<std::size_t>(window);
    if (series.size() < w) {
        throw std::invalid_argument("moving_average: series shorter than the window");
    }
    DatedSeries out{series.unit, series.start_date + Days{window - 1}, {}};
    out.values.reserve(series.size() - w + 1);
    std::int64_t rolling = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        rolling += series.counts[i];
        if (i + 1 > w) rolling -= series.counts[i - w];
        if (i + 1 >= w) {
            out.values.push_back(static_cast<double>(rolling) / static_cast<double>(window));
        }
    }
    return out;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("pearson: length mismatch");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw std::invalid_argument("pearson: need at least two points");
    }
    // Constant inputs are checked for directly: the sxx/syy test below can
    // miss them, because the mean of n identical doubles is not always that
    // value, which would turn pure rounding noise into a "correlation".
    const bool x_constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const bool y_constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (x_constant || y_constant) {
        throw UndefinedCorrelation("pearson: zero-variance input");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedCorrelation("pearson: zero-variance input");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct DatedPoint {
    Date date;
    double value;
};

inline std::vector<DatedPoint> to_points(const DatedSeries& series) {
    std::vector<DatedPoint> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.push_back({series.date_at(i), series.values[i]});
    }
    return out;
}

// Posterior means on settled days only. Burn-in days can recur mid-series
// when incidence dies out and restarts, so the result is a date/value list
// rather than a contiguous daily series.
inline std::vector<DatedPoint> rt_mean_points(const RtSeries& rt) {
    std::vector<DatedPoint> out;
    out.reserve(rt.size());
    for (std::size_t i = 0; i < rt.size(); ++i) {
        if (!rt.points[i].burn_in) {
            out.push_back({rt.date_at(i), rt.points[i].mean});
        }
    }
    return out;
}

// Values of both lists on their common dates, in date order. Inputs must be
// date-sorted, which every producer in this library guarantees.
inline std::pair<std::vector<double>, std::vector<double>> align_by_date(
    std::span<const DatedPoint> a, std::span<const DatedPoint> b) {
    std::pair<std::vector<double>, std::vector<double>> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].date < b[j].date) {
            ++i;
        } else if (b[j].date < a[i].date) {
            ++j;
        } else {
            out.first.push_back(a[i].value);
            out.second.push_back(b[j].value);
            ++i;
            ++j;
        }
    }
    return out;
}

struct CorrelationRow {
    GeoUnit unit;
    std::optional<double> r;
    std::optional<double> lower;
    std::optional<double> upper;
    std::string note;  // set when r is undefined
};

// Pearson correlation of each unit's indicator against the reference over
// their shared dates. Per-unit failures become annotated rows instead of
// aborting the batch.
inline std::vector<CorrelationRow> correlate_vs_reference(
    const std::vector<std::pair<GeoUnit, std::vector<DatedPoint>>>& indicators,
    std::span<const DatedPoint> reference) {
    std::vector<CorrelationRow> rows;
    rows.reserve(indicators.size());
    for (const auto& [unit, points] : indicators) {
        CorrelationRow row{unit, std::nullopt, std::nullopt, std::nullopt, ""};
        try {
            auto [x, y] = align_by_date(points, reference);
            if (x.size() < 2) {
                throw std::invalid_argument("fewer than two overlapping dates");
            }
            row.r = pearson(x, y);
        } catch (const std::exception& e) {
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

// Linear-interpolation empirical quantile on a sorted sample.
inline double empirical_quantile(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

struct CorrelationInterval {
    double r;      // pearson of the posterior means
    double lower;  // quantile band of pearson over sampled trajectory pairs
    double upper;
};

// Point correlation of two posterior-mean series plus a credible interval
// from n_samples independently sampled trajectory pairs.
inline CorrelationInterval correlation_credible_interval(const RtSeries& unit_rt,
                                                         const RtSeries& ref_rt,
                                                         std::size_t n_samples, double mass,
                                                         RngStream& rng) {
    if (n_samples < 1) {
        throw std::invalid_argument("correlation_credible_interval: need n_samples >= 1");
    }
    if (!(mass > 0.0 && mass < 1.0)) {
        throw std::invalid_argument("correlation_credible_interval: mass must lie in (0,1)");
    }
    auto unit_means = rt_mean_points(unit_rt);
    auto ref_means = rt_mean_points(ref_rt);
    auto [mx, my] = align_by_date(unit_means, ref_means);
    if (mx.size() < 2) {
        throw std::invalid_argument("correlation_credible_interval: fewer than two shared dates");
    }
    const double point = pearson(mx, my);

    auto unit_traj = sample_trajectories(unit_rt, n_samples, rng);
    auto ref_traj = sample_trajectories(ref_rt, n_samples, rng);

    // Shared-date index pairs between the two trajectory grids.
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < unit_traj.dates.size() && j < ref_traj.dates.size()) {
        if (unit_traj.dates[i] < ref_traj.dates[j]) {
            ++i;
        } else if (ref_traj.dates[j] < unit_traj.dates[i]) {
            ++j;
        } else {
            shared.emplace_back(i, j);
            ++i;
            ++j;
        }
    }

    std::vector<double> sampled;
    sampled.reserve(n_samples);
    std::vector<double> x(shared.size());
    std::vector<double> y(shared.size());
    for (std::size_t p = 0; p < n_samples; ++p) {
        for (std::size_t k = 0; k < shared.size(); ++k) {
            x[k] = unit_traj.paths[p][shared[k].first];
            y[k] = ref_traj.paths[p][shared[k].second];
        }
        sampled.push_back(pearson(x, y));
    }
    std::sort(sampled.begin(), sampled.end());
    const double q_low = (1.0 - mass) / 2.0;
    return CorrelationInterval{point, detail::empirical_quantile(sampled, q_low),
                               detail::empirical_quantile(sampled, 1.0 - q_low)};
}

}  // namespace epirt
