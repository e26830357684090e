#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "epirt/core.hpp"
#include "epirt/gamma.hpp"
#include "epirt/rng.hpp"

namespace epirt {

// Expected infection pressure on day i: the generation-interval-weighted sum
// of past incidence. Days before the series start contribute zero.
inline double total_infectivity(const IncidenceSeries& series, const GenerationInterval& gi,
                                std::size_t i) {
    if (i >= series.size()) {
        throw std::out_of_range("total_infectivity: day index past end of series");
    }
    double lambda = 0.0;
    const std::size_t max_lag = std::min(gi.max_lag(), i);
    for (std::size_t j = 1; j <= max_lag; ++j) {
        lambda += gi.weights[j - 1] * static_cast<double>(series.counts[i - j]);
    }
    return lambda;
}

struct WindowEstimate {
    GammaParams posterior;
    double mean;
    double variance;
    double lower;
    double upper;
    bool burn_in;
};

namespace detail {

inline WindowEstimate summarize_window(const GammaParams& prior, double sum_cases,
                                       double sum_infectivity, double credible_mass,
                                       bool burn_in) {
    const double shape = prior.shape + sum_cases;
    const double rate = 1.0 / prior.scale + sum_infectivity;
    GammaParams posterior{shape, 1.0 / rate};
    const double q_low = (1.0 - credible_mass) / 2.0;
    return WindowEstimate{posterior,
                          posterior.mean(),
                          posterior.variance(),
                          gamma_quantile(q_low, posterior),
                          gamma_quantile(1.0 - q_low, posterior),
                          burn_in};
}

}  // namespace detail

// Posterior for the reproduction number over the window of window_tau days
// ending on day i, under a Gamma prior and Poisson renewal likelihood. The
// estimate is flagged burn-in while the weighted history is still truncated
// (i < max_lag + tau - 1) or when cases appear with zero computed pressure.
inline WindowEstimate estimate_window(const IncidenceSeries& series, const GenerationInterval& gi,
                                      const EstimationConfig& config, std::size_t i) {
    config.validate();
    const auto tau = static_cast<std::size_t>(config.window_tau);
    if (i >= series.size()) {
        throw std::out_of_range("estimate_window: day index past end of series");
    }
    if (i + 1 < tau) {
        throw std::out_of_range("estimate_window: window extends before the series start");
    }
    double sum_cases = 0.0;
    double sum_infectivity = 0.0;
    for (std::size_t j = i + 1 - tau; j <= i; ++j) {
        sum_cases += static_cast<double>(series.counts[j]);
        sum_infectivity += total_infectivity(series, gi, j);
    }
    const bool history_truncated = i < gi.max_lag() + tau - 1;
    const bool unexplained_cases = sum_infectivity == 0.0 && sum_cases > 0.0;
    return detail::summarize_window(config.prior, sum_cases, sum_infectivity,
                                    config.credible_mass, history_truncated || unexplained_cases);
}

// One posterior per day from the first full window to the end of the series.
inline RtSeries estimate_series(const IncidenceSeries& series, const GenerationInterval& gi,
                                const EstimationConfig& config) {
    config.validate();
    const auto tau = static_cast<std::size_t>(config.window_tau);
    if (series.size() < tau) {
        throw std::invalid_argument("estimate_series: series shorter than the window");
    }
    RtSeries out{series.unit, series.start_date + Days{static_cast<long>(tau - 1)}, {}};
    out.points.reserve(series.size() - tau + 1);

    // Infectivities are computed once per day; each point still matches
    // estimate_window bit for bit because the sums run over identical terms.
    std::vector<double> lambdas(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        lambdas[i] = total_infectivity(series, gi, i);
    }
    for (std::size_t i = tau - 1; i < series.size(); ++i) {
        double sum_cases = 0.0;
        double sum_infectivity = 0.0;
        for (std::size_t j = i + 1 - tau; j <= i; ++j) {
            sum_cases += static_cast<double>(series.counts[j]);
            sum_infectivity += lambdas[j];
        }
        const bool history_truncated = i < gi.max_lag() + tau - 1;
        const bool unexplained_cases = sum_infectivity == 0.0 && sum_cases > 0.0;
        auto w = detail::summarize_window(config.prior, sum_cases, sum_infectivity,
                                          config.credible_mass,
                                          history_truncated || unexplained_cases);
        out.points.push_back(RtPoint{w.posterior, w.mean, w.variance, w.lower, w.upper, w.burn_in});
    }
    return out;
}

// Monte Carlo draws from the daily posteriors, restricted to settled days.
struct TrajectorySet {
    std::vector<Date> dates;
    std::vector<std::vector<double>> paths;  // paths[p][d] pairs with dates[d]
};

inline TrajectorySet sample_trajectories(const RtSeries& rt, std::size_t n_paths,
                                         RngStream& rng) {
    TrajectorySet out;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < rt.size(); ++i) {
        if (!rt.points[i].burn_in) {
            kept.push_back(i);
            out.dates.push_back(rt.date_at(i));
        }
    }
    out.paths.resize(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        out.paths[p].reserve(kept.size());
        for (std::size_t idx : kept) {
            out.paths[p].push_back(gamma_sample(rt.points[idx].posterior, rng));
        }
    }
    return out;
}

}  // namespace epirt
