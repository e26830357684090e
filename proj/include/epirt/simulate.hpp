#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "epirt/core.hpp"
#include "epirt/gamma.hpp"
#include "epirt/rng.hpp"

namespace epirt {

namespace detail {

// Sequential-search inversion; cost grows with the mean, so only used below
// the rejection threshold.
template <class Rng>
std::int64_t poisson_inversion(double mean, Rng& rng) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double prod = uniform_double(rng);
    while (prod > limit) {
        prod *= uniform_double(rng);
        ++k;
    }
    return k;
}

// Transformed rejection with squeeze (Hormann's PTRS) for large means.
template <class Rng>
std::int64_t poisson_ptrs(double mean, Rng& rng) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform_double(rng) - 0.5;
        const double v = uniform_double(rng);
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::int64_t>(kf);
        }
        if (kf < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = kf * log_mean - mean - log_gamma(kf + 1.0);
        if (lhs <= rhs) {
            return static_cast<std::int64_t>(kf);
        }
    }
}

}  // namespace detail

template <class Rng>
std::int64_t poisson_sample(double mean, Rng& rng) {
    if (!(std::isfinite(mean) && mean >= 0.0)) {
        throw std::domain_error("poisson_sample: mean must be finite and non-negative");
    }
    if (mean == 0.0) return 0;
    if (mean < 30.0) return detail::poisson_inversion(mean, rng);
    return detail::poisson_ptrs(mean, rng);
}

// Stochastic renewal process: the seed prefix is copied verbatim, then each
// day draws I_i ~ Poisson(r_profile[i] * Lambda_i) from the history generated
// so far. An all-zero tail (extinction) is a valid outcome.
template <class Rng>
IncidenceSeries simulate(const std::vector<double>& r_profile, const GenerationInterval& gi,
                         const std::vector<std::int64_t>& seed_cases, std::size_t days, Rng& rng,
                         GeoUnit unit = GeoUnit::country(), Date start = make_date(2020, 1, 1)) {
    if (days == 0) {
        throw std::domain_error("simulate: days must be positive");
    }
    if (r_profile.size() < days) {
        throw std::domain_error("simulate: r_profile shorter than the requested horizon");
    }
    if (seed_cases.empty()) {
        throw std::domain_error("simulate: seed_cases must be non-empty");
    }
    if (seed_cases.size() > days) {
        throw std::domain_error("simulate: seed prefix longer than the requested horizon");
    }
    for (double r : r_profile) {
        if (!(std::isfinite(r) && r >= 0.0)) {
            throw std::domain_error("simulate: r_profile values must be non-negative");
        }
    }
    for (std::int64_t c : seed_cases) {
        if (c < 0) {
            throw std::domain_error("simulate: seed_cases must be non-negative");
        }
    }

    std::vector<std::int64_t> counts(seed_cases.begin(), seed_cases.end());
    counts.reserve(days);
    for (std::size_t i = seed_cases.size(); i < days; ++i) {
        double lambda = 0.0;
        const std::size_t max_lag = std::min(gi.max_lag(), i);
        for (std::size_t j = 1; j <= max_lag; ++j) {
            lambda += gi.weights[j - 1] * static_cast<double>(counts[i - j]);
        }
        counts.push_back(poisson_sample(r_profile[i] * lambda, rng));
    }
    return IncidenceSeries{std::move(unit), start, std::move(counts)};
}

// Expands a stepwise profile ("value for so-many days" segments) into one R
// value per day.
struct ProfileSegment {
    double r;
    std::size_t days;
};

inline std::vector<double> expand_profile(const std::vector<ProfileSegment>& segments) {
    std::vector<double> out;
    for (const auto& seg : segments) {
        if (!(std::isfinite(seg.r) && seg.r >= 0.0)) {
            throw std::domain_error("expand_profile: segment R must be non-negative");
        }
        if (seg.days == 0) {
            throw std::domain_error("expand_profile: segment length must be positive");
        }
        out.insert(out.end(), seg.days, seg.r);
    }
    if (out.empty()) {
        throw std::domain_error("expand_profile: profile must have at least one segment");
    }
    return out;
}

}  // namespace epirt
