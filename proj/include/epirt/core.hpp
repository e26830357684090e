#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epirt/dates.hpp"
#include "epirt/gamma.hpp"

namespace epirt {

// The 27 Brazilian federative units (26 states plus the DF), two-letter codes.
inline const std::array<std::string_view, 27>& state_codes() {
    static const std::array<std::string_view, 27> codes = {
        "AC", "AL", "AM", "AP", "BA", "CE", "DF", "ES", "GO", "MA", "MG", "MS", "MT", "PA",
        "PB", "PE", "PI", "PR", "RJ", "RN", "RO", "RR", "RS", "SC", "SE", "SP", "TO"};
    return codes;
}

inline const std::array<std::string_view, 5>& region_codes() {
    static const std::array<std::string_view, 5> codes = {"N", "NE", "S", "SE", "CO"};
    return codes;
}

inline bool is_state_code(std::string_view code) {
    const auto& s = state_codes();
    return std::find(s.begin(), s.end(), code) != s.end();
}

inline bool is_region_code(std::string_view code) {
    const auto& r = region_codes();
    return std::find(r.begin(), r.end(), code) != r.end();
}

enum class GeoKind { country, region, state };

// A geographic unit: the country, one of the five macro-regions, or one of
// the 27 federative units. Region "SE" (Southeast) and state "SE" (Sergipe)
// share a code, so the kind is part of the identity.
class GeoUnit {
public:
    static GeoUnit country() { return GeoUnit{GeoKind::country, "BR"}; }

    static GeoUnit region(std::string_view code) {
        if (!is_region_code(code)) {
            throw std::invalid_argument("GeoUnit: unknown region code '" + std::string(code) + "'");
        }
        return GeoUnit{GeoKind::region, std::string(code)};
    }

    static GeoUnit state(std::string_view code) {
        if (!is_state_code(code)) {
            throw std::invalid_argument("GeoUnit: unknown state code '" + std::string(code) + "'");
        }
        return GeoUnit{GeoKind::state, std::string(code)};
    }

    GeoKind kind() const { return kind_; }
    const std::string& code() const { return code_; }

    // Unambiguous text form used in file names and tables.
    std::string label() const {
        return kind_ == GeoKind::region ? "region_" + code_ : code_;
    }

    friend bool operator==(const GeoUnit& a, const GeoUnit& b) {
        return a.kind_ == b.kind_ && a.code_ == b.code_;
    }
    friend bool operator!=(const GeoUnit& a, const GeoUnit& b) { return !(a == b); }
    friend bool operator<(const GeoUnit& a, const GeoUnit& b) {
        if (a.code_ != b.code_) return a.code_ < b.code_;
        return a.kind_ < b.kind_;
    }

private:
    GeoUnit(GeoKind kind, std::string code) : kind_(kind), code_(std::move(code)) {}
    GeoKind kind_;
    std::string code_;
};

// Daily reported cases for one unit, one value per consecutive calendar day.
struct IncidenceSeries {
    GeoUnit unit;
    Date start_date;
    std::vector<std::int64_t> counts;

    IncidenceSeries(GeoUnit unit_, Date start, std::vector<std::int64_t> counts_)
        : unit(std::move(unit_)), start_date(start), counts(std::move(counts_)) {
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] < 0) {
                throw std::invalid_argument("IncidenceSeries: negative count at day " +
                                            std::to_string(k) + " (sanitize upstream)");
            }
        }
    }

    std::size_t size() const { return counts.size(); }
    Date date_at(std::size_t i) const { return start_date + Days{static_cast<long>(i)}; }
};

// Discrete generation-interval weights over lags 1..n. weights[j-1] is the
// probability that transmission happens j days after infection.
struct GenerationInterval {
    std::vector<double> weights;

    explicit GenerationInterval(std::vector<double> w) : weights(std::move(w)) {
        if (weights.empty()) {
            throw std::invalid_argument("GenerationInterval: need at least one lag");
        }
        double sum = 0.0;
        for (double x : weights) {
            if (!(x >= 0.0)) {
                throw std::invalid_argument("GenerationInterval: weights must be non-negative");
            }
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument("GenerationInterval: weights must sum to 1, got " +
                                        std::to_string(sum));
        }
    }

    std::size_t max_lag() const { return weights.size(); }
};

// Sliding-window settings for the estimator.
struct EstimationConfig {
    int window_tau = 7;
    GammaParams prior{1.0, 5.0};
    double credible_mass = 0.95;

    void validate() const {
        if (window_tau < 1) {
            throw std::invalid_argument("EstimationConfig: window_tau must be >= 1");
        }
        if (!(credible_mass > 0.0 && credible_mass < 1.0)) {
            throw std::invalid_argument("EstimationConfig: credible_mass must lie in (0,1)");
        }
    }
};

// One posterior summary per day.
struct RtPoint {
    GammaParams posterior;
    double mean;
    double variance;
    double lower;
    double upper;
    bool burn_in;
};

struct RtSeries {
    GeoUnit unit;
    Date start_date;  // date of points[0]
    std::vector<RtPoint> points;

    std::size_t size() const { return points.size(); }
    Date date_at(std::size_t i) const { return start_date + Days{static_cast<long>(i)}; }
};

// Real-valued daily series (moving averages and other derived indicators).
struct DatedSeries {
    GeoUnit unit;
    Date start_date;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    Date date_at(std::size_t i) const { return start_date + Days{static_cast<long>(i)}; }
};

// Unit-day cell masses of a continuous Gamma generation-time distribution
// with the given mean and coefficient of variation. Lag support starts at 1;
// n is the smallest lag whose upper tail drops below tail_eps, and the cell
// masses are renormalized to sum to exactly one.
inline GenerationInterval discretize_generation_interval(double mean, double cv, double tail_eps) {
    if (!(std::isfinite(mean) && mean > 0.0)) {
        throw std::domain_error("discretize_generation_interval: mean must be positive");
    }
    if (!(std::isfinite(cv) && cv > 0.0)) {
        throw std::domain_error("discretize_generation_interval: cv must be positive");
    }
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) {
        throw std::domain_error("discretize_generation_interval: tail_eps must lie in (0,1)");
    }
    GammaParams continuous{1.0 / (cv * cv), mean * cv * cv};
    constexpr std::size_t kMaxLag = 100000;
    std::vector<double> raw;
    double prev_cdf = 0.0;
    for (std::size_t j = 1; j <= kMaxLag; ++j) {
        double cdf = gamma_cdf(static_cast<double>(j), continuous);
        raw.push_back(cdf - prev_cdf);
        prev_cdf = cdf;
        if (1.0 - cdf < tail_eps) break;
    }
    if (1.0 - prev_cdf >= tail_eps) {
        throw std::runtime_error("discretize_generation_interval: tail did not close");
    }
    double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (double& w : raw) w /= sum;
    return GenerationInterval{std::move(raw)};
}

}  // namespace epirt
