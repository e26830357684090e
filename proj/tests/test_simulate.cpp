#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "epirt/simulate.hpp"
#include "oracles.hpp"

using namespace epirt;

TEST_CASE("poisson_sample rejects bad means and short-circuits zero") {
    auto rng = make_stream(1);
    CHECK_THROWS_AS(poisson_sample(-0.5, rng), std::domain_error);
    CHECK_THROWS_AS(poisson_sample(std::numeric_limits<double>::infinity(), rng),
                    std::domain_error);
    for (int i = 0; i < 10; ++i) CHECK(poisson_sample(0.0, rng) == 0);
}

TEST_CASE("poisson_sample is deterministic per seed") {
    auto a = make_stream(99);
    auto b = make_stream(99);
    for (int i = 0; i < 200; ++i) {
        REQUIRE(poisson_sample(3.7, a) == poisson_sample(3.7, b));
    }
    for (int i = 0; i < 200; ++i) {
        REQUIRE(poisson_sample(250.0, a) == poisson_sample(250.0, b));
    }
}

TEST_CASE("poisson_sample moments, small-mean regime") {
    auto rng = make_stream(42);
    const double mean = 3.0;
    const std::size_t n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto k = poisson_sample(mean, rng);
        REQUIRE(k >= 0);
        sum += static_cast<double>(k);
        sum_sq += static_cast<double>(k) * static_cast<double>(k);
    }
    double m = sum / static_cast<double>(n);
    double v = sum_sq / static_cast<double>(n) - m * m;
    CHECK(m == Catch::Approx(mean).margin(4.0 * std::sqrt(mean / static_cast<double>(n))));
    CHECK(v == Catch::Approx(mean).epsilon(0.03));
}

TEST_CASE("poisson_sample moments, rejection regime") {
    auto rng = make_stream(43);
    const double mean = 180.0;
    const std::size_t n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto k = poisson_sample(mean, rng);
        REQUIRE(k >= 0);
        sum += static_cast<double>(k);
        sum_sq += static_cast<double>(k) * static_cast<double>(k);
    }
    double m = sum / static_cast<double>(n);
    double v = sum_sq / static_cast<double>(n) - m * m;
    CHECK(m == Catch::Approx(mean).margin(4.0 * std::sqrt(mean / static_cast<double>(n))));
    CHECK(v == Catch::Approx(mean).epsilon(0.03));
}

TEST_CASE("poisson_sample tail frequencies near the regime boundary") {
    // Both samplers should put ~2.28 percent of mass at or above mean+2*sd.
    for (double mean : {29.0, 31.0}) {
        auto rng = make_stream(static_cast<std::uint64_t>(mean));
        const std::size_t n = 100000;
        const double cut = mean + 2.0 * std::sqrt(mean);
        std::size_t above = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<double>(poisson_sample(mean, rng)) >= cut) ++above;
        }
        double frac = static_cast<double>(above) / static_cast<double>(n);
        CHECK(frac > 0.012);
        CHECK(frac < 0.035);
    }
}

TEST_CASE("simulate input validation") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    auto rng = make_stream(1);
    std::vector<double> profile(10, 1.0);
    CHECK_THROWS_AS(simulate(profile, gi, {}, 10, rng), std::domain_error);
    CHECK_THROWS_AS(simulate(profile, gi, {5}, 0, rng), std::domain_error);
    CHECK_THROWS_AS(simulate(profile, gi, {5}, 11, rng), std::domain_error);
    CHECK_THROWS_AS(simulate(profile, gi, {-1}, 10, rng), std::domain_error);
    CHECK_THROWS_AS(simulate({1.0, -0.5}, gi, {5}, 2, rng), std::domain_error);
    CHECK_THROWS_AS(simulate(profile, gi, std::vector<std::int64_t>(11, 5), 10, rng),
                    std::domain_error);
}

TEST_CASE("zero reproduction number after the seeds gives a zero tail") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    auto rng = make_stream(8);
    std::vector<double> profile(30, 0.0);
    auto s = simulate(profile, gi, {100, 100, 100}, 30, rng);
    REQUIRE(s.size() == 30);
    CHECK(s.counts[0] == 100);
    CHECK(s.counts[2] == 100);
    for (std::size_t i = 3; i < 30; ++i) CHECK(s.counts[i] == 0);
}

TEST_CASE("seed prefix is copied verbatim") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    auto rng = make_stream(8);
    std::vector<std::int64_t> seeds = {3, 1, 4, 1, 5, 9, 2, 6};
    auto s = simulate(std::vector<double>(20, 1.2), gi, seeds, 20, rng);
    for (std::size_t i = 0; i < seeds.size(); ++i) CHECK(s.counts[i] == seeds[i]);
}

TEST_CASE("unit reproduction number preserves the incidence level") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    const std::size_t n_seed = gi.max_lag();
    const std::size_t horizon = n_seed + 60;
    std::vector<double> profile(horizon, 1.0);
    std::vector<std::int64_t> seeds(n_seed, 10000);

    double acc = 0.0;
    std::size_t days = 0;
    for (unsigned rep = 0; rep < 200; ++rep) {
        auto rng = make_stream(derive_seed(777, rep));
        auto s = simulate(profile, gi, seeds, horizon, rng);
        for (std::size_t i = n_seed; i < horizon; ++i) {
            acc += static_cast<double>(s.counts[i]);
            ++days;
        }
    }
    double level = acc / static_cast<double>(days);
    CHECK(level == Catch::Approx(10000.0).epsilon(0.05));
}

TEST_CASE("one-step conditional mean recovers the reproduction number") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    const double r = 1.3;
    std::vector<std::int64_t> seeds(40, 500);
    std::vector<double> profile(41, r);
    // Fixed 40-day history: Lambda on day 40 is deterministic.
    double lambda = 0.0;
    for (std::size_t j = 1; j <= gi.max_lag(); ++j) lambda += gi.weights[j - 1] * 500.0;

    double acc = 0.0;
    const unsigned reps = 10000;
    for (unsigned rep = 0; rep < reps; ++rep) {
        auto rng = make_stream(derive_seed(555, rep));
        auto s = simulate(profile, gi, seeds, 41, rng);
        acc += static_cast<double>(s.counts[40]) / lambda;
    }
    CHECK(acc / static_cast<double>(reps) == Catch::Approx(r).epsilon(0.02));
}

TEST_CASE("different seeds decorrelate the innovations") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    const std::size_t n_seed = gi.max_lag();
    const std::size_t horizon = n_seed + 400;
    std::vector<double> profile(horizon, 1.0);
    std::vector<std::int64_t> seeds(n_seed, 300);

    auto innovations = [&](std::uint64_t seed) {
        auto rng = make_stream(seed);
        auto s = simulate(profile, gi, seeds, horizon, rng);
        std::vector<double> f;
        for (std::size_t i = n_seed; i < horizon; ++i) {
            double lambda = 0.0;
            for (std::size_t j = 1; j <= std::min(gi.max_lag(), i); ++j) {
                lambda += gi.weights[j - 1] * static_cast<double>(s.counts[i - j]);
            }
            f.push_back(static_cast<double>(s.counts[i]) - lambda);
        }
        return f;
    };
    auto f1 = innovations(1);
    auto f2 = innovations(2);
    double corr = oracle::pearson_textbook(f1, f2);
    CHECK(std::abs(corr) < 0.1);

    auto f1_again = innovations(1);
    for (std::size_t i = 0; i < f1.size(); ++i) REQUIRE(f1[i] == f1_again[i]);
}

TEST_CASE("golden incidence vector, seed 7, constant R 1.5") {
    auto gi = discretize_generation_interval(6.5, 0.62, 1e-4);
    auto rng = make_stream(7);
    auto s = simulate(std::vector<double>(40, 1.5), gi, {10, 10, 10, 10, 10}, 40, rng);
    const std::vector<std::int64_t> golden = {
        10, 10, 10, 10, 10, 5,  14, 3,  7,  11, 10, 8,  11, 9,  12, 5,  13, 12, 17, 20,
        16, 15, 28, 20, 21, 23, 29, 29, 31, 34, 33, 43, 56, 37, 41, 50, 52, 51, 53, 59};
    REQUIRE(s.size() == golden.size());
    for (std::size_t i = 0; i < golden.size(); ++i) {
        INFO("day " << i);
        CHECK(s.counts[i] == golden[i]);
    }
}
