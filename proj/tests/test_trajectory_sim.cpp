#include <cmath>
#include <vector>

#include <doctest.h>

#include "qjump/errors.hpp"
#include "qjump/trajectory_sim.hpp"

using namespace qjump;

namespace {

TelegraphParams calibrated_params(double pump_per_s) {
    TelegraphParams p;
    p.bright_to_dark_rate = pump_per_s;
    p.dark_to_bright_rate = 1.0 / 1.2;
    p.bright_count_rate = 2000.0;
    p.dark_count_rate = 50.0;
    return p;
}

} // namespace

TEST_CASE("no pumping gives an all-bright trace with Poisson counts") {
    TelegraphParams p = calibrated_params(0.0);
    const CountTrace trace = simulate_trace(p, 2000.0, 1.0, 17);
    REQUIRE(trace.true_jumps.empty());
    REQUIRE(trace.n_bins() == 2000);
    double sum = 0.0;
    for (auto c : trace.counts)
        sum += c;
    const double mean = sum / static_cast<double>(trace.n_bins());
    const double expected = p.bright_count_rate * trace.bin_width_s;
    // 3 sigma of the mean of n Poisson(expected) bins
    const double tol = 3.0 * std::sqrt(expected / static_cast<double>(trace.n_bins()));
    CHECK(std::fabs(mean - expected) < tol);
}

TEST_CASE("identical inputs give bit-identical traces") {
    const TelegraphParams p = calibrated_params(0.05);
    const CountTrace a = simulate_trace(p, 500.0, 0.1, 23, 4);
    const CountTrace b = simulate_trace(p, 500.0, 0.1, 23, 4);
    CHECK(a == b);
    const CountTrace c = simulate_trace(p, 500.0, 0.1, 23, 5);
    CHECK(a != c);
}

TEST_CASE("true jumps increase in time and alternate in direction") {
    const TelegraphParams p = calibrated_params(0.2);
    const CountTrace t = simulate_trace(p, 5000.0, 0.5, 61);
    REQUIRE(t.true_jumps.size() > 100);
    IonState expected = other_state(t.start_state);
    double prev = 0.0;
    for (const auto& j : t.true_jumps) {
        CHECK(j.time_s > prev);
        CHECK(j.time_s < t.duration_s());
        CHECK(j.to == expected);
        prev = j.time_s;
        expected = other_state(expected);
    }
}

TEST_CASE("jump-pair count per hour matches the calibrated rate") {
    // 0.7/min pumping against a 1.2 s recovery: the alternating renewal
    // cycle rate is k1 k2/(k1+k2) = 41.5 pairs per hour.
    const TelegraphParams p = calibrated_params(0.7 / 60.0);
    const int n_trials = 1000;
    double cycles = 0.0, transitions = 0.0;
    for (int k = 0; k < n_trials; ++k) {
        const CountTrace t = simulate_trace(p, 3600.0, 1.0, 2027, static_cast<std::uint64_t>(k));
        cycles += static_cast<double>(count_cycles(t.true_jumps));
        transitions += static_cast<double>(t.true_jumps.size());
    }
    const double mean_pairs = cycles / n_trials;
    CHECK(std::fabs(mean_pairs - 42.0) <= 2.0);

    // total transitions: 2 D k1 k2/(k1+k2) within 3 sigma
    const double k1 = p.bright_to_dark_rate, k2 = p.dark_to_bright_rate;
    const double expected_transitions = 2.0 * 3600.0 * k1 * k2 / (k1 + k2);
    const double sigma =
        std::sqrt(expected_transitions / n_trials); // Poisson-ish per trial
    CHECK(std::fabs(transitions / n_trials - expected_transitions) < 3.0 * sigma);
}

TEST_CASE("dark dwell durations average to the configured mean") {
    // Elevated pumping packs >= 1e4 dwells into a manageable trace.
    const TelegraphParams p = calibrated_params(0.5);
    double total_dark = 0.0;
    std::size_t n_dwells = 0;
    for (std::uint64_t k = 0; k < 4; ++k) {
        const CountTrace t = simulate_trace(p, 20000.0, 1.0, 31, k);
        for (std::size_t i = 0; i + 1 < t.true_jumps.size(); ++i)
            if (t.true_jumps[i].to == IonState::dark) {
                total_dark += t.true_jumps[i + 1].time_s - t.true_jumps[i].time_s;
                ++n_dwells;
            }
    }
    REQUIRE(n_dwells >= 10000);
    const double mean = total_dark / static_cast<double>(n_dwells);
    CHECK(std::fabs(mean - 1.2) < 0.05 * 1.2);
}

TEST_CASE("empirical dark fraction matches the stationary formula") {
    TelegraphParams p = calibrated_params(0.00909);
    const CountTrace t = simulate_trace(p, 100000.0, 1.0, 57);
    double dark_time = 0.0;
    double t_dark_start = -1.0;
    for (const auto& j : t.true_jumps) {
        if (j.to == IonState::dark)
            t_dark_start = j.time_s;
        else if (t_dark_start >= 0.0) {
            dark_time += j.time_s - t_dark_start;
            t_dark_start = -1.0;
        }
    }
    if (t_dark_start >= 0.0)
        dark_time += t.duration_s() - t_dark_start;
    const double empirical = dark_time / t.duration_s();
    const double expected = stationary_dark_fraction(p);
    const auto n_cycles = count_cycles(t.true_jumps);
    // exponential dwell CVs are 1: SE ~ f(1-f) sqrt(2/n)
    const double se =
        expected * (1.0 - expected) * std::sqrt(2.0 / static_cast<double>(n_cycles));
    CHECK(std::fabs(empirical - expected) < 3.0 * se);
}

TEST_CASE("stationary dark fraction formula") {
    TelegraphParams p = calibrated_params(1.0 / 1.2);
    CHECK(stationary_dark_fraction(p) == doctest::Approx(0.5));
    p = calibrated_params(0.00909);
    CHECK(stationary_dark_fraction(p) == doctest::Approx(0.01079).epsilon(1e-3));
    CHECK(std::fabs(stationary_dark_fraction(p) - 0.01079) < 1e-5);
    p = calibrated_params(0.0);
    CHECK(stationary_dark_fraction(p) == 0.0);
}

TEST_CASE("bin means are occupancy-weighted through a jump") {
    // Traces engineered to hold exactly one bright->dark jump inside the
    // single bin; the count there must be Poisson with mean
    // phi r_bright + (1-phi) r_dark.
    TelegraphParams p;
    p.bright_to_dark_rate = 1.0;
    p.dark_to_bright_rate = 1e-9; // essentially absorbing for 1 s
    p.bright_count_rate = 1000.0;
    p.dark_count_rate = 10.0;

    double z_num = 0.0, z_den = 0.0;
    int used = 0;
    for (std::uint64_t k = 0; k < 20000; ++k) {
        const CountTrace t = simulate_trace(p, 1.0, 1.0, 71, k);
        if (t.true_jumps.size() != 1)
            continue;
        const double phi = t.true_jumps[0].time_s; // bin width is 1 s
        const double mu = phi * p.bright_count_rate + (1.0 - phi) * p.dark_count_rate;
        z_num += static_cast<double>(t.counts[0]) - mu;
        z_den += mu; // Poisson variance
        ++used;
    }
    REQUIRE(used > 5000);
    CHECK(std::fabs(z_num) < 3.0 * std::sqrt(z_den));
}

TEST_CASE("invalid telegraph parameters are rejected") {
    TelegraphParams p = calibrated_params(0.1);
    p.dark_to_bright_rate = 0.0; // absorbing dark state
    CHECK_THROWS_AS(simulate_trace(p, 10.0, 0.1, 1), ValidationError);

    p = calibrated_params(0.1);
    p.bright_count_rate = 10.0;
    p.dark_count_rate = 20.0;
    CHECK_THROWS_AS(simulate_trace(p, 10.0, 0.1, 1), ValidationError);

    p = calibrated_params(0.1);
    CHECK_THROWS_AS(simulate_trace(p, 0.05, 0.1, 1), ValidationError);
}

TEST_CASE("configured start state is honored") {
    const TelegraphParams p = calibrated_params(0.05);
    const CountTrace t = simulate_trace(p, 100.0, 0.5, 3, 0, IonState::dark);
    CHECK(t.start_state == IonState::dark);
    REQUIRE(!t.true_jumps.empty());
    CHECK(t.true_jumps.front().to == IonState::bright);
}
