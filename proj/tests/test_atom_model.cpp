#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "qjump/atom_model.hpp"
#include "qjump/errors.hpp"
#include "qjump/rng.hpp"

using namespace qjump;

namespace {

// Brute-force oracle: RK4 on dp/dt = Q p until the slowest rate has turned
// over 100 times.
std::vector<double> integrate_to_stationarity(const RateMatrix& q,
                                              std::vector<double> p) {
    const std::size_t n = q.size();
    double max_diag = 0.0, min_rate = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        max_diag = std::max(max_diag, std::fabs(q.entry(i, i)));
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && q.entry(i, j) > 0.0)
                min_rate = std::min(min_rate, q.entry(i, j));
    }
    const double t_end = 100.0 / min_rate;
    const double dt = 0.02 / max_diag;
    const auto deriv = [&](const std::vector<double>& v) {
        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[i] += q.entry(i, j) * v[j];
        return d;
    };
    std::vector<double> k1, k2, k3, k4, tmp(n);
    const auto steps = static_cast<std::size_t>(t_end / dt) + 1;
    for (std::size_t s = 0; s < steps; ++s) {
        k1 = deriv(p);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = p[i] + 0.5 * dt * k1[i];
        k2 = deriv(tmp);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = p[i] + 0.5 * dt * k2[i];
        k3 = deriv(tmp);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = p[i] + dt * k3[i];
        k4 = deriv(tmp);
        for (std::size_t i = 0; i < n; ++i)
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return p;
}

} // namespace

TEST_CASE("symmetric two-level coupling splits the population evenly") {
    RateMatrix q(kNumLevels);
    q.set_rate(0, 1, 2.5); // S12 <-> P12, equal up/down
    q.set_rate(1, 0, 2.5);
    const LevelSet p = steady_state_populations(q);
    CHECK(p[Level::S12] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[Level::P12] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[Level::D32] == 0.0);
    CHECK(p[Level::P32] == 0.0);
    CHECK(p[Level::D52] == 0.0);
}

TEST_CASE("shipped calibration puts 0.60 of the population in D32") {
    const LevelSet p = steady_state_populations(default_calibration_matrix());
    CHECK(std::fabs(p[Level::D32] - 0.60) <= 0.01);
    CHECK(p[Level::P32] == 0.0);
    CHECK(p[Level::D52] == 0.0);
}

TEST_CASE("stationary vector matches long-time integration on random systems") {
    CounterRng rng(101, 0);
    for (int trial = 0; trial < 20; ++trial) {
        CAPTURE(trial);
        RateMatrix q(3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j)
                    q.set_rate(i, j, 0.1 + 1.9 * rng.uniform());
        const auto stat = stationary_distribution(q);
        const auto integ = integrate_to_stationarity(q, {1.0, 0.0, 0.0});
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::fabs(stat[i] - integ[i]) < 1e-6);
    }
}

TEST_CASE("applying the generator to the stationary vector gives zero") {
    const RateMatrix q = default_calibration_matrix();
    const auto p = stationary_distribution(q);
    double max_rate = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            max_rate = std::max(max_rate, std::fabs(q.entry(i, j)));
    for (std::size_t i = 0; i < q.size(); ++i) {
        double flow = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j)
            flow += q.entry(i, j) * p[j];
        CHECK(std::fabs(flow) < 1e-9 * max_rate);
    }
}

TEST_CASE("rescaling all rates leaves the stationary state unchanged") {
    CounterRng rng(55, 0);
    RateMatrix a(3), b(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) {
                const double r = 0.2 + rng.uniform();
                a.set_rate(i, j, r);
                b.set_rate(i, j, 137.0 * r);
            }
    const auto pa = stationary_distribution(a);
    const auto pb = stationary_distribution(b);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::fabs(pa[i] - pb[i]) < 1e-10);
}

TEST_CASE("negative rates are rejected at construction") {
    RateMatrix q(3);
    CHECK_THROWS_AS(q.set_rate(0, 1, -1.0), ValidationError);
}

TEST_CASE("disconnected coupled blocks have no unique stationary state") {
    RateMatrix q(kNumLevels);
    q.set_rate(0, 1, 1.0);
    q.set_rate(1, 0, 2.0);
    q.set_rate(3, 4, 0.5); // separate P32 <-> D52 block
    q.set_rate(4, 3, 0.5);
    CHECK_THROWS_AS(steady_state_populations(q), DegenerateDynamicsError);
}

TEST_CASE("absorption profile adds natural width and Zeeman broadening") {
    const LineProfile p36 = absorption_profile(25.0, 11.0);
    CHECK(p36.fwhm == doctest::Approx(36.0));
    CHECK(p36.peak == doctest::Approx(1.0));
    CHECK(p36.center == 0.0);

    const LineProfile p25 = absorption_profile(25.0, 0.0);
    CHECK(p25.fwhm == doctest::Approx(25.0));

    // half maximum at +- fwhm/2, by definition
    CHECK(p36.value(18.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p36.value(-18.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p25.value(12.5) == doctest::Approx(0.5).epsilon(1e-9));

    CHECK_THROWS_AS(absorption_profile(0.0, 5.0), ValidationError);
    CHECK_THROWS_AS(absorption_profile(-2.0, 5.0), ValidationError);
}

TEST_CASE("dwell sampler reproduces the configured mean") {
    DwellSampler sampler({1.2}, 99);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = sampler.next();
        sum += d;
        sq += d * d;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    // 3 sigma of the sample mean of an exponential: 3 * 1.2 / sqrt(1e5)
    CHECK(mean > 1.188);
    CHECK(mean < 1.212);
    CHECK(var / (mean * mean) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("dwell sampler is deterministic per seed") {
    DwellSampler a({1.2}, 7), b({1.2}, 7), c({1.2}, 8);
    bool all_equal = true, any_differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double xa = a.next();
        all_equal = all_equal && xa == b.next();
        any_differs = any_differs || xa != c.next();
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("dwell sampler passes a KS test against the exponential CDF") {
    // n = 1e4, significance 0.01, critical D = 1.6276/sqrt(n) = 0.016276.
    const int n = 10000;
    DwellSampler sampler({1.2}, 4242);
    std::vector<double> xs(n);
    for (auto& x : xs)
        x = sampler.next();
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = 1.0 - std::exp(-xs[static_cast<std::size_t>(i)] / 1.2);
        d = std::max(d, std::fabs(f - (i + 1.0) / n));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    CHECK(d < 0.016276);
}

TEST_CASE("invalid dwell parameters are rejected") {
    CHECK_THROWS_AS(DwellSampler({0.0}, 1), ValidationError);
    CHECK_THROWS_AS(DwellSampler({-1.0}, 1), ValidationError);
}
