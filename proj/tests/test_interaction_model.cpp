#include <cmath>
#include <vector>

#include <doctest.h>

#include "qjump/errors.hpp"
#include "qjump/interaction_model.hpp"
#include "qjump/line_profile.hpp"

using namespace qjump;

namespace {

CouplingFactors paper_factors() {
    return CouplingFactors{0.6, 0.007, 0.059, 1.0 / 3.0, 0.02};
}

LineProfile sampled_gaussian(double sigma, double step, double span_sigmas) {
    std::vector<double> xs, ys;
    const auto half = static_cast<int>(span_sigmas * sigma / step);
    for (int i = -half; i <= half; ++i) {
        const double x = i * step;
        xs.push_back(x);
        ys.push_back(std::exp(-x * x / (2.0 * sigma * sigma)));
    }
    return LineProfile::sampled(std::move(xs), std::move(ys));
}

} // namespace

TEST_CASE("resonant flux is the rectangular-window product") {
    CHECK(resonant_flux(250.0, 22.0) == doctest::Approx(5500.0));
    CHECK(resonant_flux(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(resonant_flux(0.0, 22.0) == 0.0);
    CHECK_THROWS_AS(resonant_flux(250.0, 0.0), ValidationError);
    CHECK_THROWS_AS(resonant_flux(-1.0, 22.0), ValidationError);
}

TEST_CASE("predicted jump rate multiplies the five factors") {
    const auto f = paper_factors();
    const double rate = predicted_jump_rate(5500.0, f);
    CHECK(std::fabs(rate - 9.08e-3) < 1e-5);
    // one jump in ~110 s; the rate sits within 10% of 1/(100 s)
    CHECK(std::fabs(rate - 0.01) / 0.01 < 0.10);

    // identity chain
    CouplingFactors unity{1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(predicted_jump_rate(5500.0, unity) == doctest::Approx(5500.0));
}

TEST_CASE("rate is exactly multiplicative in each factor") {
    const auto base = paper_factors();
    const double r0 = predicted_jump_rate(5500.0, base);
    for (int k = 0; k < 5; ++k) {
        auto f = base;
        double* fields[] = {&f.d32_population, &f.dipole_fraction, &f.branching_to_d52,
                            &f.polarization_match, &f.geometric_overlap};
        const double old = *fields[k];
        *fields[k] = 1.0;
        const double r1 = predicted_jump_rate(5500.0, f);
        CHECK(std::fabs(r1 * old - r0) <= 1e-12 * r0);
    }
    // linear in flux
    CHECK(predicted_jump_rate(11000.0, base) == doctest::Approx(2.0 * r0).epsilon(1e-12));
}

TEST_CASE("factors outside (0,1] are rejected") {
    auto f = paper_factors();
    f.dipole_fraction = 0.0;
    CHECK_THROWS_AS(f.validate(), ValidationError);
    f = paper_factors();
    f.geometric_overlap = 1.2;
    CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("Lorentzian convolution adds the widths") {
    const auto a = LineProfile::lorentzian(0.0, 22.0, 1.0);
    const auto b = LineProfile::lorentzian(0.0, 36.0, 1.0);
    const LineProfile c = convolve_profiles(a, b);
    CHECK(std::fabs(c.fwhm - 58.0) < 0.1);
    CHECK(c.peak == doctest::Approx(1.0));
    CHECK(c.fwhm >= 36.0);
}

TEST_CASE("near-delta kernel acts as the identity") {
    const auto x = LineProfile::lorentzian(0.0, 36.0, 1.0);
    const auto delta = LineProfile::lorentzian(0.0, 0.36, 1.0);
    ConvolveOptions opt;
    opt.points_per_fwhm = 100.0;
    opt.span_fwhms = 8.0;
    const LineProfile c = convolve_profiles(x, delta, opt);
    for (double d = -72.0; d <= 72.0; d += 1.5)
        CHECK(c.value(d) == doctest::Approx(x.value(d)).epsilon(0.01));
}

TEST_CASE("Gaussian convolution adds the variances") {
    const double s1 = 10.0, s2 = 17.0;
    const auto a = sampled_gaussian(s1, 0.05, 8.0);
    const auto b = sampled_gaussian(s2, 0.05, 8.0);
    const LineProfile c = convolve_profiles(a, b);
    const double expected_fwhm =
        2.0 * std::sqrt(2.0 * M_LN2) * std::sqrt(s1 * s1 + s2 * s2);
    CHECK(c.fwhm == doctest::Approx(expected_fwhm).epsilon(0.005));
    CHECK(c.peak == doctest::Approx(a.peak * b.peak));
}

TEST_CASE("convolution commutes within grid tolerance") {
    const auto a = LineProfile::lorentzian(3.0, 22.0, 0.8);
    const auto b = sampled_gaussian(15.0, 0.05, 8.0);
    const LineProfile ab = convolve_profiles(a, b);
    const LineProfile ba = convolve_profiles(b, a);
    for (double d = -80.0; d <= 80.0; d += 2.1)
        CHECK(std::fabs(ab.value(d + 3.0) - ba.value(d + 3.0)) <= 0.001 * ab.peak);
}

TEST_CASE("output width never falls below the wider input") {
    const auto a = LineProfile::lorentzian(0.0, 10.0, 1.0);
    const auto b = LineProfile::lorentzian(0.0, 45.0, 1.0);
    CHECK(convolve_profiles(a, b).fwhm >= 45.0);
}

TEST_CASE("under-resolved convolution grids are rejected") {
    const auto a = LineProfile::lorentzian(0.0, 22.0, 1.0);
    ConvolveOptions opt;
    opt.points_per_fwhm = 50.0;
    CHECK_THROWS_AS(convolve_profiles(a, a, opt), ResolutionError);
}

TEST_CASE("temperature scan peaks on resonance and decays to background") {
    SpdcSourceConfig spdc; // defaults: 200 GHz, 250, -59, ref 25
    const auto window = LineProfile::lorentzian(0.0, 22.0, 1.0);
    const auto f = paper_factors();
    BackgroundRates bg;
    bg.background_jump_rate_per_min = 0.09;

    const ScanResult scan = temperature_scan_model(
        spdc, window, f, bg, std::vector<double>{20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30});
    scan.validate();
    // peak: 0.09 + 60 * 9.086e-3 = 0.635/min
    CHECK(scan.rate_per_min[5] == doctest::Approx(0.6352).epsilon(0.001));
    // +-10 C = 590 GHz detuning: pure background within 1%
    CHECK(scan.rate_per_min.front() == doctest::Approx(0.09).epsilon(0.01));
    CHECK(scan.rate_per_min.back() == doctest::Approx(0.09).epsilon(0.01));
    CHECK(scan.err_per_min.front() == 0.0);
}

TEST_CASE("temperature width of the signal follows the tuning law") {
    SpdcSourceConfig spdc;
    const auto window = LineProfile::lorentzian(0.0, 22.0, 1.0);
    BackgroundRates bg;
    std::vector<double> temps;
    for (double t = 20.0; t <= 30.0001; t += 0.005)
        temps.push_back(t);
    const ScanResult scan =
        temperature_scan_model(spdc, window, paper_factors(), bg, temps);
    std::vector<double> signal(scan.rate_per_min.size());
    for (std::size_t i = 0; i < signal.size(); ++i)
        signal[i] = scan.rate_per_min[i] - bg.background_jump_rate_per_min;
    const double fwhm_t = sampled_fwhm(scan.x, signal);
    CHECK(std::fabs(fwhm_t - 200.0 / 59.0) < 0.05);
}

TEST_CASE("temperature scan is symmetric about the reference for even envelopes") {
    SpdcSourceConfig spdc;
    const auto window = LineProfile::lorentzian(0.0, 22.0, 1.0);
    BackgroundRates bg;
    for (double delta : {0.5, 1.25, 2.7}) {
        const ScanResult scan = temperature_scan_model(
            spdc, window, paper_factors(), bg,
            {spdc.ref_temperature_c - delta, spdc.ref_temperature_c + delta});
        CHECK(std::fabs(scan.rate_per_min[0] - scan.rate_per_min[1]) <=
              1e-9 * scan.rate_per_min[0]);
    }
}

TEST_CASE("frequency scan normalizes to background plus peak at center") {
    FilterChainConfig chain; // 22 MHz chain
    const auto line = LineProfile::lorentzian(0.0, 36.0, 1.0);
    BackgroundRates bg;
    const ScanResult scan =
        frequency_scan_model(chain, line, 0.27, bg, {-150, -75, 0, 75, 150});
    CHECK(scan.rate_per_min[2] == doctest::Approx(0.09 + 0.27).epsilon(1e-6));
}

TEST_CASE("frequency scan resonance is 58 MHz wide and tails to background") {
    FilterChainConfig chain;
    const auto line = LineProfile::lorentzian(0.0, 36.0, 1.0);
    BackgroundRates bg;
    std::vector<double> detunings;
    for (double d = -400.0; d <= 400.0001; d += 0.25)
        detunings.push_back(d);
    const ScanResult scan = frequency_scan_model(chain, line, 0.27, bg, detunings);
    std::vector<double> signal(scan.rate_per_min.size());
    for (std::size_t i = 0; i < signal.size(); ++i)
        signal[i] = scan.rate_per_min[i] - bg.background_jump_rate_per_min;
    CHECK(std::fabs(sampled_fwhm(scan.x, signal) - 58.0) < 1.0);

    // +-5 fwhm: within 5% of background
    const double tail = scan.rate_per_min.front();
    CHECK(std::fabs(tail - 0.09) < 0.05 * 0.09);

    // monotone approach to background beyond the peak
    for (std::size_t i = scan.x.size() / 2; i + 1 < scan.x.size(); ++i)
        CHECK(scan.rate_per_min[i + 1] <= scan.rate_per_min[i] + 1e-12);
}

TEST_CASE("scan models reject empty grids") {
    SpdcSourceConfig spdc;
    FilterChainConfig chain;
    const auto line = LineProfile::lorentzian(0.0, 36.0, 1.0);
    BackgroundRates bg;
    CHECK_THROWS_AS(
        temperature_scan_model(spdc, line, paper_factors(), bg, {}),
        ValidationError);
    CHECK_THROWS_AS(frequency_scan_model(chain, line, 0.2, bg, {}), ValidationError);
}
