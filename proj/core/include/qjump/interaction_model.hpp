#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qjump/line_profile.hpp"
#include "qjump/spdc_source.hpp"

namespace qjump {

// The five dimensionless reduction factors converting photon flux at the
// ion into a jump rate, each in (0, 1].
struct CouplingFactors {
    double d32_population = 0.6;
    double dipole_fraction = 0.007;
    double branching_to_d52 = 0.059;
    double polarization_match = 1.0 / 3.0;
    double geometric_overlap = 0.02;

    void validate() const;
    double product() const;
};

struct BackgroundRates {
    double background_jump_rate_per_min = 0.09;
    double bright_count_rate = 20000.0; // counts/s
    double dark_count_rate = 50.0;      // counts/s

    void validate() const;
};

enum class ScanKind { temperature, frequency };

// One scan curve: x in degC (temperature) or MHz (frequency), rates and
// errors in events/min.
struct ScanResult {
    ScanKind kind = ScanKind::temperature;
    std::vector<double> x;
    std::vector<double> rate_per_min;
    std::vector<double> err_per_min;
    std::string config_digest;
    std::uint64_t seed = 0;

    void validate() const;
};

// Photons/s inside a rectangular absorption window.
double resonant_flux(double density_per_s_mhz, double absorption_bandwidth_mhz);

// Jump rate in events/s: flux times the product of the five factors.
double predicted_jump_rate(double flux_per_s, const CouplingFactors& f);

struct ConvolveOptions {
    double points_per_fwhm = 500.0; // of the narrower input; < 100 is rejected
    double span_fwhms = 12.0;       // sampled extent of each input
};

// Numeric convolution on a uniform grid. The narrower input is sampled as
// the kernel over +-span_fwhms of its width; the other input is evaluated
// analytically (Lorentzian) or by interpolation (sampled). The output is
// rescaled so its peak equals a.peak * b.peak; for two Lorentzians the
// output FWHM is the sum of the input FWHMs.
LineProfile convolve_profiles(const LineProfile& a, const LineProfile& b,
                              const ConvolveOptions& opt = {});

// Jump rate vs crystal temperature, events/min:
//   rate(T) = background + 60 * predicted_jump_rate(
//                 resonant_flux(flux_density(spdc, 0, T), line.fwhm), f)
// Analytic model; errors are zero.
ScanResult temperature_scan_model(const SpdcSourceConfig& spdc, const LineProfile& line,
                                  const CouplingFactors& f, const BackgroundRates& bg,
                                  const std::vector<double>& temperatures_c);

// Jump rate vs filter detuning, events/min:
//   rate(d) = background + peak_rate * C(d)/C(peak),
// where C is the convolution of the chain response (modeled as a Lorentzian
// of the effective chain width) with the atomic line. Errors are zero.
ScanResult frequency_scan_model(const FilterChainConfig& chain, const LineProfile& line,
                                double peak_rate_per_min, const BackgroundRates& bg,
                                const std::vector<double>& detunings_mhz);

} // namespace qjump
