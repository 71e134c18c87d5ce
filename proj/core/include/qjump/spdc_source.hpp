#pragma once

#include <vector>

#include "qjump/line_profile.hpp"

namespace qjump {

enum class EnvelopeShape { gaussian, sinc_squared };

// Down-conversion emitter: broadband envelope whose center tunes linearly
// with crystal temperature.
struct SpdcSourceConfig {
    double envelope_fwhm_ghz = 200.0;
    double peak_flux_density = 250.0;   // photons/(s MHz) on peak
    double temp_slope_ghz_per_c = -59.0;
    double ref_temperature_c = 25.0;    // envelope centered on the line here
    EnvelopeShape envelope_shape = EnvelopeShape::gaussian;

    void validate() const;
};

// Narrow filtered arm: a chain of Fabry-Perot cavities sharing one center.
struct FilterChainConfig {
    std::vector<double> cavity_fwhms_mhz{34.1847, 34.1847}; // chain FWHM 22 MHz
    double peak_transmission = 0.5;
    double detuning_offset_mhz = 0.0; // filter center relative to line center

    void validate() const;
};

// Envelope center detuning in GHz: temp_slope * (T - ref_temperature).
double envelope_center_ghz(const SpdcSourceConfig& config, double temperature_c);

// Envelope evaluated at the given detuning, photons/(s MHz); equals
// peak_flux_density on the (temperature-shifted) envelope center.
double spectral_flux_density(const SpdcSourceConfig& config, double detuning_ghz,
                             double temperature_c);

// Product of per-cavity Lorentzian transmissions, peak_transmission on
// resonance.
double filter_transmission(const FilterChainConfig& chain, double detuning_mhz);

// Half-maximum width of the chain transmission. Closed form
// w * sqrt(2^(1/n) - 1) for n identical cavities (exact for a single
// cavity), bisection on the product profile otherwise.
double chain_fwhm_mhz(const FilterChainConfig& chain);

// Pointwise product of envelope and filter transmission, sampled on a grid
// spanning +-10 chain FWHM around the filter center with >= 2000 points per
// chain FWHM. Warns on stderr when the chain is not much narrower than the
// envelope.
LineProfile filtered_photon_spectrum(const SpdcSourceConfig& config,
                                     const FilterChainConfig& chain,
                                     double temperature_c);

} // namespace qjump
