#include "qjump/spdc_source.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qjump/errors.hpp"

namespace qjump {

namespace {

// sin(x)^2/x^2 with unit value at x = 0; half maximum at |x| = 1.391557...
constexpr double kSincHalfMaxArg = 1.3915574;

double sinc_sq(double x) {
    if (std::fabs(x) < 1e-8)
        return 1.0 - x * x / 3.0;
    const double s = std::sin(x) / x;
    return s * s;
}

} // namespace

void SpdcSourceConfig::validate() const {
    if (!(envelope_fwhm_ghz > 0.0))
        throw ValidationError("spdc.envelope_fwhm_ghz must be > 0");
    if (!(peak_flux_density > 0.0))
        throw ValidationError("spdc.peak_flux_density must be > 0");
    if (temp_slope_ghz_per_c == 0.0 || !std::isfinite(temp_slope_ghz_per_c))
        throw ValidationError("spdc.temp_slope_ghz_per_c must be nonzero");
    if (!std::isfinite(ref_temperature_c))
        throw ValidationError("spdc.ref_temperature_c must be finite");
}

void FilterChainConfig::validate() const {
    if (cavity_fwhms_mhz.empty())
        throw ValidationError("filter.cavity_fwhm_mhz must list at least one cavity");
    for (double w : cavity_fwhms_mhz)
        if (!(w > 0.0))
            throw ValidationError("filter.cavity_fwhm_mhz entries must be > 0");
    if (!(peak_transmission > 0.0) || peak_transmission > 1.0)
        throw ValidationError("filter.peak_transmission must be in (0, 1]");
    if (!std::isfinite(detuning_offset_mhz))
        throw ValidationError("filter.detuning_offset_mhz must be finite");
}

double envelope_center_ghz(const SpdcSourceConfig& config, double temperature_c) {
    return config.temp_slope_ghz_per_c * (temperature_c - config.ref_temperature_c);
}

double spectral_flux_density(const SpdcSourceConfig& config, double detuning_ghz,
                             double temperature_c) {
    const double d = detuning_ghz - envelope_center_ghz(config, temperature_c);
    switch (config.envelope_shape) {
    case EnvelopeShape::gaussian:
        return gaussian_value(d, 0.0, config.envelope_fwhm_ghz, config.peak_flux_density);
    case EnvelopeShape::sinc_squared:
        return config.peak_flux_density *
               sinc_sq(2.0 * kSincHalfMaxArg * d / config.envelope_fwhm_ghz);
    }
    return 0.0;
}

double filter_transmission(const FilterChainConfig& chain, double detuning_mhz) {
    double t = chain.peak_transmission;
    for (double w : chain.cavity_fwhms_mhz)
        t *= lorentzian_value(detuning_mhz, chain.detuning_offset_mhz, w, 1.0);
    return t;
}

double chain_fwhm_mhz(const FilterChainConfig& chain) {
    chain.validate();
    const auto& ws = chain.cavity_fwhms_mhz;

    bool identical = true;
    for (double w : ws)
        if (w != ws.front())
            identical = false;
    if (identical)
        return ws.front() *
               std::sqrt(std::pow(2.0, 1.0 / static_cast<double>(ws.size())) - 1.0);

    // Unimodal, symmetric about the offset: bracket then bisect the
    // half-maximum crossing on one side.
    const double half = 0.5 * filter_transmission(chain, chain.detuning_offset_mhz);
    double hi = *std::max_element(ws.begin(), ws.end());
    while (filter_transmission(chain, chain.detuning_offset_mhz + hi) > half)
        hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (filter_transmission(chain, chain.detuning_offset_mhz + mid) > half)
            lo = mid;
        else
            hi = mid;
    }
    return lo + hi; // half-width times two
}

LineProfile filtered_photon_spectrum(const SpdcSourceConfig& config,
                                     const FilterChainConfig& chain,
                                     double temperature_c) {
    config.validate();
    chain.validate();

    const double chain_fwhm = chain_fwhm_mhz(chain);
    const double envelope_fwhm_mhz = config.envelope_fwhm_ghz * 1e3;
    if (chain_fwhm > 0.01 * envelope_fwhm_mhz)
        std::fprintf(stderr,
                     "warning: filter chain FWHM %.3g MHz is not small against the "
                     "envelope FWHM %.3g MHz; product spectrum may be envelope-limited\n",
                     chain_fwhm, envelope_fwhm_mhz);

    constexpr double kSpanFwhms = 10.0;
    constexpr double kPointsPerFwhm = 2000.0;
    const double step = chain_fwhm / kPointsPerFwhm;
    const auto half_points =
        static_cast<std::size_t>(std::ceil(kSpanFwhms * kPointsPerFwhm));

    std::vector<double> xs, ys;
    xs.reserve(2 * half_points + 1);
    ys.reserve(2 * half_points + 1);
    for (std::size_t i = 0; i <= 2 * half_points; ++i) {
        const double x = chain.detuning_offset_mhz +
                         (static_cast<double>(i) - static_cast<double>(half_points)) * step;
        const double flux = spectral_flux_density(config, x * 1e-3, temperature_c);
        xs.push_back(x);
        ys.push_back(flux * filter_transmission(chain, x));
    }
    return LineProfile::sampled(std::move(xs), std::move(ys));
}

} // namespace qjump
