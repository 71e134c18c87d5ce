#include "qjump/interaction_model.hpp"

#include <algorithm>
#include <cmath>

#include "qjump/errors.hpp"

namespace qjump {

void CouplingFactors::validate() const {
    const double fs[] = {d32_population, dipole_fraction, branching_to_d52,
                         polarization_match, geometric_overlap};
    const char* names[] = {"d32_population", "dipole_fraction", "branching_to_d52",
                           "polarization_match", "geometric_overlap"};
    for (int i = 0; i < 5; ++i)
        if (!(fs[i] > 0.0) || fs[i] > 1.0)
            throw ValidationError(std::string("coupling.") + names[i] +
                                  " must be in (0, 1]");
}

double CouplingFactors::product() const {
    return d32_population * dipole_fraction * branching_to_d52 * polarization_match *
           geometric_overlap;
}

void BackgroundRates::validate() const {
    if (background_jump_rate_per_min < 0.0)
        throw ValidationError("telegraph.background_jump_rate_per_min must be >= 0");
    if (bright_count_rate < 0.0 || dark_count_rate < 0.0)
        throw ValidationError("telegraph count rates must be >= 0");
    if (!(bright_count_rate > dark_count_rate))
        throw ValidationError("telegraph.bright_count_rate must exceed dark_count_rate");
}

void ScanResult::validate() const {
    if (x.size() != rate_per_min.size() || x.size() != err_per_min.size())
        throw ValidationError("ScanResult: column lengths differ");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1]))
            throw ValidationError("ScanResult: x must be strictly increasing");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (rate_per_min[i] < 0.0 || err_per_min[i] < 0.0)
            throw ValidationError("ScanResult: rates and errors must be >= 0");
}

double resonant_flux(double density_per_s_mhz, double absorption_bandwidth_mhz) {
    if (density_per_s_mhz < 0.0)
        throw ValidationError("resonant_flux: density must be >= 0");
    if (!(absorption_bandwidth_mhz > 0.0))
        throw ValidationError("resonant_flux: bandwidth must be > 0");
    return density_per_s_mhz * absorption_bandwidth_mhz;
}

double predicted_jump_rate(double flux_per_s, const CouplingFactors& f) {
    if (flux_per_s < 0.0)
        throw ValidationError("predicted_jump_rate: flux must be >= 0");
    f.validate();
    return flux_per_s * f.product();
}

LineProfile convolve_profiles(const LineProfile& a, const LineProfile& b,
                              const ConvolveOptions& opt) {
    if (!(a.fwhm > 0.0) || !(b.fwhm > 0.0) || !std::isfinite(a.fwhm) ||
        !std::isfinite(b.fwhm))
        throw ValidationError("convolve_profiles: inputs need finite positive FWHM");
    if (opt.points_per_fwhm < 100.0)
        throw ResolutionError(
            "convolve_profiles: fewer than 100 points per narrower FWHM");
    for (const LineProfile* p : {&a, &b})
        if (p->is_sampled() && p->fwhm / p->grid_step() < 100.0)
            throw ResolutionError(
                "convolve_profiles: sampled input grid coarser than 100 points per FWHM");

    // Kernel = the narrower input, sampled about its own center.
    const bool a_is_kernel = a.fwhm <= b.fwhm;
    const LineProfile& kern = a_is_kernel ? a : b;
    const LineProfile& other = a_is_kernel ? b : a;

    const double h = kern.fwhm / opt.points_per_fwhm;
    const double kern_half = opt.span_fwhms * kern.fwhm;
    const double other_half = opt.span_fwhms * other.fwhm;
    const auto nk = static_cast<std::ptrdiff_t>(std::ceil(kern_half / h));
    const auto no = static_cast<std::ptrdiff_t>(std::ceil((kern_half + other_half) / h));

    std::vector<double> kern_vals(static_cast<std::size_t>(2 * nk + 1));
    for (std::ptrdiff_t j = -nk; j <= nk; ++j)
        kern_vals[static_cast<std::size_t>(j + nk)] =
            kern.value(kern.center + static_cast<double>(j) * h);

    const double out_center = kern.center + other.center;
    std::vector<double> xs(static_cast<std::size_t>(2 * no + 1));
    std::vector<double> ys(static_cast<std::size_t>(2 * no + 1), 0.0);
    for (std::ptrdiff_t i = -no; i <= no; ++i) {
        const double u = out_center + static_cast<double>(i) * h;
        double acc = 0.0;
        // C(u) = sum_j kern(c_k + j h) * other(u - c_k - j h) * h
        for (std::ptrdiff_t j = -nk; j <= nk; ++j)
            acc += kern_vals[static_cast<std::size_t>(j + nk)] *
                   other.value(u - kern.center - static_cast<double>(j) * h);
        xs[static_cast<std::size_t>(i + no)] = u;
        ys[static_cast<std::size_t>(i + no)] = acc * h;
    }

    // Documented convention: rescale so the output peak is a.peak * b.peak.
    const double raw_peak = *std::max_element(ys.begin(), ys.end());
    if (raw_peak > 0.0) {
        const double scale = a.peak * b.peak / raw_peak;
        for (double& y : ys)
            y *= scale;
    }
    return LineProfile::sampled(std::move(xs), std::move(ys));
}

ScanResult temperature_scan_model(const SpdcSourceConfig& spdc, const LineProfile& line,
                                  const CouplingFactors& f, const BackgroundRates& bg,
                                  const std::vector<double>& temperatures_c) {
    spdc.validate();
    f.validate();
    bg.validate();
    if (temperatures_c.empty())
        throw ValidationError("temperature_scan_model: empty temperature grid");

    ScanResult out;
    out.kind = ScanKind::temperature;
    out.x = temperatures_c;
    out.rate_per_min.reserve(temperatures_c.size());
    out.err_per_min.assign(temperatures_c.size(), 0.0);
    for (double t : temperatures_c) {
        const double density = spectral_flux_density(spdc, 0.0, t);
        const double pumped =
            density > 0.0
                ? predicted_jump_rate(resonant_flux(density, line.fwhm), f)
                : 0.0;
        out.rate_per_min.push_back(bg.background_jump_rate_per_min + 60.0 * pumped);
    }
    out.validate();
    return out;
}

ScanResult frequency_scan_model(const FilterChainConfig& chain, const LineProfile& line,
                                double peak_rate_per_min, const BackgroundRates& bg,
                                const std::vector<double>& detunings_mhz) {
    chain.validate();
    bg.validate();
    if (detunings_mhz.empty())
        throw ValidationError("frequency_scan_model: empty detuning grid");
    if (peak_rate_per_min < 0.0)
        throw ValidationError("frequency_scan_model: peak rate must be >= 0");

    const LineProfile filter =
        LineProfile::lorentzian(chain.detuning_offset_mhz, chain_fwhm_mhz(chain), 1.0);
    const LineProfile c = convolve_profiles(filter, line);

    ScanResult out;
    out.kind = ScanKind::frequency;
    out.x = detunings_mhz;
    out.rate_per_min.reserve(detunings_mhz.size());
    out.err_per_min.assign(detunings_mhz.size(), 0.0);
    for (double d : detunings_mhz)
        out.rate_per_min.push_back(bg.background_jump_rate_per_min +
                                   peak_rate_per_min * c.value(d) / c.peak);
    out.validate();
    return out;
}

} // namespace qjump
