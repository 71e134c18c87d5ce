#pragma once

#include <cstddef>
#include <vector>

namespace qjump {

// Peak-normalized Lorentzian, value `peak` at x = center.
double lorentzian_value(double x, double center, double fwhm, double peak);

// Peak-normalized Gaussian with the given FWHM.
double gaussian_value(double x, double center, double fwhm, double peak);

enum class ProfileShape { lorentzian, sampled };

// A spectral response. Frequencies are detunings in MHz from the 850 nm
// line center; `peak` is dimensionless or photons/(s MHz) depending on use.
//
// Lorentzian profiles are analytic; sampled profiles carry a strictly
// increasing grid and evaluate by linear interpolation (zero outside the
// grid). For sampled profiles, center/fwhm/peak are measured from the grid:
// peak = max value, center = argmax, fwhm from the half-maximum crossings.
struct LineProfile {
    ProfileShape shape = ProfileShape::lorentzian;
    double center = 0.0; // MHz
    double fwhm = 0.0;   // MHz
    double peak = 1.0;
    std::vector<double> grid_x; // MHz, sampled shape only
    std::vector<double> grid_y;

    static LineProfile lorentzian(double center, double fwhm, double peak = 1.0);
    static LineProfile sampled(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double grid_step() const; // sampled shape only
    bool is_sampled() const { return shape == ProfileShape::sampled; }

    // Trapezoid integral over the grid (sampled shape only).
    double integral() const;
};

// Half-maximum width of a sampled curve, crossings located by linear
// interpolation. Returns NaN when the curve never falls below half maximum
// on either side.
double sampled_fwhm(const std::vector<double>& x, const std::vector<double>& y);

} // namespace qjump
