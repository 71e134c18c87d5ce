#include "qjump/line_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qjump/errors.hpp"

namespace qjump {

double lorentzian_value(double x, double center, double fwhm, double peak) {
    const double d = x - center;
    return peak / (1.0 + 4.0 * d * d / (fwhm * fwhm));
}

double gaussian_value(double x, double center, double fwhm, double peak) {
    const double d = (x - center) / fwhm;
    return peak * std::exp(-4.0 * M_LN2 * d * d);
}

LineProfile LineProfile::lorentzian(double center, double fwhm, double peak) {
    if (!(fwhm > 0.0))
        throw ValidationError("LineProfile: fwhm must be > 0");
    if (peak < 0.0)
        throw ValidationError("LineProfile: peak must be >= 0");
    LineProfile p;
    p.shape = ProfileShape::lorentzian;
    p.center = center;
    p.fwhm = fwhm;
    p.peak = peak;
    return p;
}

LineProfile LineProfile::sampled(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("LineProfile: sampled grid needs >= 2 matching points");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1]))
            throw ValidationError("LineProfile: grid must be strictly increasing");
    for (double v : y)
        if (v < 0.0 || !std::isfinite(v))
            throw ValidationError("LineProfile: grid values must be finite and >= 0");

    LineProfile p;
    p.shape = ProfileShape::sampled;
    const auto it = std::max_element(y.begin(), y.end());
    p.peak = *it;
    p.center = x[static_cast<std::size_t>(it - y.begin())];
    p.fwhm = sampled_fwhm(x, y);
    p.grid_x = std::move(x);
    p.grid_y = std::move(y);
    return p;
}

double LineProfile::value(double x) const {
    if (shape == ProfileShape::lorentzian)
        return lorentzian_value(x, center, fwhm, peak);
    if (x < grid_x.front() || x > grid_x.back())
        return 0.0;
    const auto it = std::upper_bound(grid_x.begin(), grid_x.end(), x);
    if (it == grid_x.begin())
        return grid_y.front();
    if (it == grid_x.end())
        return grid_y.back();
    const std::size_t hi = static_cast<std::size_t>(it - grid_x.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - grid_x[lo]) / (grid_x[hi] - grid_x[lo]);
    return grid_y[lo] + t * (grid_y[hi] - grid_y[lo]);
}

double LineProfile::grid_step() const {
    if (!is_sampled() || grid_x.size() < 2)
        return 0.0;
    return (grid_x.back() - grid_x.front()) / static_cast<double>(grid_x.size() - 1);
}

double LineProfile::integral() const {
    if (!is_sampled())
        throw ValidationError("LineProfile::integral: sampled profiles only");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < grid_x.size(); ++i)
        sum += 0.5 * (grid_y[i] + grid_y[i + 1]) * (grid_x[i + 1] - grid_x[i]);
    return sum;
}

double sampled_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
    const auto it = std::max_element(y.begin(), y.end());
    const std::size_t m = static_cast<std::size_t>(it - y.begin());
    const double half = 0.5 * *it;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    double left = nan;
    for (std::size_t i = m; i-- > 0;) {
        if (y[i] < half) {
            const double t = (half - y[i]) / (y[i + 1] - y[i]);
            left = x[i] + t * (x[i + 1] - x[i]);
            break;
        }
    }
    double right = nan;
    for (std::size_t i = m + 1; i < y.size(); ++i) {
        if (y[i] < half) {
            const double t = (y[i - 1] - half) / (y[i - 1] - y[i]);
            right = x[i - 1] + t * (x[i] - x[i - 1]);
            break;
        }
    }
    return right - left; // NaN propagates when either side is missing
}

} // namespace qjump
