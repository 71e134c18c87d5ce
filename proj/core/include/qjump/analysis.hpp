#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qjump/interaction_model.hpp"
#include "qjump/line_profile.hpp"
#include "qjump/trajectory_sim.hpp"

namespace qjump {

enum class Direction { bright_to_dark, dark_to_bright };

struct Transition {
    std::size_t bin_index;
    Direction dir;
};

// Detected state switches of one trace. Transitions alternate in direction;
// n_cycles counts completed bright->dark->bright pairs.
struct JumpEvents {
    std::vector<Transition> transitions;
    std::size_t n_cycles = 0;
    double observation_time_s = 0.0;
};

enum class ErrorMethod { poisson_sqrt, sem };

struct RateEstimate {
    double rate_per_min = 0.0;
    double error_per_min = 0.0;
    std::size_t n_events = 0;
    ErrorMethod method = ErrorMethod::poisson_sqrt;
};

struct DwellStats {
    std::size_t n_dwells = 0;
    double mean_s = 0.0;     // sample mean of complete dark dwells
    double mle_mean_s = 0.0; // exponential maximum-likelihood mean
    double ci_low_s = 0.0;   // 95% confidence interval on the MLE mean
    double ci_high_s = 0.0;
};

struct LorentzianFit {
    double center_mhz = 0.0;
    double fwhm_mhz = 0.0;
    double amplitude = 0.0; // events/min above offset
    double offset = 0.0;    // events/min
    double center_err_mhz = 0.0;
    double fwhm_err_mhz = 0.0;
    double amplitude_err = 0.0;
    double offset_err = 0.0;
    double residual_norm = 0.0; // RMS residual over the data range
    bool converged = false;
    std::size_t n_iterations = 0;
};

// Run-length classifier: the state flips once min_run consecutive bins fall
// on the other side of the threshold; the transition is recorded at the
// first bin of that run. The expected params pin the bin means the threshold
// must lie strictly between.
JumpEvents detect_jumps(const CountTrace& trace, double threshold_counts_per_bin,
                        std::size_t min_run, const TelegraphParams& expected);

// Cycle rate with Poissonian sqrt(n) error.
RateEstimate estimate_rate(const JumpEvents& events);

// Mean of per-measurement rates with standard error of the mean.
RateEstimate estimate_rate(std::span<const JumpEvents> sub_measurements);

// Dark-dwell statistics from detected transitions; dwells truncated by the
// trace boundary are excluded. Requires at least 10 complete dwells.
DwellStats dwell_statistics(const JumpEvents& events, const CountTrace& trace);

// Weighted least-squares Lorentzian fit (weights 1/err^2, unit when the
// scan carries no errors), damped Gauss-Newton from the deterministic
// initialization: offset = min, amplitude = max - min, center = argmax,
// fwhm = half-maximum crossing span (x-range/4 fallback). Converges when
// the relative step drops below 1e-8, capped at 200 iterations.
LorentzianFit fit_lorentzian(const ScanResult& scan);

// Same optimizer, model = (fixed filter profile) convolved with a
// Lorentzian of the fitted atomic width. Returned parameters describe the
// atomic line.
LorentzianFit fit_convolved_line(const ScanResult& scan, const LineProfile& known_filter);

} // namespace qjump
