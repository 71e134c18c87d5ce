#include "qjump/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "qjump/errors.hpp"

namespace qjump {

JumpEvents detect_jumps(const CountTrace& trace, double threshold_counts_per_bin,
                        std::size_t min_run, const TelegraphParams& expected) {
    expected.validate();
    if (min_run < 1)
        throw ValidationError("detect_jumps: min_run must be >= 1");
    if (trace.counts.empty())
        throw ValidationError("detect_jumps: empty trace");

    const double dark_mean = expected.dark_count_rate * trace.bin_width_s;
    const double bright_mean = expected.bright_count_rate * trace.bin_width_s;
    if (!(threshold_counts_per_bin > dark_mean) ||
        !(threshold_counts_per_bin < bright_mean))
        throw ValidationError(
            "detect_jumps: threshold must lie strictly between the dark and "
            "bright bin means");

    const auto dark_side = [&](std::uint32_t c) {
        return static_cast<double>(c) <= threshold_counts_per_bin;
    };

    JumpEvents events;
    events.observation_time_s = trace.duration_s();

    bool state_dark = dark_side(trace.counts[0]);
    std::size_t run_start = 0, run_len = 0;
    bool cycle_open = state_dark; // dark at start: first recovery has no pair
    for (std::size_t i = 1; i < trace.counts.size(); ++i) {
        const bool s = dark_side(trace.counts[i]);
        if (s == state_dark) {
            run_len = 0;
            continue;
        }
        if (run_len == 0)
            run_start = i;
        if (++run_len >= min_run) {
            state_dark = s;
            run_len = 0;
            if (state_dark) {
                events.transitions.push_back({run_start, Direction::bright_to_dark});
                cycle_open = true;
            } else {
                events.transitions.push_back({run_start, Direction::dark_to_bright});
                if (cycle_open && events.transitions.size() >= 2)
                    ++events.n_cycles;
                cycle_open = false;
            }
        }
    }
    return events;
}

RateEstimate estimate_rate(const JumpEvents& events) {
    if (!(events.observation_time_s > 0.0))
        throw ValidationError("estimate_rate: zero observation time");
    const double minutes = events.observation_time_s / 60.0;
    RateEstimate est;
    est.method = ErrorMethod::poisson_sqrt;
    est.n_events = events.n_cycles;
    est.rate_per_min = static_cast<double>(events.n_cycles) / minutes;
    est.error_per_min = std::sqrt(static_cast<double>(events.n_cycles)) / minutes;
    return est;
}

RateEstimate estimate_rate(std::span<const JumpEvents> sub_measurements) {
    if (sub_measurements.size() < 2)
        throw ValidationError("estimate_rate: SEM needs at least 2 sub-measurements");
    std::vector<double> rates;
    rates.reserve(sub_measurements.size());
    std::size_t n_events = 0;
    for (const auto& ev : sub_measurements) {
        rates.push_back(estimate_rate(ev).rate_per_min);
        n_events += ev.n_cycles;
    }
    const double n = static_cast<double>(rates.size());
    double mean = 0.0;
    for (double r : rates)
        mean += r;
    mean /= n;
    double ss = 0.0;
    for (double r : rates)
        ss += (r - mean) * (r - mean);

    RateEstimate est;
    est.method = ErrorMethod::sem;
    est.n_events = n_events;
    est.rate_per_min = mean;
    est.error_per_min = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return est;
}

namespace {

// Wilson-Hilferty chi-square quantile, adequate for the dwell-count regime.
double chi_square_quantile(double p_z, double dof) {
    const double t = 2.0 / (9.0 * dof);
    const double c = 1.0 - t + p_z * std::sqrt(t);
    return dof * c * c * c;
}

constexpr double kZ975 = 1.959963984540054;

} // namespace

DwellStats dwell_statistics(const JumpEvents& events, const CountTrace& trace) {
    std::vector<double> dwells;
    for (std::size_t i = 0; i + 1 < events.transitions.size(); ++i) {
        if (events.transitions[i].dir == Direction::bright_to_dark &&
            events.transitions[i + 1].dir == Direction::dark_to_bright) {
            const auto bins =
                events.transitions[i + 1].bin_index - events.transitions[i].bin_index;
            dwells.push_back(static_cast<double>(bins) * trace.bin_width_s);
        }
    }
    // A trailing bright->dark has no recovery inside the trace and a leading
    // dark period has no recorded start; both are censored and never enter
    // `dwells`.
    if (dwells.size() < 10)
        throw InsufficientDataError("dwell_statistics: fewer than 10 complete dwells");

    DwellStats stats;
    stats.n_dwells = dwells.size();
    double sum = 0.0;
    for (double d : dwells)
        sum += d;
    const double n = static_cast<double>(dwells.size());
    stats.mean_s = sum / n;
    stats.mle_mean_s = stats.mean_s; // exponential MLE is the sample mean
    stats.ci_low_s = 2.0 * sum / chi_square_quantile(kZ975, 2.0 * n);
    stats.ci_high_s = 2.0 * sum / chi_square_quantile(-kZ975, 2.0 * n);
    return stats;
}

namespace {

// Model value plus the four partial derivatives at one x, parameter order
// (center, fwhm, amplitude, offset).
using ModelEval =
    std::function<void(const std::array<double, 4>&, double x, double out[5])>;

struct FitData {
    const std::vector<double>* x;
    const std::vector<double>* y;
    std::vector<double> w; // least-squares weights
};

double weighted_ssr(const FitData& d, const ModelEval& eval,
                    const std::array<double, 4>& p) {
    double ssr = 0.0;
    double out[5];
    for (std::size_t i = 0; i < d.x->size(); ++i) {
        eval(p, (*d.x)[i], out);
        const double r = out[0] - (*d.y)[i];
        ssr += d.w[i] * r * r;
    }
    return ssr;
}

LorentzianFit damped_gauss_newton(const FitData& d, const ModelEval& eval,
                                  std::array<double, 4> p,
                                  const std::array<double, 4>& scales) {
    constexpr std::size_t kMaxIterations = 200;
    constexpr std::size_t kMaxInnerRetries = 25;
    constexpr double kStepTolerance = 1e-8;

    const std::size_t n = d.x->size();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
    Eigen::VectorXd res(static_cast<Eigen::Index>(n));

    double ssr = weighted_ssr(d, eval, p);
    double lambda = 1e-3;
    bool converged = false;
    std::size_t iter = 0;

    for (; iter < kMaxIterations && !converged; ++iter) {
        double out[5];
        for (std::size_t i = 0; i < n; ++i) {
            eval(p, (*d.x)[i], out);
            const double sw = std::sqrt(d.w[i]);
            res(static_cast<Eigen::Index>(i)) = sw * (out[0] - (*d.y)[i]);
            for (int k = 0; k < 4; ++k)
                jac(static_cast<Eigen::Index>(i), k) = sw * out[k + 1];
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d jtr = jac.transpose() * res;

        bool accepted = false;
        for (std::size_t retry = 0; retry < kMaxInnerRetries; ++retry) {
            Eigen::Matrix4d damped = jtj;
            for (int k = 0; k < 4; ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
            const Eigen::Vector4d step = damped.ldlt().solve(-jtr);

            std::array<double, 4> trial = p;
            for (int k = 0; k < 4; ++k)
                trial[static_cast<std::size_t>(k)] += step(k);
            if (trial[1] <= 0.0) { // width must stay positive
                lambda *= 10.0;
                continue;
            }
            const double trial_ssr = weighted_ssr(d, eval, trial);
            if (trial_ssr <= ssr) {
                double rel_step = 0.0;
                for (int k = 0; k < 4; ++k)
                    rel_step = std::max(
                        rel_step, std::fabs(step(k)) /
                                      std::max(std::fabs(p[static_cast<std::size_t>(k)]),
                                               scales[static_cast<std::size_t>(k)]));
                p = trial;
                ssr = trial_ssr;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel_step < kStepTolerance)
                    converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted)
            break; // damping exhausted; report best-so-far
    }

    LorentzianFit fit;
    fit.center_mhz = p[0];
    fit.fwhm_mhz = p[1];
    fit.amplitude = p[2];
    fit.offset = p[3];
    fit.converged = converged;
    fit.n_iterations = iter;

    // Parameter covariance from the final Jacobian; unit-weight fits are
    // rescaled by the reduced chi-square.
    double out[5];
    for (std::size_t i = 0; i < n; ++i) {
        eval(p, (*d.x)[i], out);
        const double sw = std::sqrt(d.w[i]);
        res(static_cast<Eigen::Index>(i)) = sw * (out[0] - (*d.y)[i]);
        for (int k = 0; k < 4; ++k)
            jac(static_cast<Eigen::Index>(i), k) = sw * out[k + 1];
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    Eigen::Matrix4d cov = jtj.inverse();
    bool unit_weights = true;
    for (double w : d.w)
        if (w != 1.0)
            unit_weights = false;
    if (unit_weights && n > 4) {
        const double s2 = res.squaredNorm() / static_cast<double>(n - 4);
        cov *= s2;
    }
    fit.center_err_mhz = std::sqrt(std::max(cov(0, 0), 0.0));
    fit.fwhm_err_mhz = std::sqrt(std::max(cov(1, 1), 0.0));
    fit.amplitude_err = std::sqrt(std::max(cov(2, 2), 0.0));
    fit.offset_err = std::sqrt(std::max(cov(3, 3), 0.0));

    double rms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        eval(p, (*d.x)[i], out);
        const double r = out[0] - (*d.y)[i];
        rms += r * r;
    }
    rms = std::sqrt(rms / static_cast<double>(n));
    const auto [ymin, ymax] = std::minmax_element(d.y->begin(), d.y->end());
    fit.residual_norm = rms / (*ymax - *ymin);
    return fit;
}

struct FitSetup {
    FitData data;
    std::array<double, 4> p0;     // (center, fwhm, amplitude, offset)
    std::array<double, 4> scales; // step-tolerance scales
};

FitSetup prepare_fit(const ScanResult& scan) {
    scan.validate();
    const auto& x = scan.x;
    const auto& y = scan.rate_per_min;
    if (x.size() < 5)
        throw ValidationError("fit: need at least 5 points");

    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    if (!(*ymax_it > *ymin_it))
        throw FlatDataError("fit: data carry no structure");

    const double offset0 = *ymin_it;
    const double amp0 = *ymax_it - *ymin_it;
    const std::size_t peak_idx = static_cast<std::size_t>(ymax_it - y.begin());
    const double center0 = x[peak_idx];
    const double span = x.back() - x.front();

    // Half-maximum crossing span; fall back to a quarter of the x range.
    const double half = offset0 + 0.5 * amp0;
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = peak_idx; i-- > 0;)
        if (y[i] < half) {
            const double t = (half - y[i]) / (y[i + 1] - y[i]);
            left = x[i] + t * (x[i + 1] - x[i]);
            break;
        }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = peak_idx + 1; i < y.size(); ++i)
        if (y[i] < half) {
            const double t = (y[i - 1] - half) / (y[i - 1] - y[i]);
            right = x[i - 1] + t * (x[i] - x[i - 1]);
            break;
        }
    double fwhm0 = right - left;
    if (!(fwhm0 > 0.0) || std::isnan(fwhm0))
        fwhm0 = span / 4.0;

    FitSetup setup;
    setup.data.x = &scan.x;
    setup.data.y = &scan.rate_per_min;
    bool all_positive = true;
    for (double e : scan.err_per_min)
        if (!(e > 0.0))
            all_positive = false;
    setup.data.w.assign(x.size(), 1.0);
    if (all_positive && !scan.err_per_min.empty())
        for (std::size_t i = 0; i < x.size(); ++i)
            setup.data.w[i] = 1.0 / (scan.err_per_min[i] * scan.err_per_min[i]);

    setup.p0 = {center0, fwhm0, amp0, offset0};
    setup.scales = {span, span, amp0, amp0};
    return setup;
}

} // namespace

LorentzianFit fit_lorentzian(const ScanResult& scan) {
    FitSetup setup = prepare_fit(scan);

    const ModelEval eval = [](const std::array<double, 4>& p, double x, double out[5]) {
        const double c = p[0], w = p[1], a = p[2], off = p[3];
        const double dx = x - c;
        const double u = 1.0 + 4.0 * dx * dx / (w * w);
        const double lor = 1.0 / u;
        out[0] = off + a * lor;
        out[1] = a * (8.0 * dx / (w * w)) * lor * lor;           // d/d center
        out[2] = a * (8.0 * dx * dx / (w * w * w)) * lor * lor;  // d/d fwhm
        out[3] = lor;                                            // d/d amplitude
        out[4] = 1.0;                                            // d/d offset
    };
    return damped_gauss_newton(setup.data, eval, setup.p0, setup.scales);
}

LorentzianFit fit_convolved_line(const ScanResult& scan, const LineProfile& known_filter) {
    FitSetup setup = prepare_fit(scan);

    if (!(known_filter.fwhm > 0.0) || std::isnan(known_filter.fwhm))
        throw ValidationError("fit_convolved_line: filter needs a positive FWHM");

    // Fixed quadrature grid over the filter, centered on the filter profile;
    // keeping the grid independent of the fitted width keeps the model
    // smooth in the parameters.
    const double h = std::min(known_filter.fwhm, setup.p0[1]) / 300.0;
    const auto nk = static_cast<std::ptrdiff_t>(std::ceil(12.0 * known_filter.fwhm / h));
    std::vector<double> kern_x(static_cast<std::size_t>(2 * nk + 1));
    std::vector<double> kern_f(static_cast<std::size_t>(2 * nk + 1));
    for (std::ptrdiff_t j = -nk; j <= nk; ++j) {
        const double dx = static_cast<double>(j) * h;
        kern_x[static_cast<std::size_t>(j + nk)] = dx;
        kern_f[static_cast<std::size_t>(j + nk)] =
            known_filter.value(known_filter.center + dx);
    }

    // S(u; w) = sum_j f_j L(u - x_j; w); the model normalizes by S(0; w).
    const auto conv = [&](double u, double w, double& s, double& ds_du,
                          double& ds_dw) {
        s = ds_du = ds_dw = 0.0;
        const double w2 = w * w;
        for (std::size_t j = 0; j < kern_x.size(); ++j) {
            const double dx = u - kern_x[j];
            const double q = 1.0 / (1.0 + 4.0 * dx * dx / w2);
            const double q2 = q * q;
            s += kern_f[j] * q;
            ds_du += kern_f[j] * (-8.0 * dx / w2) * q2;
            ds_dw += kern_f[j] * (8.0 * dx * dx / (w2 * w)) * q2;
        }
    };

    const ModelEval eval = [conv](const std::array<double, 4>& p, double x,
                                  double out[5]) {
        const double c = p[0], w = p[1], a = p[2], off = p[3];
        double s, ds_du, ds_dw;
        conv(x - c, w, s, ds_du, ds_dw);
        double s0, s0_du, s0_dw;
        conv(0.0, w, s0, s0_du, s0_dw);
        const double shape = s / s0;
        out[0] = off + a * shape;
        out[1] = -a * ds_du / s0;                          // d/d center
        out[2] = a * (ds_dw * s0 - s * s0_dw) / (s0 * s0); // d/d fwhm
        out[3] = shape;                                    // d/d amplitude
        out[4] = 1.0;                                      // d/d offset
    };
    return damped_gauss_newton(setup.data, eval, setup.p0, setup.scales);
}

} // namespace qjump
