#include "qjump/trajectory_sim.hpp"

#include <cmath>

#include "qjump/errors.hpp"
#include "qjump/rng.hpp"

namespace qjump {

void TelegraphParams::validate() const {
    if (bright_to_dark_rate < 0.0 || !std::isfinite(bright_to_dark_rate))
        throw ValidationError("telegraph: bright_to_dark_rate must be >= 0");
    if (!(dark_to_bright_rate > 0.0))
        throw ValidationError(
            "telegraph: dark_to_bright_rate must be > 0 (the ion always returns)");
    if (bright_count_rate < 0.0 || dark_count_rate < 0.0)
        throw ValidationError("telegraph: count rates must be >= 0");
    if (!(bright_count_rate > dark_count_rate))
        throw ValidationError("telegraph: bright_count_rate must exceed dark_count_rate");
}

CountTrace simulate_trace(const TelegraphParams& p, double duration_s,
                          double bin_width_s, std::uint64_t seed, std::uint64_t trial,
                          IonState start_state) {
    p.validate();
    if (!(bin_width_s > 0.0))
        throw ValidationError("simulate_trace: bin width must be > 0");
    if (duration_s < bin_width_s)
        throw ValidationError("simulate_trace: duration must cover at least one bin");

    const auto n_bins =
        static_cast<std::size_t>(std::floor(duration_s / bin_width_s + 1e-9));
    const double effective_duration = static_cast<double>(n_bins) * bin_width_s;

    CounterRng rng(seed, trial);

    CountTrace trace;
    trace.bin_width_s = bin_width_s;
    trace.start_state = start_state;
    trace.seed = seed;
    trace.trial = trial;

    // Dwell sequence first, then counting, so the draw order is fixed.
    IonState state = start_state;
    double t = 0.0;
    for (;;) {
        const double out_rate = state == IonState::bright ? p.bright_to_dark_rate
                                                          : p.dark_to_bright_rate;
        if (out_rate <= 0.0)
            break; // stays bright for the remainder
        t += rng.exponential(1.0 / out_rate);
        if (t >= effective_duration)
            break;
        state = other_state(state);
        trace.true_jumps.push_back({t, state});
    }

    const auto count_rate = [&p](IonState s) {
        return s == IonState::bright ? p.bright_count_rate : p.dark_count_rate;
    };

    trace.counts.resize(n_bins);
    std::size_t ji = 0;
    IonState bin_entry_state = start_state;
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double bin_start = static_cast<double>(i) * bin_width_s;
        const double bin_end = static_cast<double>(i + 1) * bin_width_s;
        double mean;
        if (ji >= trace.true_jumps.size() || trace.true_jumps[ji].time_s >= bin_end) {
            // Whole bin in one state; keep the mean bit-identical across bins
            // so the Poisson sampler's constant cache holds.
            mean = count_rate(bin_entry_state) * bin_width_s;
        } else {
            mean = 0.0;
            double t0 = bin_start;
            while (ji < trace.true_jumps.size() &&
                   trace.true_jumps[ji].time_s < bin_end) {
                mean += count_rate(bin_entry_state) * (trace.true_jumps[ji].time_s - t0);
                t0 = trace.true_jumps[ji].time_s;
                bin_entry_state = trace.true_jumps[ji].to;
                ++ji;
            }
            mean += count_rate(bin_entry_state) * (bin_end - t0);
        }
        trace.counts[i] = static_cast<std::uint32_t>(rng.poisson(mean));
    }
    return trace;
}

double stationary_dark_fraction(const TelegraphParams& p) {
    p.validate();
    return p.bright_to_dark_rate / (p.bright_to_dark_rate + p.dark_to_bright_rate);
}

std::size_t count_cycles(const std::vector<JumpRecord>& jumps) {
    std::size_t cycles = 0;
    bool open = false; // a bright->dark with no dark->bright yet
    for (const auto& j : jumps) {
        if (j.to == IonState::dark)
            open = true;
        else if (open) {
            ++cycles;
            open = false;
        }
    }
    return cycles;
}

} // namespace qjump
