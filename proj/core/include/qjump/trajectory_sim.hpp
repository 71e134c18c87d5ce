#pragma once

#include <cstdint>
#include <vector>

namespace qjump {

enum class IonState { bright, dark };

inline IonState other_state(IonState s) {
    return s == IonState::bright ? IonState::dark : IonState::bright;
}

// Two-state telegraph process: bright->dark pumping (SPDC-induced plus
// background) against dark->bright recovery by spontaneous decay, with
// Poissonian photon counting on top.
struct TelegraphParams {
    double bright_to_dark_rate = 0.7 / 60.0; // events/s
    double dark_to_bright_rate = 1.0 / 1.2;  // events/s
    double bright_count_rate = 20000.0;      // counts/s
    double dark_count_rate = 50.0;           // counts/s

    void validate() const;
};

struct JumpRecord {
    double time_s;
    IonState to; // state entered at time_s

    bool operator==(const JumpRecord&) const = default;
};

// Binned fluorescence counts plus the exact switching times that produced
// them. Immutable after generation.
struct CountTrace {
    double bin_width_s = 0.1;
    std::vector<std::uint32_t> counts;
    IonState start_state = IonState::bright;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::vector<JumpRecord> true_jumps;

    std::size_t n_bins() const { return counts.size(); }
    double duration_s() const { return static_cast<double>(counts.size()) * bin_width_s; }

    bool operator==(const CountTrace&) const = default;
};

// Exact-dwell telegraph simulation: alternating exponential dwells, then one
// Poisson draw per bin with mean = sum of (state count rate) x (occupancy
// time). Deterministic for fixed (params, duration, bin width, seed, trial);
// the RNG stream is keyed by (seed, trial). The duration is truncated to a
// whole number of bins.
CountTrace simulate_trace(const TelegraphParams& p, double duration_s,
                          double bin_width_s, std::uint64_t seed,
                          std::uint64_t trial = 0,
                          IonState start_state = IonState::bright);

// Long-time dark-state occupancy k_bd / (k_bd + k_db).
double stationary_dark_fraction(const TelegraphParams& p);

// Completed on->off->on cycles in a jump record.
std::size_t count_cycles(const std::vector<JumpRecord>& jumps);

} // namespace qjump
