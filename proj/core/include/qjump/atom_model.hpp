#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qjump/line_profile.hpp"
#include "qjump/rng.hpp"

namespace qjump {

// Ca+ levels relevant to the experiment, in storage order.
enum class Level : std::size_t { S12 = 0, P12 = 1, D32 = 2, P32 = 3, D52 = 4 };
inline constexpr std::size_t kNumLevels = 5;
inline constexpr std::array<const char*, kNumLevels> kLevelLabels = {
    "S12", "P12", "D32", "P32", "D52"};

// Occupation probabilities; each in [0,1], summing to 1 within 1e-12.
struct LevelSet {
    std::array<double, kNumLevels> populations{};

    double operator[](Level l) const {
        return populations[static_cast<std::size_t>(l)];
    }
    void validate() const;
};

// Transition-rate generator in column convention: entry (to, from) is the
// rate from -> to in 1/s, the diagonal holds the negative total outflow, so
// every column sums to zero and dp/dt = Q p conserves probability.
class RateMatrix {
  public:
    explicit RateMatrix(std::size_t n_levels);

    std::size_t size() const { return n_; }
    double rate(std::size_t from, std::size_t to) const;
    void set_rate(std::size_t from, std::size_t to, double rate_per_s);
    double entry(std::size_t row, std::size_t col) const {
        return q_[row * n_ + col];
    }

    // Off-diagonals >= 0 and columns summing to zero within
    // 1e-9 * (largest entry).
    void validate() const;

    // Levels with neither inflow nor outflow.
    std::vector<bool> isolated_levels() const;

  private:
    std::size_t n_;
    std::vector<double> q_; // row-major
    void refresh_diagonal(std::size_t col);
};

// Stationary distribution of the generator: the normalized null vector of Q.
// Isolated levels get population 0; the coupled part must have a unique
// stationary state (second singular value above 1e-10 of the largest), else
// DegenerateDynamicsError.
std::vector<double> stationary_distribution(const RateMatrix& rates);

// Five-level wrapper around stationary_distribution.
LevelSet steady_state_populations(const RateMatrix& rates);

// Laser-excitation calibration shipped with the repo. The 397 nm and 866 nm
// pump strengths are tuned so that the S12/P12/D32 steady state puts 0.600
// of the population in D32; P32 and D52 are uncoupled (no 850/854 nm light
// in the steady-state picture):
//
//   P12 -> S12 decay    1.32e8 /s
//   P12 -> D32 decay    8.4e6  /s
//   S12 <-> P12 pump    5.5e7  /s   (397 nm, both directions)
//   D32 <-> P12 pump    1.5e6  /s   (866 nm, both directions)
//
// giving populations (S12, P12, D32) = (0.3091, 0.0909, 0.6000).
RateMatrix default_calibration_matrix();

// Effective absorption line on D32 - P32: a single Lorentzian at detuning 0,
// unit peak, FWHM = natural width plus Zeeman broadening.
LineProfile absorption_profile(double natural_fwhm_mhz, double zeeman_broadening_mhz);

// Metastable D52 residence.
struct DarkStateParams {
    double mean_dwell_s = 1.2;
    void validate() const;
};

// Stream of i.i.d. exponential dwell durations; identical seeds reproduce
// identical streams. Single-owner: parallel use requires separately seeded
// instances.
class DwellSampler {
  public:
    DwellSampler(DarkStateParams params, std::uint64_t seed);
    double next();

  private:
    DarkStateParams params_;
    CounterRng rng_;
};

} // namespace qjump
