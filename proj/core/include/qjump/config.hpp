#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qjump/interaction_model.hpp"
#include "qjump/spdc_source.hpp"
#include "qjump/trajectory_sim.hpp"

namespace qjump {

// Flat INI document: [section] headers, key = value lines, '#'/';' comments,
// lists comma-separated. Sections and keys are kept sorted, which is also
// the canonical order for hashing.
struct IniDoc {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniDoc parse_file(const std::string& path);
    static IniDoc parse_string(const std::string& text, const std::string& origin);

    void set(const std::string& section, const std::string& key, const std::string& value);
};

struct AtomConfig {
    double natural_fwhm_mhz = 25.0;
    double zeeman_broadening_mhz = 11.0;
    double dark_dwell_mean_s = 1.2;
    double absorption_bandwidth_mhz = 22.0; // flux window for the rate estimate

    void validate() const;
};

struct TelegraphConfig {
    double bright_count_rate = 20000.0;
    double dark_count_rate = 50.0;
    double bin_width_s = 0.1;
    double background_jump_rate_per_min = 0.09;
    IonState start_state = IonState::bright;
    // Jump detection: threshold sits this fraction of the way from the dark
    // to the bright bin mean; a flip needs this many consecutive bins.
    double detection_threshold_fraction = 0.375;
    std::size_t detection_min_run = 2;

    void validate() const;
};

struct ScanGridConfig {
    double temp_start_c = 15.0;
    double temp_stop_c = 35.0;
    std::size_t temp_points = 11;
    double freq_start_mhz = -150.0;
    double freq_stop_mhz = 150.0;
    std::size_t freq_points = 21;
    double mc_duration_per_point_s = 3600.0; // temperature points: one dwell
    double mc_bin_width_s = 0.004;
    std::size_t freq_sub_measurements = 16; // frequency points: 16 x 5 min
    double freq_sub_duration_s = 300.0;
    double peak_rate_per_min = -1.0; // < 0: derive from the factor chain

    void validate() const;
    std::vector<double> temperature_grid() const;
    std::vector<double> frequency_grid() const;
    bool peak_rate_is_auto() const { return peak_rate_per_min < 0.0; }
};

struct RngSeedConfig {
    std::uint64_t master_seed = 13;
};

// Everything one experiment run needs, with a digest of the canonicalized
// effective content embedded in all outputs.
struct ExperimentConfig {
    AtomConfig atom;
    SpdcSourceConfig spdc;
    FilterChainConfig filter;
    CouplingFactors coupling;
    TelegraphConfig telegraph;
    ScanGridConfig scan;
    RngSeedConfig rng;
    std::string digest;

    static ExperimentConfig defaults();
    // Overrides are "section.key=value" strings applied after the file.
    static ExperimentConfig load(const std::string& path,
                                 const std::vector<std::string>& overrides = {});
    static ExperimentConfig from_ini(IniDoc doc);

    std::string canonical_text() const;
    void validate() const;

    // Telegraph process for a given total pump rate (per minute, background
    // included).
    TelegraphParams telegraph_params(double total_jump_rate_per_min) const;
    double detection_threshold_counts(double bin_width_s) const;
};

// FNV-1a 64-bit of the canonical text, as 16 hex characters.
std::string content_digest(const std::string& canonical_text);

} // namespace qjump
