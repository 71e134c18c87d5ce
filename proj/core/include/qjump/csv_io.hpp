#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qjump/interaction_model.hpp"
#include "qjump/line_profile.hpp"
#include "qjump/trajectory_sim.hpp"

namespace qjump {

// 6 significant digits; the fixed formatting for all CSV numbers.
std::string format_sig6(double v);
// Shortest round-trip decimal; metadata values replay bit-exactly.
std::string format_exact(double v);

// Scan CSV: a '# config_digest=...' prologue line, then the header
// 'x,rate_per_min,err_per_min' and one row per point.
void write_scan_csv(const std::string& path, const ScanResult& scan);
ScanResult read_scan_csv(const std::string& path);

struct ScanMeta {
    std::string kind;   // temperature | frequency
    std::string mode;   // analytic | montecarlo
    std::string config_digest;
    std::string error_method; // poisson-sqrt | sem | none
    std::uint64_t master_seed = 0;
};
void write_scan_meta(const std::string& path, const ScanMeta& meta);
ScanMeta read_scan_meta(const std::string& path);

// Trace CSV ('bin_index,count') plus a sidecar key=value metadata file with
// exact-decimal params, seed, and true jump times, so a stored pair replays
// byte-identically.
struct TraceBundle {
    CountTrace trace;
    TelegraphParams params;
    std::string config_digest;
};
void write_trace_files(const std::string& csv_path, const std::string& meta_path,
                       const CountTrace& trace, const TelegraphParams& params,
                       const std::string& config_digest);
TraceBundle read_trace_files(const std::string& csv_path, const std::string& meta_path);

// Spectrum CSV: '# config_digest=...' then 'detuning_mhz,flux_density'.
void write_spectrum_csv(const std::string& path, const LineProfile& sampled,
                        const std::string& config_digest);

// Flat key=value report, one pair per line, in the given order.
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& kv);

} // namespace qjump
