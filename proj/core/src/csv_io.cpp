#include "qjump/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qjump/errors.hpp"
#include "qjump/rng.hpp"

namespace qjump {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return in;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
    throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double_at(const std::string& path, std::size_t line, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        parse_fail(path, line, "expected a number, got '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim))
        out.push_back(item);
    if (!s.empty() && s.back() == delim)
        out.push_back("");
    return out;
}

// Simple key=value file into a map, preserving parse locations for errors.
std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail(path, lineno, "expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& require_key(const std::map<std::string, std::string>& kv,
                               const std::string& path, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw IoError(path + ": missing key '" + key + "'");
    return it->second;
}

} // namespace

std::string format_sig6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

std::string format_exact(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_scan_csv(const std::string& path, const ScanResult& scan) {
    scan.validate();
    std::ofstream out = open_out(path);
    out << "# config_digest=" << scan.config_digest << "\n";
    out << "x,rate_per_min,err_per_min\n";
    for (std::size_t i = 0; i < scan.x.size(); ++i)
        out << format_sig6(scan.x[i]) << ',' << format_sig6(scan.rate_per_min[i]) << ','
            << format_sig6(scan.err_per_min[i]) << "\n";
}

ScanResult read_scan_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    ScanResult scan;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const auto pos = line.find("config_digest=");
            if (pos != std::string::npos)
                scan.config_digest = line.substr(pos + 14);
            continue;
        }
        if (!header_seen) {
            if (line != "x,rate_per_min,err_per_min")
                parse_fail(path, lineno, "expected header x,rate_per_min,err_per_min");
            header_seen = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 3)
            parse_fail(path, lineno, "expected 3 columns");
        scan.x.push_back(parse_double_at(path, lineno, cols[0]));
        scan.rate_per_min.push_back(parse_double_at(path, lineno, cols[1]));
        scan.err_per_min.push_back(parse_double_at(path, lineno, cols[2]));
    }
    if (!header_seen)
        throw IoError(path + ": no data header found");
    scan.validate();
    return scan;
}

void write_scan_meta(const std::string& path, const ScanMeta& meta) {
    std::ofstream out = open_out(path);
    out << "format=qjump-scan-meta-v1\n";
    out << "kind=" << meta.kind << "\n";
    out << "mode=" << meta.mode << "\n";
    out << "config_digest=" << meta.config_digest << "\n";
    out << "error_method=" << meta.error_method << "\n";
    out << "master_seed=" << meta.master_seed << "\n";
}

ScanMeta read_scan_meta(const std::string& path) {
    const auto kv = read_kv_file(path);
    ScanMeta meta;
    meta.kind = require_key(kv, path, "kind");
    meta.mode = require_key(kv, path, "mode");
    meta.config_digest = require_key(kv, path, "config_digest");
    meta.error_method = require_key(kv, path, "error_method");
    meta.master_seed = std::stoull(require_key(kv, path, "master_seed"));
    return meta;
}

void write_trace_files(const std::string& csv_path, const std::string& meta_path,
                       const CountTrace& trace, const TelegraphParams& params,
                       const std::string& config_digest) {
    {
        std::ofstream out = open_out(csv_path);
        out << "# config_digest=" << config_digest << "\n";
        out << "bin_index,count\n";
        for (std::size_t i = 0; i < trace.counts.size(); ++i)
            out << i << ',' << trace.counts[i] << "\n";
    }
    std::ofstream out = open_out(meta_path);
    out << "format=qjump-trace-meta-v1\n";
    out << "rng=" << CounterRng::kName << "\n";
    out << "config_digest=" << config_digest << "\n";
    out << "master_seed=" << trace.seed << "\n";
    out << "trial=" << trace.trial << "\n";
    out << "start_state=" << (trace.start_state == IonState::bright ? "bright" : "dark")
        << "\n";
    out << "bin_width_s=" << format_exact(trace.bin_width_s) << "\n";
    out << "n_bins=" << trace.counts.size() << "\n";
    out << "bright_to_dark_rate_per_s=" << format_exact(params.bright_to_dark_rate)
        << "\n";
    out << "dark_to_bright_rate_per_s=" << format_exact(params.dark_to_bright_rate)
        << "\n";
    out << "bright_count_rate=" << format_exact(params.bright_count_rate) << "\n";
    out << "dark_count_rate=" << format_exact(params.dark_count_rate) << "\n";
    out << "true_jumps=";
    for (std::size_t i = 0; i < trace.true_jumps.size(); ++i) {
        out << (i ? ";" : "") << format_exact(trace.true_jumps[i].time_s) << ':'
            << (trace.true_jumps[i].to == IonState::dark ? 'd' : 'b');
    }
    out << "\n";
}

TraceBundle read_trace_files(const std::string& csv_path, const std::string& meta_path) {
    TraceBundle bundle;
    const auto kv = read_kv_file(meta_path);
    bundle.config_digest = require_key(kv, meta_path, "config_digest");
    bundle.trace.seed = std::stoull(require_key(kv, meta_path, "master_seed"));
    bundle.trace.trial = std::stoull(require_key(kv, meta_path, "trial"));
    bundle.trace.start_state =
        require_key(kv, meta_path, "start_state") == "dark" ? IonState::dark
                                                            : IonState::bright;
    bundle.trace.bin_width_s =
        parse_double_at(meta_path, 0, require_key(kv, meta_path, "bin_width_s"));
    bundle.params.bright_to_dark_rate = parse_double_at(
        meta_path, 0, require_key(kv, meta_path, "bright_to_dark_rate_per_s"));
    bundle.params.dark_to_bright_rate = parse_double_at(
        meta_path, 0, require_key(kv, meta_path, "dark_to_bright_rate_per_s"));
    bundle.params.bright_count_rate =
        parse_double_at(meta_path, 0, require_key(kv, meta_path, "bright_count_rate"));
    bundle.params.dark_count_rate =
        parse_double_at(meta_path, 0, require_key(kv, meta_path, "dark_count_rate"));

    const std::string& jumps = require_key(kv, meta_path, "true_jumps");
    if (!jumps.empty()) {
        for (const auto& item : split(jumps, ';')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos || colon + 1 >= item.size())
                throw IoError(meta_path + ": malformed true_jumps entry '" + item + "'");
            JumpRecord rec;
            rec.time_s = parse_double_at(meta_path, 0, item.substr(0, colon));
            rec.to = item[colon + 1] == 'd' ? IonState::dark : IonState::bright;
            bundle.trace.true_jumps.push_back(rec);
        }
    }

    std::ifstream in = open_in(csv_path);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        if (!header_seen) {
            if (line != "bin_index,count")
                parse_fail(csv_path, lineno, "expected header bin_index,count");
            header_seen = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 2)
            parse_fail(csv_path, lineno, "expected 2 columns");
        const auto idx = std::stoull(cols[0]);
        if (idx != bundle.trace.counts.size())
            parse_fail(csv_path, lineno, "bin_index out of order");
        const long long c = std::stoll(cols[1]);
        if (c < 0)
            parse_fail(csv_path, lineno, "negative count");
        bundle.trace.counts.push_back(static_cast<std::uint32_t>(c));
    }
    if (!header_seen)
        throw IoError(csv_path + ": no data header found");
    const auto n_bins = std::stoull(require_key(kv, meta_path, "n_bins"));
    if (n_bins != bundle.trace.counts.size())
        throw IoError(csv_path + ": bin count disagrees with metadata");
    return bundle;
}

void write_spectrum_csv(const std::string& path, const LineProfile& sampled,
                        const std::string& config_digest) {
    if (!sampled.is_sampled())
        throw ValidationError("write_spectrum_csv: sampled profiles only");
    std::ofstream out = open_out(path);
    out << "# config_digest=" << config_digest << "\n";
    out << "detuning_mhz,flux_density\n";
    for (std::size_t i = 0; i < sampled.grid_x.size(); ++i)
        out << format_sig6(sampled.grid_x[i]) << ',' << format_sig6(sampled.grid_y[i])
            << "\n";
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out = open_out(path);
    for (const auto& [k, v] : kv)
        out << k << '=' << v << "\n";
}

} // namespace qjump
