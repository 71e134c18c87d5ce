#include "qjump/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qjump/errors.hpp"

namespace qjump {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Shortest round-trip formatting; canonical across equal doubles.
std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& where, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(where + ": expected a number, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& where, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(where + ": expected a non-negative integer, got '" +
                              value + "'");
    }
}

std::vector<double> parse_double_list(const std::string& where, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ValidationError(where + ": empty list element");
        out.push_back(parse_double(where, item));
    }
    if (out.empty())
        throw ValidationError(where + ": expected a comma-separated list");
    return out;
}

} // namespace

IniDoc IniDoc::parse_string(const std::string& text, const std::string& origin) {
    IniDoc doc;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ValidationError(origin + ":" + std::to_string(lineno) +
                                      ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            doc.sections[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
        if (section.empty())
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": key outside any section");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
        doc.sections[section][key] = trim(t.substr(eq + 1));
    }
    return doc;
}

IniDoc IniDoc::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

void IniDoc::set(const std::string& section, const std::string& key,
                 const std::string& value) {
    sections[section][key] = value;
}

void AtomConfig::validate() const {
    if (!(natural_fwhm_mhz > 0.0))
        throw ValidationError("atom.natural_fwhm_mhz must be > 0");
    if (zeeman_broadening_mhz < 0.0)
        throw ValidationError("atom.zeeman_broadening_mhz must be >= 0");
    if (!(dark_dwell_mean_s > 0.0))
        throw ValidationError("atom.dark_dwell_mean_s must be > 0");
    if (!(absorption_bandwidth_mhz > 0.0))
        throw ValidationError("atom.absorption_bandwidth_mhz must be > 0");
}

void TelegraphConfig::validate() const {
    if (bright_count_rate < 0.0 || dark_count_rate < 0.0)
        throw ValidationError("telegraph count rates must be >= 0");
    if (!(bright_count_rate > dark_count_rate))
        throw ValidationError("telegraph.bright_count_rate must exceed dark_count_rate");
    if (!(bin_width_s > 0.0))
        throw ValidationError("telegraph.bin_width_s must be > 0");
    if (background_jump_rate_per_min < 0.0)
        throw ValidationError("telegraph.background_jump_rate_per_min must be >= 0");
    if (!(detection_threshold_fraction > 0.0) || !(detection_threshold_fraction < 1.0))
        throw ValidationError("telegraph.detection_threshold_fraction must be in (0, 1)");
    if (detection_min_run < 1)
        throw ValidationError("telegraph.detection_min_run must be >= 1");
}

void ScanGridConfig::validate() const {
    if (temp_points < 2 || freq_points < 2)
        throw ValidationError("scan grids need at least 2 points");
    if (!(temp_stop_c > temp_start_c))
        throw ValidationError("scan.temp_stop_c must exceed scan.temp_start_c");
    if (!(freq_stop_mhz > freq_start_mhz))
        throw ValidationError("scan.freq_stop_mhz must exceed scan.freq_start_mhz");
    if (!(mc_duration_per_point_s > 0.0) || !(mc_bin_width_s > 0.0))
        throw ValidationError("scan Monte Carlo durations must be > 0");
    if (mc_duration_per_point_s < mc_bin_width_s)
        throw ValidationError("scan.mc_duration_per_point_s must cover one bin");
    if (freq_sub_measurements < 2)
        throw ValidationError("scan.freq_sub_measurements must be >= 2");
    if (!(freq_sub_duration_s >= mc_bin_width_s))
        throw ValidationError("scan.freq_sub_duration_s must cover one bin");
}

namespace {
std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}
} // namespace

std::vector<double> ScanGridConfig::temperature_grid() const {
    return linspace(temp_start_c, temp_stop_c, temp_points);
}

std::vector<double> ScanGridConfig::frequency_grid() const {
    return linspace(freq_start_mhz, freq_stop_mhz, freq_points);
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig cfg;
    cfg.digest = content_digest(cfg.canonical_text());
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path,
                                        const std::vector<std::string>& overrides) {
    IniDoc doc = path.empty() ? IniDoc{} : IniDoc::parse_file(path);
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ValidationError("override must look like section.key=value: " + ov);
        doc.set(trim(ov.substr(0, dot)), trim(ov.substr(dot + 1, eq - dot - 1)),
                trim(ov.substr(eq + 1)));
    }
    return from_ini(std::move(doc));
}

ExperimentConfig ExperimentConfig::from_ini(IniDoc doc) {
    ExperimentConfig cfg;
    for (const auto& [section, kv] : doc.sections) {
        for (const auto& [key, value] : kv) {
            const std::string where = section + "." + key;
            if (section == "atom") {
                if (key == "natural_fwhm_mhz")
                    cfg.atom.natural_fwhm_mhz = parse_double(where, value);
                else if (key == "zeeman_broadening_mhz")
                    cfg.atom.zeeman_broadening_mhz = parse_double(where, value);
                else if (key == "dark_dwell_mean_s")
                    cfg.atom.dark_dwell_mean_s = parse_double(where, value);
                else if (key == "absorption_bandwidth_mhz")
                    cfg.atom.absorption_bandwidth_mhz = parse_double(where, value);
                else
                    throw ValidationError("unknown key '" + key + "' in section [atom]");
            } else if (section == "spdc") {
                if (key == "envelope_fwhm_ghz")
                    cfg.spdc.envelope_fwhm_ghz = parse_double(where, value);
                else if (key == "peak_flux_density")
                    cfg.spdc.peak_flux_density = parse_double(where, value);
                else if (key == "temp_slope_ghz_per_c")
                    cfg.spdc.temp_slope_ghz_per_c = parse_double(where, value);
                else if (key == "ref_temperature_c")
                    cfg.spdc.ref_temperature_c = parse_double(where, value);
                else if (key == "envelope_shape") {
                    if (value == "gaussian")
                        cfg.spdc.envelope_shape = EnvelopeShape::gaussian;
                    else if (value == "sinc-squared")
                        cfg.spdc.envelope_shape = EnvelopeShape::sinc_squared;
                    else
                        throw ValidationError(
                            where + ": expected gaussian or sinc-squared, got '" + value + "'");
                } else
                    throw ValidationError("unknown key '" + key + "' in section [spdc]");
            } else if (section == "filter") {
                if (key == "cavity_fwhm_mhz")
                    cfg.filter.cavity_fwhms_mhz = parse_double_list(where, value);
                else if (key == "peak_transmission")
                    cfg.filter.peak_transmission = parse_double(where, value);
                else if (key == "detuning_offset_mhz")
                    cfg.filter.detuning_offset_mhz = parse_double(where, value);
                else
                    throw ValidationError("unknown key '" + key + "' in section [filter]");
            } else if (section == "coupling") {
                if (key == "d32_population")
                    cfg.coupling.d32_population = parse_double(where, value);
                else if (key == "dipole_fraction")
                    cfg.coupling.dipole_fraction = parse_double(where, value);
                else if (key == "branching_to_d52")
                    cfg.coupling.branching_to_d52 = parse_double(where, value);
                else if (key == "polarization_match")
                    cfg.coupling.polarization_match = parse_double(where, value);
                else if (key == "geometric_overlap")
                    cfg.coupling.geometric_overlap = parse_double(where, value);
                else
                    throw ValidationError("unknown key '" + key + "' in section [coupling]");
            } else if (section == "telegraph") {
                if (key == "bright_count_rate")
                    cfg.telegraph.bright_count_rate = parse_double(where, value);
                else if (key == "dark_count_rate")
                    cfg.telegraph.dark_count_rate = parse_double(where, value);
                else if (key == "bin_width_s")
                    cfg.telegraph.bin_width_s = parse_double(where, value);
                else if (key == "background_jump_rate_per_min")
                    cfg.telegraph.background_jump_rate_per_min = parse_double(where, value);
                else if (key == "start_state") {
                    if (value == "bright")
                        cfg.telegraph.start_state = IonState::bright;
                    else if (value == "dark")
                        cfg.telegraph.start_state = IonState::dark;
                    else
                        throw ValidationError(where + ": expected bright or dark, got '" +
                                              value + "'");
                } else if (key == "detection_threshold_fraction")
                    cfg.telegraph.detection_threshold_fraction = parse_double(where, value);
                else if (key == "detection_min_run")
                    cfg.telegraph.detection_min_run =
                        static_cast<std::size_t>(parse_u64(where, value));
                else
                    throw ValidationError("unknown key '" + key + "' in section [telegraph]");
            } else if (section == "scan") {
                if (key == "temp_start_c")
                    cfg.scan.temp_start_c = parse_double(where, value);
                else if (key == "temp_stop_c")
                    cfg.scan.temp_stop_c = parse_double(where, value);
                else if (key == "temp_points")
                    cfg.scan.temp_points = static_cast<std::size_t>(parse_u64(where, value));
                else if (key == "freq_start_mhz")
                    cfg.scan.freq_start_mhz = parse_double(where, value);
                else if (key == "freq_stop_mhz")
                    cfg.scan.freq_stop_mhz = parse_double(where, value);
                else if (key == "freq_points")
                    cfg.scan.freq_points = static_cast<std::size_t>(parse_u64(where, value));
                else if (key == "mc_duration_per_point_s")
                    cfg.scan.mc_duration_per_point_s = parse_double(where, value);
                else if (key == "mc_bin_width_s")
                    cfg.scan.mc_bin_width_s = parse_double(where, value);
                else if (key == "freq_sub_measurements")
                    cfg.scan.freq_sub_measurements =
                        static_cast<std::size_t>(parse_u64(where, value));
                else if (key == "freq_sub_duration_s")
                    cfg.scan.freq_sub_duration_s = parse_double(where, value);
                else if (key == "peak_rate_per_min") {
                    if (value == "auto")
                        cfg.scan.peak_rate_per_min = -1.0;
                    else
                        cfg.scan.peak_rate_per_min = parse_double(where, value);
                } else
                    throw ValidationError("unknown key '" + key + "' in section [scan]");
            } else if (section == "rng") {
                if (key == "master_seed")
                    cfg.rng.master_seed = parse_u64(where, value);
                else
                    throw ValidationError("unknown key '" + key + "' in section [rng]");
            } else {
                throw ValidationError("unknown section [" + section + "]");
            }
        }
    }
    cfg.validate();
    cfg.digest = content_digest(cfg.canonical_text());
    return cfg;
}

void ExperimentConfig::validate() const {
    atom.validate();
    spdc.validate();
    filter.validate();
    coupling.validate();
    telegraph.validate();
    scan.validate();
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out << "[atom]\n";
    out << "absorption_bandwidth_mhz=" << format_double(atom.absorption_bandwidth_mhz) << "\n";
    out << "dark_dwell_mean_s=" << format_double(atom.dark_dwell_mean_s) << "\n";
    out << "natural_fwhm_mhz=" << format_double(atom.natural_fwhm_mhz) << "\n";
    out << "zeeman_broadening_mhz=" << format_double(atom.zeeman_broadening_mhz) << "\n";
    out << "[coupling]\n";
    out << "branching_to_d52=" << format_double(coupling.branching_to_d52) << "\n";
    out << "d32_population=" << format_double(coupling.d32_population) << "\n";
    out << "dipole_fraction=" << format_double(coupling.dipole_fraction) << "\n";
    out << "geometric_overlap=" << format_double(coupling.geometric_overlap) << "\n";
    out << "polarization_match=" << format_double(coupling.polarization_match) << "\n";
    out << "[filter]\n";
    out << "cavity_fwhm_mhz=";
    for (std::size_t i = 0; i < filter.cavity_fwhms_mhz.size(); ++i)
        out << (i ? "," : "") << format_double(filter.cavity_fwhms_mhz[i]);
    out << "\n";
    out << "detuning_offset_mhz=" << format_double(filter.detuning_offset_mhz) << "\n";
    out << "peak_transmission=" << format_double(filter.peak_transmission) << "\n";
    out << "[rng]\n";
    out << "master_seed=" << rng.master_seed << "\n";
    out << "[scan]\n";
    out << "freq_points=" << scan.freq_points << "\n";
    out << "freq_start_mhz=" << format_double(scan.freq_start_mhz) << "\n";
    out << "freq_stop_mhz=" << format_double(scan.freq_stop_mhz) << "\n";
    out << "freq_sub_duration_s=" << format_double(scan.freq_sub_duration_s) << "\n";
    out << "freq_sub_measurements=" << scan.freq_sub_measurements << "\n";
    out << "mc_bin_width_s=" << format_double(scan.mc_bin_width_s) << "\n";
    out << "mc_duration_per_point_s=" << format_double(scan.mc_duration_per_point_s) << "\n";
    out << "peak_rate_per_min="
        << (scan.peak_rate_is_auto() ? "auto" : format_double(scan.peak_rate_per_min))
        << "\n";
    out << "temp_points=" << scan.temp_points << "\n";
    out << "temp_start_c=" << format_double(scan.temp_start_c) << "\n";
    out << "temp_stop_c=" << format_double(scan.temp_stop_c) << "\n";
    out << "[spdc]\n";
    out << "envelope_fwhm_ghz=" << format_double(spdc.envelope_fwhm_ghz) << "\n";
    out << "envelope_shape="
        << (spdc.envelope_shape == EnvelopeShape::gaussian ? "gaussian" : "sinc-squared")
        << "\n";
    out << "peak_flux_density=" << format_double(spdc.peak_flux_density) << "\n";
    out << "ref_temperature_c=" << format_double(spdc.ref_temperature_c) << "\n";
    out << "temp_slope_ghz_per_c=" << format_double(spdc.temp_slope_ghz_per_c) << "\n";
    out << "[telegraph]\n";
    out << "background_jump_rate_per_min="
        << format_double(telegraph.background_jump_rate_per_min) << "\n";
    out << "bin_width_s=" << format_double(telegraph.bin_width_s) << "\n";
    out << "bright_count_rate=" << format_double(telegraph.bright_count_rate) << "\n";
    out << "dark_count_rate=" << format_double(telegraph.dark_count_rate) << "\n";
    out << "detection_min_run=" << telegraph.detection_min_run << "\n";
    out << "detection_threshold_fraction="
        << format_double(telegraph.detection_threshold_fraction) << "\n";
    out << "start_state=" << (telegraph.start_state == IonState::bright ? "bright" : "dark")
        << "\n";
    return out.str();
}

TelegraphParams ExperimentConfig::telegraph_params(double total_jump_rate_per_min) const {
    TelegraphParams p;
    p.bright_to_dark_rate = total_jump_rate_per_min / 60.0;
    p.dark_to_bright_rate = 1.0 / atom.dark_dwell_mean_s;
    p.bright_count_rate = telegraph.bright_count_rate;
    p.dark_count_rate = telegraph.dark_count_rate;
    return p;
}

double ExperimentConfig::detection_threshold_counts(double bin_width_s) const {
    const double dark = telegraph.dark_count_rate * bin_width_s;
    const double bright = telegraph.bright_count_rate * bin_width_s;
    return dark + telegraph.detection_threshold_fraction * (bright - dark);
}

std::string content_digest(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace qjump
