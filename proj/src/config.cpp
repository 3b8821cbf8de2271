#include "nmopt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nmopt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("config: invalid number for " + key + ": '" + v + "'");
    }
    if (pos != v.size())
        throw std::runtime_error("config: trailing characters for " + key + ": '" + v + "'");
    return x;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x < 0 || x != std::floor(x))
        throw std::runtime_error("config: " + key + " must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: invalid boolean for " + key + ": '" + v + "'");
}

// "t1:v1; t2:v2" switch lists
std::vector<std::pair<double, double>> parse_steps(const std::string& key,
                                                   const std::string& v) {
    std::vector<std::pair<double, double>> steps;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("config: expected 'time:value' in " + key);
        steps.emplace_back(parse_double(key, trim(item.substr(0, colon))),
                           parse_double(key, trim(item.substr(colon + 1))));
    }
    return steps;
}

void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string full = section + "." + key;
    auto& sys = cfg.system;
    if (section == "system") {
        if (key == "omega_m") sys.omega_m = parse_double(full, value);
        else if (key == "delta_c") sys.delta_c = parse_double(full, value);
        else if (key == "kappa") sys.kappa = parse_double(full, value);
        else if (key == "g0") sys.g0 = parse_double(full, value);
        else if (key == "drive_E") sys.drive_E = parse_double(full, value);
        else if (key == "m0") sys.m0 = parse_double(full, value);
        else if (key == "n0") sys.n0 = parse_double(full, value);
        else if (key == "temperature_ratio") sys.temperature_ratio = parse_double(full, value);
        else if (key == "alpha0_abs")
            sys.alpha0 = std::polar(parse_double(full, value), std::arg(sys.alpha0));
        else if (key == "alpha0_phase")
            sys.alpha0 = std::polar(std::abs(sys.alpha0), parse_double(full, value));
        else if (key == "beta0_abs")
            sys.beta0 = std::polar(parse_double(full, value), std::arg(sys.beta0));
        else if (key == "beta0_phase")
            sys.beta0 = std::polar(std::abs(sys.beta0), parse_double(full, value));
        else if (key == "gamma_m") sys.gamma_m = parse_double(full, value);
        else if (key == "thermal_equilibrium") cfg.thermal_equilibrium = parse_bool(full, value);
        else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "bath") {
        auto& b = cfg.bath;
        if (key == "model") {
            if (value == "ohmic") b.kind = SpectralModel::Kind::OhmicFamily;
            else if (value == "band_power_law") b.kind = SpectralModel::Kind::BandPowerLaw;
            else if (value == "flat") b.kind = SpectralModel::Kind::Flat;
            else throw std::runtime_error("config: unknown bath.model '" + value + "'");
        } else if (key == "eta") b.eta = parse_double(full, value);
        else if (key == "s") b.s = parse_double(full, value);
        else if (key == "omega0") b.omega0 = parse_double(full, value);
        else if (key == "k") b.k = parse_double(full, value);
        else if (key == "band_min") b.band_min = parse_double(full, value);
        else if (key == "band_max") b.band_max = parse_double(full, value);
        else if (key == "c_fixed_at") {
            if (value == "omega_m") b.c_fixed_at_omega_m = true;
            else if (value == "none") b.c_fixed_at_omega_m = false;
            else throw std::runtime_error("config: bath.c_fixed_at must be none|omega_m");
        } else if (key == "quad_nodes") cfg.quad_nodes = parse_size(full, value);
        else if (key == "channel_window") cfg.channel_window = parse_double(full, value);
        else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "grid") {
        if (key == "dt") cfg.grid.dt = parse_double(full, value);
        else if (key == "n_steps") cfg.grid.n_steps = parse_size(full, value);
        else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "schedule") {
        if (key == "kappa_steps") cfg.schedule.kappa_steps = parse_steps(full, value);
        else if (key == "drive_steps") cfg.schedule.drive_steps = parse_steps(full, value);
        else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "run") {
        if (key == "mode") {
            if (value == "kernel") cfg.mode = RunMode::KernelPath;
            else if (value == "moments") cfg.mode = RunMode::MomentsOracle;
            else if (value == "both") cfg.mode = RunMode::Both;
            else throw std::runtime_error("config: run.mode must be kernel|moments|both");
        } else if (key == "drive_model") {
            if (value == "locked") cfg.drive_model = DriveModel::Locked;
            else if (value == "self_consistent") cfg.drive_model = DriveModel::SelfConsistent;
            else throw std::runtime_error(
                "config: run.drive_model must be locked|self_consistent");
        } else if (key == "constant_G") cfg.constant_G = parse_bool(full, value);
        else if (key == "rwa") cfg.rwa = parse_bool(full, value);
        else if (key == "markovian") cfg.markovian = parse_bool(full, value);
        else if (key == "bath_modes") cfg.bath_modes = parse_size(full, value);
        else if (key == "oracle_band_min") cfg.oracle_band_min = parse_double(full, value);
        else if (key == "oracle_band_max") cfg.oracle_band_max = parse_double(full, value);
        else if (key == "compare_tol_rel") cfg.compare_tol_rel = parse_double(full, value);
        else if (key == "compare_tol_abs") cfg.compare_tol_abs = parse_double(full, value);
        else throw std::runtime_error("config: unknown key " + full);
    } else {
        throw std::runtime_error("config: unknown section [" + section + "]");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos &&
            (comment == 0 || line.find('=') == std::string::npos ||
             comment < line.find('=')))
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config: malformed section at line " +
                                         std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key=value at line " +
                                     std::to_string(lineno));
        if (section.empty())
            throw std::runtime_error("config: key outside any section at line " +
                                     std::to_string(lineno));
        apply_key(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos)
        throw std::runtime_error("override: expected section.key, got '" + dotted_key + "'");
    apply_key(cfg, dotted_key.substr(0, dot), dotted_key.substr(dot + 1), value);
}

std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string to_ini(const RunConfig& cfg) {
    std::ostringstream out;
    const auto& s = cfg.system;
    out << "[system]\n";
    out << "omega_m = " << format_g12(s.omega_m) << "\n";
    out << "delta_c = " << format_g12(s.delta_c) << "\n";
    out << "kappa = " << format_g12(s.kappa) << "\n";
    out << "g0 = " << format_g12(s.g0) << "\n";
    out << "drive_E = " << format_g12(s.drive_E) << "\n";
    out << "m0 = " << format_g12(s.m0) << "\n";
    out << "n0 = " << format_g12(s.n0) << "\n";
    out << "temperature_ratio = " << format_g12(s.temperature_ratio) << "\n";
    out << "alpha0_abs = " << format_g12(std::abs(s.alpha0)) << "\n";
    out << "alpha0_phase = " << format_g12(std::arg(s.alpha0)) << "\n";
    out << "beta0_abs = " << format_g12(std::abs(s.beta0)) << "\n";
    out << "beta0_phase = " << format_g12(std::arg(s.beta0)) << "\n";
    out << "gamma_m = " << format_g12(s.gamma_m) << "\n";
    out << "thermal_equilibrium = " << (cfg.thermal_equilibrium ? "true" : "false") << "\n";
    out << "\n[bath]\n";
    switch (cfg.bath.kind) {
        case SpectralModel::Kind::OhmicFamily: out << "model = ohmic\n"; break;
        case SpectralModel::Kind::BandPowerLaw: out << "model = band_power_law\n"; break;
        case SpectralModel::Kind::Flat: out << "model = flat\n"; break;
    }
    out << "eta = " << format_g12(cfg.bath.eta) << "\n";
    out << "s = " << format_g12(cfg.bath.s) << "\n";
    out << "omega0 = " << format_g12(cfg.bath.omega0) << "\n";
    out << "k = " << format_g12(cfg.bath.k) << "\n";
    out << "band_min = " << format_g12(cfg.bath.band_min) << "\n";
    out << "band_max = " << format_g12(cfg.bath.band_max) << "\n";
    out << "c_fixed_at = " << (cfg.bath.c_fixed_at_omega_m ? "omega_m" : "none") << "\n";
    out << "quad_nodes = " << cfg.quad_nodes << "\n";
    out << "channel_window = " << format_g12(cfg.channel_window) << "\n";
    out << "\n[grid]\n";
    out << "dt = " << format_g12(cfg.grid.dt) << "\n";
    out << "n_steps = " << cfg.grid.n_steps << "\n";
    out << "\n[schedule]\n";
    auto steps_str = [](const std::vector<std::pair<double, double>>& steps) {
        std::string acc;
        for (const auto& [t, v] : steps) {
            if (!acc.empty()) acc += "; ";
            acc += format_g12(t) + ":" + format_g12(v);
        }
        return acc;
    };
    out << "kappa_steps = " << steps_str(cfg.schedule.kappa_steps) << "\n";
    out << "drive_steps = " << steps_str(cfg.schedule.drive_steps) << "\n";
    out << "\n[run]\n";
    out << "mode = "
        << (cfg.mode == RunMode::KernelPath
                ? "kernel"
                : (cfg.mode == RunMode::MomentsOracle ? "moments" : "both"))
        << "\n";
    out << "drive_model = "
        << (cfg.drive_model == DriveModel::Locked ? "locked" : "self_consistent") << "\n";
    out << "constant_G = " << (cfg.constant_G ? "true" : "false") << "\n";
    out << "rwa = " << (cfg.rwa ? "true" : "false") << "\n";
    out << "markovian = " << (cfg.markovian ? "true" : "false") << "\n";
    out << "bath_modes = " << cfg.bath_modes << "\n";
    out << "oracle_band_min = " << format_g12(cfg.oracle_band_min) << "\n";
    out << "oracle_band_max = " << format_g12(cfg.oracle_band_max) << "\n";
    out << "compare_tol_rel = " << format_g12(cfg.compare_tol_rel) << "\n";
    out << "compare_tol_abs = " << format_g12(cfg.compare_tol_abs) << "\n";
    return out.str();
}

Validated validate_config(const RunConfig& cfg) {
    Validated v = validate(cfg.system, cfg.grid, cfg.schedule, cfg.thermal_equilibrium);
    if (cfg.markovian && !cfg.bath.is_flat())
        v.errors.push_back("run.markovian requires bath.model = flat");
    if (cfg.bath.is_flat() && !cfg.markovian)
        v.errors.push_back("bath.model = flat requires run.markovian = true");
    if (cfg.bath.kind == SpectralModel::Kind::BandPowerLaw &&
        !(cfg.bath.band_min > 0.0 && cfg.bath.band_max > cfg.bath.band_min))
        v.errors.push_back("bath band must satisfy 0 < band_min < band_max");
    if (cfg.bath.kind == SpectralModel::Kind::OhmicFamily &&
        (cfg.bath.eta < 0.0 || !(cfg.bath.omega0 > 0.0)))
        v.errors.push_back("ohmic bath requires eta >= 0 and omega0 > 0");
    if (cfg.oracle_band_min != 0.0 || cfg.oracle_band_max != 0.0) {
        if (!(cfg.oracle_band_max > cfg.oracle_band_min) || cfg.oracle_band_min < 0.0)
            v.errors.push_back("oracle band must satisfy 0 <= min < max");
    }
    return v;
}

std::size_t resolved_bath_modes(const RunConfig& cfg) {
    if (cfg.bath_modes != 0) return cfg.bath_modes;
    return cfg.bath.is_flat() ? 2000 : 600;
}

std::pair<double, double> resolved_oracle_band(const RunConfig& cfg) {
    if (cfg.oracle_band_min != 0.0 || cfg.oracle_band_max != 0.0)
        return {cfg.oracle_band_min, cfg.oracle_band_max};
    return default_oracle_band(cfg.bath, cfg.system);
}

}  // namespace nmopt
