#pragma once

// Flat-section key=value configuration files and dotted-key overrides.
// Sections: [system], [bath], [grid], [schedule], [run]; the full key list is
// documented in the README and in apply_key below.

#include <map>
#include <string>
#include <vector>

#include "nmopt/classical.hpp"
#include "nmopt/model.hpp"
#include "nmopt/spectral.hpp"

namespace nmopt {

enum class RunMode { KernelPath, MomentsOracle, Both };

struct RunConfig {
    SystemParams system;
    bool thermal_equilibrium = false;
    SpectralModel bath;
    std::size_t quad_nodes = 0;        ///< 0 = model default (512 / 256)
    double channel_window = 1.0;
    TimeGrid grid;
    Schedule schedule;

    RunMode mode = RunMode::KernelPath;
    DriveModel drive_model = DriveModel::Locked;
    bool constant_G = false;
    bool rwa = false;
    bool markovian = false;
    std::size_t bath_modes = 0;        ///< K for the moments path; 0 = default
    double oracle_band_min = 0.0;      ///< 0/0 = model default band
    double oracle_band_max = 0.0;
    double compare_tol_rel = 0.02;
    double compare_tol_abs = 0.05;
};

/// Parse a config file. Throws std::runtime_error with a descriptive message
/// on syntax errors or unknown keys.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// Apply one `section.key=value` override.
void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Serialize back to the INI form; load_config(to_ini(cfg)) reproduces every
/// field bit-exactly for decimal inputs of <= 12 significant digits.
std::string to_ini(const RunConfig& cfg);

/// Semantic validation on top of model::validate (mode/bath consistency).
Validated validate_config(const RunConfig& cfg);

/// Effective K and oracle band after defaults are resolved.
std::size_t resolved_bath_modes(const RunConfig& cfg);
std::pair<double, double> resolved_oracle_band(const RunConfig& cfg);

/// Format a double with 12 significant digits (the CSV/manifest convention).
std::string format_g12(double v);

}  // namespace nmopt
