// scmimo - single-carrier massive MIMO frequency-domain precoding simulator
// Copyright (C) 2025-2026 the scmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scmimo/common.hpp"
#include "scmimo/sim.hpp"

namespace scmimo {

/// Tool-level settings: the sweep configuration plus table generation,
/// complexity sweep and output parameters. Flat key=value text files with
/// '#' comments; CLI flags override file values.
struct run_settings {
    system_config sys;

    // sweep grid specification (materialized into sys.snr_db_grid)
    double snr_start_db = -20.0;
    double snr_stop_db = 30.0;
    double snr_step_db = 5.0;

    std::string table_path;
    std::string out_dir = "out";
    bool validate_model = true;

    // `tables` command
    int table_m = 64;
    std::vector<int> table_k_values = {4, 8, 16, 32};
    double table_snr_start_db = -20.0;
    double table_snr_stop_db = 30.0;
    double table_snr_step_db = 1.0;
    std::size_t table_draws = 10000;

    // `complexity` command
    std::vector<int> complexity_m_list = {32, 64, 128};
    int complexity_k_max = 64;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw config_error("config: key '" + key + "' expects on/off, got '" + v + "'");
}

inline double parse_num(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' expects a number, got '" + v + "'");
    }
    if (pos != v.size())
        throw config_error("config: key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    const double d = parse_num(key, v);
    const long long i = static_cast<long long>(d);
    if (static_cast<double>(i) != d)
        throw config_error("config: key '" + key + "' expects an integer, got '" + v + "'");
    return i;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<int>(parse_int(key, item)));
    }
    if (out.empty()) throw config_error("config: key '" + key + "' expects a comma list");
    return out;
}

}  // namespace detail

/// Applies one key=value setting. Unknown keys are rejected so that typos in
/// config files or --set overrides fail loudly instead of being ignored.
inline void apply_setting(run_settings& rs, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_int;
    using detail::parse_int_list;
    using detail::parse_num;

    if (key == "m") rs.sys.m = static_cast<int>(parse_int(key, value));
    else if (key == "k") rs.sys.k = static_cast<int>(parse_int(key, value));
    else if (key == "n") rs.sys.n = static_cast<int>(parse_int(key, value));
    else if (key == "l_h") rs.sys.l_h = static_cast<int>(parse_int(key, value));
    else if (key == "l_cp") rs.sys.l_cp = static_cast<int>(parse_int(key, value));
    else if (key == "pdp_rolloff") rs.sys.pdp_rolloff = parse_num(key, value);
    else if (key == "channel_power_spread") rs.sys.channel_power_spread = parse_bool(key, value);
    else if (key == "snr_start_db") rs.snr_start_db = parse_num(key, value);
    else if (key == "snr_stop_db") rs.snr_stop_db = parse_num(key, value);
    else if (key == "snr_step_db") rs.snr_step_db = parse_num(key, value);
    else if (key == "frames_per_point") rs.sys.frames_per_point = static_cast<int>(parse_int(key, value));
    else if (key == "precoder") {
        if (value == "zf") { rs.sys.run_zf = true; rs.sys.run_rzf = false; }
        else if (value == "rzf") { rs.sys.run_zf = false; rs.sys.run_rzf = true; }
        else if (value == "both") { rs.sys.run_zf = true; rs.sys.run_rzf = true; }
        else throw config_error("config: precoder must be zf, rzf or both");
    }
    else if (key == "power_opt") rs.sys.power_opt = parse_bool(key, value);
    else if (key == "excess_path_loss_db_lo") rs.sys.excess_path_loss_db_lo = parse_num(key, value);
    else if (key == "excess_path_loss_db_hi") rs.sys.excess_path_loss_db_hi = parse_num(key, value);
    else if (key == "modulation") {
        if (value == "qpsk") rs.sys.mod = modulation::qpsk;
        else if (value == "qam16") rs.sys.mod = modulation::qam16;
        else if (value == "qam64") rs.sys.mod = modulation::qam64;
        else throw config_error("config: modulation must be qpsk, qam16 or qam64");
    }
    else if (key == "seed") rs.sys.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "threads") rs.sys.threads = static_cast<unsigned>(parse_int(key, value));
    else if (key == "table") rs.table_path = value;
    else if (key == "out_dir") rs.out_dir = value;
    else if (key == "validate_model") rs.validate_model = parse_bool(key, value);
    else if (key == "table_m") rs.table_m = static_cast<int>(parse_int(key, value));
    else if (key == "table_k_values") rs.table_k_values = parse_int_list(key, value);
    else if (key == "table_snr_start_db") rs.table_snr_start_db = parse_num(key, value);
    else if (key == "table_snr_stop_db") rs.table_snr_stop_db = parse_num(key, value);
    else if (key == "table_snr_step_db") rs.table_snr_step_db = parse_num(key, value);
    else if (key == "table_draws") rs.table_draws = static_cast<std::size_t>(parse_int(key, value));
    else if (key == "complexity_m_list") rs.complexity_m_list = parse_int_list(key, value);
    else if (key == "complexity_k_max") rs.complexity_k_max = static_cast<int>(parse_int(key, value));
    else throw config_error("config: unknown key '" + key + "'");
}

inline void load_config_file(run_settings& rs, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw config_error("config: cannot open " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: " + path.string() + ":" + std::to_string(line_no) +
                               ": expected key = value");
        apply_setting(rs, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

/// Builds an inclusive dB grid from start/stop/step.
inline std::vector<double> make_db_grid(double start, double stop, double step) {
    if (step <= 0.0) throw config_error("config: SNR step must be > 0");
    if (stop < start) throw config_error("config: SNR stop must be >= start");
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double v = start + step * i;
        if (v > stop + 1e-9) break;
        grid.push_back(v);
    }
    return grid;
}

/// Materializes the sweep grid. Call after all settings are applied.
inline void finalize_settings(run_settings& rs) {
    rs.sys.snr_db_grid = make_db_grid(rs.snr_start_db, rs.snr_stop_db, rs.snr_step_db);
}

}  // namespace scmimo
