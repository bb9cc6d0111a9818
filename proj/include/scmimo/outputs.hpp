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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scmimo/common.hpp"
#include "scmimo/sim.hpp"
#include "scmimo/svg.hpp"

namespace scmimo {

/// Canonical text form of the effective configuration; hashed into every
/// output file so results can be traced back to their exact settings.
inline std::string config_fingerprint(const system_config& cfg) {
    std::ostringstream os;
    os << "m=" << cfg.m << ";k=" << cfg.k << ";n=" << cfg.n << ";l_h=" << cfg.l_h
       << ";l_cp=" << cfg.l_cp << ";rolloff=" << cfg.pdp_rolloff
       << ";spread=" << cfg.channel_power_spread << ";snr=";
    for (double s : cfg.snr_db_grid) os << s << ",";
    os << ";frames=" << cfg.frames_per_point << ";zf=" << cfg.run_zf << ";rzf=" << cfg.run_rzf
       << ";power_opt=" << cfg.power_opt << ";excess=" << cfg.excess_path_loss_db_lo << ".."
       << cfg.excess_path_loss_db_hi << ";mod=" << to_string(cfg.mod) << ";seed=" << cfg.seed;
    return os.str();
}

inline std::string config_hash_hex(const system_config& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_fingerprint(cfg))));
    return buf;
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// results.csv columns (stable order):
//   precoder, snr_db, mean_gain_db, stderr_db, mean_gain_db_dbavg,
//   user_sinr_db_min, user_sinr_db_p25, user_sinr_db_median,
//   user_sinr_db_p75, user_sinr_db_max, tx_power_ratio
inline void write_results_csv(const sim_result& result, std::ostream& os) {
    os << "# scmimo results, config_hash=" << config_hash_hex(result.config)
       << ", seed=" << result.seed << "\n";
    os << "precoder,snr_db,mean_gain_db,stderr_db,mean_gain_db_dbavg,user_sinr_db_min,"
          "user_sinr_db_p25,user_sinr_db_median,user_sinr_db_p75,user_sinr_db_max,"
          "tx_power_ratio\n";
    char buf[512];
    for (const auto& rec : result.records) {
        std::vector<double> u(rec.per_user_sinr_db.data(),
                              rec.per_user_sinr_db.data() + rec.per_user_sinr_db.size());
        std::sort(u.begin(), u.end());
        std::snprintf(buf, sizeof(buf),
                      "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      to_string(rec.kind), rec.snr_db, rec.mean_gain_db, rec.gain_stderr_db,
                      rec.mean_gain_db_dbavg, detail::quantile_sorted(u, 0.0),
                      detail::quantile_sorted(u, 0.25), detail::quantile_sorted(u, 0.5),
                      detail::quantile_sorted(u, 0.75), detail::quantile_sorted(u, 1.0),
                      rec.tx_power_ratio);
        os << buf;
    }
}

// complexity.csv columns: m, k, zf_multiplies_per_bin, rzf_multiplies_per_bin
inline void write_complexity_csv(const std::vector<complexity_report>& rows, std::ostream& os,
                                 const std::string& stamp) {
    os << "# scmimo complexity, " << stamp << "\n";
    os << "m,k,zf_multiplies_per_bin,rzf_multiplies_per_bin\n";
    for (const auto& r : rows)
        os << r.num_antennas << "," << r.num_users << "," << r.zf_multiplies_per_bin << ","
           << r.rzf_multiplies_per_bin << "\n";
}

/// Gain-vs-SNR chart: one curve per precoder plus dashed reference levels at
/// the single-user bound M and the interference-free level M - K.
inline void write_gain_plot(const sim_result& result, const std::filesystem::path& path) {
    std::vector<svg_series> series;
    for (precoder_kind kind : {precoder_kind::rzf, precoder_kind::zf}) {
        svg_series s;
        s.name = kind == precoder_kind::rzf ? "RZF" : "ZF";
        s.color = kind == precoder_kind::rzf ? "#1f77b4" : "#d62728";
        for (const auto& rec : result.records)
            if (rec.kind == kind) s.points.emplace_back(rec.snr_db, rec.mean_gain_db);
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) return;
    const double lo = result.config.snr_db_grid.front();
    const double hi = result.config.snr_db_grid.back();
    svg_series ref_m{"M bound", "#999999", true, false,
                     {{lo, lin_to_db(result.config.m)}, {hi, lin_to_db(result.config.m)}}};
    svg_series ref_mk{"M-K level", "#bbbbbb", true, false,
                      {{lo, lin_to_db(result.config.m - result.config.k)},
                       {hi, lin_to_db(result.config.m - result.config.k)}}};
    series.push_back(std::move(ref_m));
    series.push_back(std::move(ref_mk));

    svg_plot_options opts;
    opts.title = "Output SINR / input SNR";
    opts.x_label = "input SNR [dB]";
    opts.y_label = "performance gain [dB]";
    opts.comment = "config_hash=" + config_hash_hex(result.config) +
                   " seed=" + std::to_string(result.seed);
    write_svg_plot(path, series, opts);
}

/// Complexity-vs-K chart (log y): a ZF/RZF curve pair per antenna count.
inline void write_complexity_plot(const std::vector<int>& m_values, int k_max,
                                  const std::filesystem::path& path,
                                  const std::string& stamp) {
    const std::vector<std::string> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                              "#9467bd", "#ff7f0e", "#8c564b"};
    std::vector<svg_series> series;
    std::size_t ci = 0;
    for (int m : m_values) {
        svg_series zf{"ZF M=" + std::to_string(m), palette[ci % palette.size()], false, false, {}};
        svg_series rzf{"RZF M=" + std::to_string(m), palette[ci % palette.size()], true, false, {}};
        for (int k = 1; k <= std::min(k_max, m - 1); ++k) {
            const complexity_report r = complexity(m, k);
            zf.points.emplace_back(k, static_cast<double>(r.zf_multiplies_per_bin));
            rzf.points.emplace_back(k, static_cast<double>(r.rzf_multiplies_per_bin));
        }
        series.push_back(std::move(zf));
        series.push_back(std::move(rzf));
        ++ci;
    }
    svg_plot_options opts;
    opts.title = "Complex multiplies per bin";
    opts.x_label = "number of users K";
    opts.y_label = "complex multiplies per bin";
    opts.log_y = true;
    opts.comment = stamp;
    write_svg_plot(path, series, opts);
}

/// Writes results.csv, complexity.csv and the two charts into out_dir.
/// An empty sweep still produces header-only CSV files (and no gain chart).
inline std::vector<std::filesystem::path> emit_outputs(const sim_result& result,
                                                       const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec && !std::filesystem::is_directory(out_dir))
        throw config_error("emit_outputs: cannot create directory " + out_dir.string());

    std::vector<std::filesystem::path> written;
    const std::string stamp = "config_hash=" + config_hash_hex(result.config) +
                              ", seed=" + std::to_string(result.seed);

    const auto results_path = out_dir / "results.csv";
    {
        std::ofstream os(results_path);
        if (!os) throw config_error("emit_outputs: cannot open " + results_path.string());
        write_results_csv(result, os);
        if (!os) throw config_error("emit_outputs: write failed for " + results_path.string());
    }
    written.push_back(results_path);

    const auto complexity_path = out_dir / "complexity.csv";
    {
        std::ofstream os(complexity_path);
        if (!os) throw config_error("emit_outputs: cannot open " + complexity_path.string());
        write_complexity_csv({result.complexity}, os, stamp);
        if (!os) throw config_error("emit_outputs: write failed for " +
                                    complexity_path.string());
    }
    written.push_back(complexity_path);

    if (!result.records.empty()) {
        const auto gain_path = out_dir / "gain_vs_snr.svg";
        write_gain_plot(result, gain_path);
        written.push_back(gain_path);

        const auto cplx_path = out_dir / "complexity_vs_k.svg";
        write_complexity_plot({result.config.m}, std::min(64, result.config.m - 1), cplx_path,
                              stamp);
        written.push_back(cplx_path);
    }
    return written;
}

}  // namespace scmimo
