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
#include <vector>

#include "scmimo/channel.hpp"  // detail::put_raw / get_raw / endian guard
#include "scmimo/common.hpp"
#include "scmimo/parallel.hpp"
#include "scmimo/wishart.hpp"

namespace scmimo {

/// One (K, sigma2_w) grid point of precomputed scale factors.
struct scalar_entry {
    double sigma2_w = 0.0;
    double lambda_beta = 0.0;
    double beta_rzf = 0.0;
    double lambda_alpha = 0.0;
    double alpha = 0.0;
    double sigma2_od = 0.0;
    double sigma2_od_stderr = 0.0;
};

/// Checks the algebraic ties between the stored fields.
inline bool scalar_entry_consistent(const scalar_entry& e, double tol = 1e-12) {
    if (!(e.sigma2_w > 0.0) || !(e.lambda_beta > 0.0) || !(e.lambda_alpha > 0.0)) return false;
    if (e.sigma2_od < 0.0) return false;
    const double x = e.sigma2_w * e.lambda_alpha;
    if (!(x > 0.0 && x < 1.0)) return false;
    if (std::abs(e.alpha * (1.0 - x) - 1.0) > tol) return false;
    if (std::abs(e.beta_rzf * std::sqrt(e.lambda_beta) - 1.0) > tol) return false;
    return true;
}

/// 2-D lookup table over (K, input SNR) for a fixed antenna count M.
/// Entries are stored K-major: entry(ki, si) = entries[ki * n_snr + si].
struct scalar_table {
    int num_antennas = 0;  // M
    std::vector<int> k_values;
    std::vector<double> snr_grid_db;
    std::uint64_t draws = 0;
    std::uint64_t seed = 0;
    std::vector<scalar_entry> entries;

    const scalar_entry& entry(std::size_t ki, std::size_t si) const {
        return entries[ki * snr_grid_db.size() + si];
    }
    scalar_entry& entry(std::size_t ki, std::size_t si) {
        return entries[ki * snr_grid_db.size() + si];
    }
};

/// Dense table build. Grid points are independent, so construction runs in
/// parallel with per-point derived seeds; threaded and serial builds are
/// identical. Numerical failures are rethrown with the grid coordinates.
inline scalar_table build_table(int num_antennas, std::vector<int> k_values,
                                std::vector<double> snr_grid_db, std::size_t draws,
                                std::uint64_t seed, unsigned threads = 0) {
    if (k_values.empty() || snr_grid_db.empty())
        throw config_error("build_table: empty K or SNR grid");
    if (!std::is_sorted(k_values.begin(), k_values.end()) ||
        !std::is_sorted(snr_grid_db.begin(), snr_grid_db.end()))
        throw config_error("build_table: grids must be sorted ascending");
    for (int k : k_values) wishart_spec{num_antennas, k}.validate();

    scalar_table table;
    table.num_antennas = num_antennas;
    table.k_values = std::move(k_values);
    table.snr_grid_db = std::move(snr_grid_db);
    table.draws = draws;
    table.seed = seed;
    table.entries.resize(table.k_values.size() * table.snr_grid_db.size());

    const std::size_t n_snr = table.snr_grid_db.size();
    parallel_for(table.entries.size(), threads, [&](std::size_t idx) {
        const std::size_t ki = idx / n_snr;
        const std::size_t si = idx % n_snr;
        const wishart_spec spec{table.num_antennas, table.k_values[ki]};
        const double snr_db = table.snr_grid_db[si];
        const double s2 = sigma2_from_snr_db(snr_db);
        try {
            scalar_entry e;
            e.sigma2_w = s2;
            e.lambda_beta = compute_lambda_beta(spec, s2);
            e.beta_rzf = compute_beta_rzf(e.lambda_beta);
            e.lambda_alpha = compute_lambda_alpha(spec, s2);
            e.alpha = compute_alpha(e.lambda_alpha, s2);
            const mc_estimate od = compute_sigma2_od(spec, s2, draws, derive_seed(seed, ki, si));
            e.sigma2_od = od.value;
            e.sigma2_od_stderr = od.std_error;
            table.entry(ki, si) = e;
        } catch (const std::exception& ex) {
            throw numeric_error("build_table failed at K=" + std::to_string(table.k_values[ki]) +
                                ", snr_db=" + std::to_string(snr_db) + ": " + ex.what());
        }
    });
    return table;
}

/// Table lookup by (K, sigma2_w). K must be tabulated exactly. The SNR axis
/// snaps to a grid point when within 1e-9 dB (returning the stored entry),
/// otherwise the primitive quantities (lambda_beta, lambda_alpha, sigma2_od)
/// are interpolated linearly in dB and alpha/beta_rzf re-derived, keeping the
/// entry self-consistent. No extrapolation.
inline scalar_entry lookup(const scalar_table& table, int num_users, double sigma2_w) {
    const auto kit = std::find(table.k_values.begin(), table.k_values.end(), num_users);
    if (kit == table.k_values.end()) {
        std::string ks;
        for (int k : table.k_values) ks += (ks.empty() ? "" : ", ") + std::to_string(k);
        throw std::out_of_range("scalar_table lookup: K=" + std::to_string(num_users) +
                                " not tabulated (available: " + ks + ")");
    }
    const std::size_t ki = static_cast<std::size_t>(kit - table.k_values.begin());
    if (!(sigma2_w > 0.0)) throw std::invalid_argument("scalar_table lookup: sigma2_w must be > 0");

    const double snr_db = snr_db_from_sigma2(sigma2_w);
    const double lo = table.snr_grid_db.front(), hi = table.snr_grid_db.back();
    constexpr double kSnapTolDb = 1e-9;
    if (snr_db < lo - kSnapTolDb || snr_db > hi + kSnapTolDb)
        throw std::out_of_range("scalar_table lookup: snr_db=" + std::to_string(snr_db) +
                                " outside tabulated range [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "] dB; no extrapolation");

    const auto& grid = table.snr_grid_db;
    auto it = std::lower_bound(grid.begin(), grid.end(), snr_db);
    std::size_t hi_idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - grid.begin(), static_cast<std::ptrdiff_t>(grid.size()) - 1));
    std::size_t lo_idx = hi_idx > 0 ? hi_idx - 1 : 0;
    if (std::abs(grid[hi_idx] - snr_db) <= kSnapTolDb) return table.entry(ki, hi_idx);
    if (std::abs(grid[lo_idx] - snr_db) <= kSnapTolDb) return table.entry(ki, lo_idx);

    const scalar_entry& a = table.entry(ki, lo_idx);
    const scalar_entry& b = table.entry(ki, hi_idx);
    const double t = (snr_db - grid[lo_idx]) / (grid[hi_idx] - grid[lo_idx]);
    scalar_entry e;
    e.sigma2_w = sigma2_w;
    e.lambda_beta = a.lambda_beta + t * (b.lambda_beta - a.lambda_beta);
    e.lambda_alpha = a.lambda_alpha + t * (b.lambda_alpha - a.lambda_alpha);
    e.sigma2_od = a.sigma2_od + t * (b.sigma2_od - a.sigma2_od);
    e.sigma2_od_stderr = a.sigma2_od_stderr + t * (b.sigma2_od_stderr - a.sigma2_od_stderr);
    e.beta_rzf = compute_beta_rzf(e.lambda_beta);
    e.alpha = compute_alpha(e.lambda_alpha, sigma2_w);
    return e;
}

// --- table file formats -----------------------------------------------------
// Binary (little-endian): magic "SCMTBL1\0", u32 version = 1, u32 M,
// u32 n_k, u32 n_snr, u64 draws, u64 seed, i32 k_values[n_k],
// f64 snr_grid_db[n_snr], then n_k * n_snr entries in K-major order, each
// as 7 f64: sigma2_w, lambda_beta, beta_rzf, lambda_alpha, alpha,
// sigma2_od, sigma2_od_stderr.
// CSV is the interchange form; its column order is fixed.

inline void save_table_binary(const scalar_table& table, const std::filesystem::path& path) {
    detail::require_little_endian();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("save_table_binary: cannot open " + path.string());
    os.write("SCMTBL1\0", 8);
    detail::put_raw(os, static_cast<std::uint32_t>(1));
    detail::put_raw(os, static_cast<std::uint32_t>(table.num_antennas));
    detail::put_raw(os, static_cast<std::uint32_t>(table.k_values.size()));
    detail::put_raw(os, static_cast<std::uint32_t>(table.snr_grid_db.size()));
    detail::put_raw(os, table.draws);
    detail::put_raw(os, table.seed);
    for (int k : table.k_values) detail::put_raw(os, static_cast<std::int32_t>(k));
    for (double s : table.snr_grid_db) detail::put_raw(os, s);
    for (const auto& e : table.entries) {
        detail::put_raw(os, e.sigma2_w);
        detail::put_raw(os, e.lambda_beta);
        detail::put_raw(os, e.beta_rzf);
        detail::put_raw(os, e.lambda_alpha);
        detail::put_raw(os, e.alpha);
        detail::put_raw(os, e.sigma2_od);
        detail::put_raw(os, e.sigma2_od_stderr);
    }
    if (!os) throw config_error("save_table_binary: write failed for " + path.string());
}

inline scalar_table load_table_binary(const std::filesystem::path& path) {
    detail::require_little_endian();
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("load_table_binary: cannot open " + path.string());
    char magic[8] = {};
    is.read(magic, 8);
    if (std::string(magic, 7) != "SCMTBL1")
        throw config_error("load_table_binary: bad magic in " + path.string());
    std::uint32_t version = 0, m = 0, n_k = 0, n_snr = 0;
    detail::get_raw(is, version);
    if (version != 1)
        throw config_error("load_table_binary: unsupported format version " +
                           std::to_string(version));
    detail::get_raw(is, m);
    detail::get_raw(is, n_k);
    detail::get_raw(is, n_snr);
    scalar_table table;
    table.num_antennas = static_cast<int>(m);
    detail::get_raw(is, table.draws);
    detail::get_raw(is, table.seed);
    table.k_values.resize(n_k);
    for (auto& k : table.k_values) {
        std::int32_t v = 0;
        detail::get_raw(is, v);
        k = v;
    }
    table.snr_grid_db.resize(n_snr);
    for (auto& s : table.snr_grid_db) detail::get_raw(is, s);
    table.entries.resize(static_cast<std::size_t>(n_k) * n_snr);
    for (auto& e : table.entries) {
        detail::get_raw(is, e.sigma2_w);
        detail::get_raw(is, e.lambda_beta);
        detail::get_raw(is, e.beta_rzf);
        detail::get_raw(is, e.lambda_alpha);
        detail::get_raw(is, e.alpha);
        detail::get_raw(is, e.sigma2_od);
        detail::get_raw(is, e.sigma2_od_stderr);
    }
    if (!is) throw config_error("load_table_binary: truncated file " + path.string());
    return table;
}

inline void export_table_csv(const scalar_table& table, std::ostream& os) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "# scmimo scalar table: M=%d, draws=%llu, seed=%llu\n",
                  table.num_antennas, static_cast<unsigned long long>(table.draws),
                  static_cast<unsigned long long>(table.seed));
    os << buf;
    os << "K,snr_db,sigma2_w,lambda_beta,beta_rzf,lambda_alpha,alpha,sigma2_od,sigma2_od_stderr\n";
    for (std::size_t ki = 0; ki < table.k_values.size(); ++ki) {
        for (std::size_t si = 0; si < table.snr_grid_db.size(); ++si) {
            const auto& e = table.entry(ki, si);
            std::snprintf(buf, sizeof(buf),
                          "%d,%.10g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          table.k_values[ki], table.snr_grid_db[si], e.sigma2_w, e.lambda_beta,
                          e.beta_rzf, e.lambda_alpha, e.alpha, e.sigma2_od, e.sigma2_od_stderr);
            os << buf;
        }
    }
}

inline void export_table_csv(const scalar_table& table, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw config_error("export_table_csv: cannot open " + path.string());
    export_table_csv(table, os);
    if (!os) throw config_error("export_table_csv: write failed for " + path.string());
}

}  // namespace scmimo
