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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "scmimo/config.hpp"
#include "scmimo/outputs.hpp"
#include "scmimo/sim.hpp"

namespace {

// exit codes: 0 ok, 1 unexpected, 2 configuration, 3 numerical, 4 invariant
constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInvariant = 4;

struct cli_overrides {
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> table_path;
    std::optional<long long> seed, m, k, n, frames, threads, draws, k_max;
    std::optional<double> snr_start, snr_end, snr_step;
    std::optional<std::string> precoder, power_opt, m_list, k_values;
    std::vector<std::string> sets;
};

void add_common_flags(CLI::App* app, cli_overrides& ov) {
    app->add_option("--config", ov.config_path, "config file (key = value lines)");
    app->add_option("--out", ov.out_dir, "output directory");
    app->add_option("--seed", ov.seed, "master RNG seed");
    app->add_option("--threads", ov.threads, "worker threads (0 = hardware)");
    app->add_option("--set", ov.sets, "extra key=value override (repeatable)")
        ->type_name("KEY=VAL");
}

scmimo::run_settings build_settings(const cli_overrides& ov) {
    scmimo::run_settings rs;
    if (ov.config_path) scmimo::load_config_file(rs, *ov.config_path);
    auto set = [&rs](const std::string& key, const std::string& value) {
        scmimo::apply_setting(rs, key, value);
    };
    if (ov.out_dir) set("out_dir", *ov.out_dir);
    if (ov.table_path) set("table", *ov.table_path);
    if (ov.seed) set("seed", std::to_string(*ov.seed));
    if (ov.m) set("m", std::to_string(*ov.m));
    if (ov.k) set("k", std::to_string(*ov.k));
    if (ov.n) set("n", std::to_string(*ov.n));
    if (ov.frames) set("frames_per_point", std::to_string(*ov.frames));
    if (ov.threads) set("threads", std::to_string(*ov.threads));
    if (ov.snr_start) set("snr_start_db", std::to_string(*ov.snr_start));
    if (ov.snr_end) set("snr_stop_db", std::to_string(*ov.snr_end));
    if (ov.snr_step) set("snr_step_db", std::to_string(*ov.snr_step));
    if (ov.precoder) set("precoder", *ov.precoder);
    if (ov.power_opt) set("power_opt", *ov.power_opt);
    if (ov.draws) set("table_draws", std::to_string(*ov.draws));
    if (ov.m_list) set("complexity_m_list", *ov.m_list);
    if (ov.k_values) set("table_k_values", *ov.k_values);
    if (ov.k_max) set("complexity_k_max", std::to_string(*ov.k_max));
    for (const auto& kv : ov.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw scmimo::config_error("--set expects key=value, got '" + kv + "'");
        set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    scmimo::finalize_settings(rs);
    return rs;
}

int cmd_tables(const cli_overrides& ov) {
    scmimo::run_settings rs = build_settings(ov);
    // `tables` reuses the sweep's M/seed unless table-specific keys were set
    if (ov.m) rs.table_m = static_cast<int>(*ov.m);
    const auto grid = scmimo::make_db_grid(rs.table_snr_start_db, rs.table_snr_stop_db,
                                           rs.table_snr_step_db);
    std::printf("building scalar table: M=%d, %zu K values, %zu SNR points, %zu draws, seed=%llu\n",
                rs.table_m, rs.table_k_values.size(), grid.size(), rs.table_draws,
                static_cast<unsigned long long>(rs.sys.seed));
    const scmimo::scalar_table table = scmimo::build_table(
        rs.table_m, rs.table_k_values, grid, rs.table_draws, rs.sys.seed, rs.sys.threads);

    std::filesystem::create_directories(rs.out_dir);
    const auto bin_path =
        std::filesystem::path(rs.out_dir) / ("scalar_table_M" + std::to_string(rs.table_m) + ".bin");
    const auto csv_path =
        std::filesystem::path(rs.out_dir) / ("scalar_table_M" + std::to_string(rs.table_m) + ".csv");
    scmimo::save_table_binary(table, bin_path);
    scmimo::export_table_csv(table, csv_path);

    for (std::size_t ki = 0; ki < table.k_values.size(); ++ki) {
        const int k = table.k_values[ki];
        const auto& lo = table.entry(ki, 0);
        const auto& hi = table.entry(ki, table.snr_grid_db.size() - 1);
        const double beta_inf = std::sqrt(static_cast<double>(rs.table_m - k));
        const double beta_low = lo.sigma2_w / std::sqrt(static_cast<double>(rs.table_m));
        std::printf("  K=%2d: beta_rzf %.4f..%.4f (high-SNR ref sqrt(M-K)=%.4f, "
                    "low-SNR ref sigma2/sqrt(M)=%.4f), alpha %.6f..%.6f\n",
                    k, hi.beta_rzf, lo.beta_rzf, beta_inf, beta_low, hi.alpha, lo.alpha);
    }
    std::printf("wrote %s and %s\n", bin_path.string().c_str(), csv_path.string().c_str());
    return kExitOk;
}

int cmd_simulate(const cli_overrides& ov) {
    scmimo::run_settings rs = build_settings(ov);
    rs.sys.validate();

    scmimo::scalar_table table;
    if (rs.sys.run_rzf) {
        if (rs.table_path.empty() || !std::filesystem::exists(rs.table_path))
            throw scmimo::config_error(
                "simulate: RZF needs a scalar table; generate one with the `tables` "
                "subcommand and pass it via --table (got '" + rs.table_path + "')");
        table = scmimo::load_table_binary(rs.table_path);
    }

    if (rs.validate_model) {
        // model integrity gate on a reduced-size clone (brute-force path)
        const int lh = std::min(rs.sys.l_h, 8);
        scmimo::power_delay_profile pdp;
        pdp.rolloff = rs.sys.pdp_rolloff;
        pdp.length = lh;
        const auto chan = scmimo::generate_channel(std::min(rs.sys.m, 16),
                                                   std::min(rs.sys.k, 4), 64, pdp,
                                                   scmimo::derive_seed(rs.sys.seed, 99));
        const auto rep = scmimo::validate_fd_model_impl(chan, lh + 1,
                                                        scmimo::derive_seed(rs.sys.seed, 98));
        std::printf("model check: max |fd - time| = %.3e (tolerance %.1e) -> %s\n",
                    rep.max_abs_error, rep.tolerance, rep.pass ? "ok" : "MISMATCH");
        if (!rep.pass) {
            std::fprintf(stderr, "simulate: frequency-domain model validation failed\n");
            return kExitInvariant;
        }
    }

    const scmimo::sim_result result = scmimo::run_sweep(rs.sys, table);
    const auto files = scmimo::emit_outputs(result, rs.out_dir);

    std::printf("%-4s %8s %14s %12s %10s\n", "pre", "snr_db", "mean_gain_db", "stderr_db",
                "tx_ratio");
    for (const auto& rec : result.records)
        std::printf("%-4s %8.1f %14.3f %12.4f %10.4f\n", scmimo::to_string(rec.kind), rec.snr_db,
                    rec.mean_gain_db, rec.gain_stderr_db, rec.tx_power_ratio);
    for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());

    if (!result.invariant_failures.empty()) {
        for (const auto& msg : result.invariant_failures)
            std::fprintf(stderr, "invariant failure: %s\n", msg.c_str());
        return kExitInvariant;
    }
    return kExitOk;
}

int cmd_complexity(const cli_overrides& ov) {
    scmimo::run_settings rs = build_settings(ov);
    std::vector<scmimo::complexity_report> rows;
    for (int m : rs.complexity_m_list)
        for (int k = 1; k <= std::min(rs.complexity_k_max, m - 1); ++k)
            rows.push_back(scmimo::complexity(m, k));

    std::filesystem::create_directories(rs.out_dir);
    const auto csv_path = std::filesystem::path(rs.out_dir) / "complexity.csv";
    {
        std::ofstream os(csv_path);
        if (!os) throw scmimo::config_error("complexity: cannot open " + csv_path.string());
        scmimo::write_complexity_csv(rows, os, "seed=" + std::to_string(rs.sys.seed));
    }
    const auto svg_path = std::filesystem::path(rs.out_dir) / "complexity_vs_k.svg";
    scmimo::write_complexity_plot(rs.complexity_m_list, rs.complexity_k_max, svg_path,
                                  "seed=" + std::to_string(rs.sys.seed));
    std::printf("%zu rows; example M=64 K=16: zf=%lld rzf=%lld\n", rows.size(),
                static_cast<long long>(scmimo::complexity(64, 16).zf_multiplies_per_bin),
                static_cast<long long>(scmimo::complexity(64, 16).rzf_multiplies_per_bin));
    std::printf("wrote %s and %s\n", csv_path.string().c_str(), svg_path.string().c_str());
    return kExitOk;
}

int cmd_validate(const cli_overrides& ov, double debug_alpha_scale) {
    scmimo::run_settings rs = build_settings(ov);
    const std::uint64_t seed = rs.sys.seed;
    bool all_ok = true;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("[%s] %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        all_ok = all_ok && ok;
    };
    char buf[256];

    {  // frequency-domain model vs explicit CP/time path
        scmimo::power_delay_profile pdp;
        pdp.length = 8;
        const auto chan =
            scmimo::generate_channel(16, 4, 64, pdp, scmimo::derive_seed(seed, 11));
        const auto rep = scmimo::validate_fd_model_impl(chan, 9, scmimo::derive_seed(seed, 12));
        std::snprintf(buf, sizeof(buf), "max err %.3e (tol %.1e)", rep.max_abs_error,
                      rep.tolerance);
        report("fd-model equivalence", rep.pass, buf);
    }

    {  // eigenvalue density sanity
        const scmimo::wishart_spec spec{64, 16};
        const double norm = scmimo::detail::integrate_density_kernel(
            spec, [](double) { return 1.0; }, 1e-9, "validate");
        const double mean = scmimo::detail::integrate_density_kernel(
            spec, [](double z) { return z; }, 1e-9, "validate");
        const bool ok = std::abs(norm - 1.0) < 1e-8 && std::abs(mean - 64.0) / 64.0 < 1e-6;
        std::snprintf(buf, sizeof(buf), "norm %.12f, mean %.8f", norm, mean);
        report("eigenvalue density", ok, buf);
    }

    {  // quadrature vs Monte Carlo
        const scmimo::wishart_spec spec{64, 16};
        bool ok = true;
        std::string detail;
        scmimo::rng_stream rng(scmimo::derive_seed(seed, 13));
        for (double s2 : {0.1, 1.0, 10.0}) {
            const std::size_t draws = 2000;
            double sum_a = 0, sq_a = 0, sum_b = 0, sq_b = 0;
            Eigen::MatrixXcd a(64, 16);
            const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(16, 16);
            for (std::size_t d = 0; d < draws; ++d) {
                for (int i = 0; i < 64; ++i)
                    for (int j = 0; j < 16; ++j) a(i, j) = rng.cgaussian();
                const Eigen::MatrixXcd gram = a.transpose() * a.conjugate();
                const Eigen::MatrixXcd inv = (gram + s2 * eye).llt().solve(eye);
                const double la = inv.trace().real() / 16.0;
                const Eigen::MatrixXcd b = a.conjugate() * inv;
                const double lb = b.squaredNorm() / 16.0;
                sum_a += la;
                sq_a += la * la;
                sum_b += lb;
                sq_b += lb * lb;
            }
            const double n = static_cast<double>(draws);
            const double mean_a = sum_a / n, se_a = std::sqrt((sq_a / n - mean_a * mean_a) / n);
            const double mean_b = sum_b / n, se_b = std::sqrt((sq_b / n - mean_b * mean_b) / n);
            const double qa = scmimo::compute_lambda_alpha(spec, s2);
            const double qb = scmimo::compute_lambda_beta(spec, s2);
            ok = ok && std::abs(qa - mean_a) < 3 * se_a && std::abs(qb - mean_b) < 3 * se_b;
        }
        report("scalars vs Monte Carlo", ok, "lambda_alpha/lambda_beta, 3 sigma, 2000 draws");
    }

    {  // K x K inverse route vs direct M x M route
        scmimo::rng_stream rng(scmimo::derive_seed(seed, 14));
        Eigen::MatrixXcd a(8, 3);
        double worst = 0.0;
        const auto alloc = scmimo::power_allocation::uniform(3, 3.0);
        for (int trial = 0; trial < 20; ++trial) {
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 3; ++j) a(i, j) = rng.cgaussian();
            Eigen::VectorXcd s(3);
            for (int j = 0; j < 3; ++j) s(j) = rng.cgaussian();
            const auto x1 = scmimo::rzf_precode_bin(a, s, alloc, 0.5, 1.3);
            const auto x2 = scmimo::rzf_precode_bin_direct(a, s, alloc, 0.5, 1.3);
            worst = std::max(worst, (x1 - x2).norm() / x2.norm());
        }
        std::snprintf(buf, sizeof(buf), "max rel diff %.3e", worst);
        report("inversion-lemma equivalence", worst < 1e-9, buf);
    }

    {  // detector bias with the computed alpha (negative control via
       // --debug-alpha-scale)
        const scmimo::wishart_spec spec{64, 16};
        const double s2 = 1.0;
        scmimo::scalar_entry entry;
        entry.sigma2_w = s2;
        entry.lambda_beta = scmimo::compute_lambda_beta(spec, s2);
        entry.beta_rzf = scmimo::compute_beta_rzf(entry.lambda_beta);
        entry.lambda_alpha = scmimo::compute_lambda_alpha(spec, s2);
        entry.alpha = scmimo::compute_alpha(entry.lambda_alpha, s2) * debug_alpha_scale;

        scmimo::system_config cfg;
        cfg.n = 64;
        cfg.l_h = 8;
        cfg.l_cp = 9;
        cfg.power_opt = false;
        cfg.excess_path_loss_db_hi = 0.0;
        cfg.seed = scmimo::derive_seed(seed, 15);
        const auto alloc = scmimo::power_allocation::uniform(cfg.k, cfg.k);
        Eigen::VectorXcd bias_sum = Eigen::VectorXcd::Zero(cfg.k);
        const int reps = 100;
        for (int r = 0; r < reps; ++r) {
            const auto chan = scmimo::generate_channel(cfg.m, cfg.k, cfg.n, cfg.pdp(),
                                                       scmimo::derive_seed(cfg.seed, 1, r));
            scmimo::rng_stream srng(scmimo::derive_seed(cfg.seed, 2, r));
            const auto symbols = scmimo::make_symbols(srng, cfg.n, cfg.k, cfg.mod);
            const auto symbols_fd = scmimo::dft_cols(symbols);
            scmimo::rng_stream nrng(scmimo::derive_seed(cfg.seed, 3, r));
            Eigen::MatrixXcd noise(cfg.n, cfg.k);
            for (int u = 0; u < cfg.k; ++u)
                for (int t = 0; t < cfg.n; ++t) noise(t, u) = nrng.cgaussian(s2);
            const auto noise_fd = scmimo::dft_cols(noise);
            const auto fs = scmimo::detail::run_frame(cfg, chan, scmimo::precoder_kind::rzf, s2,
                                                      &entry, alloc, symbols, symbols_fd,
                                                      noise_fd);
            bias_sum += fs.bias;
        }
        const double worst = ((bias_sum / reps).array() - 1.0).abs().maxCoeff();
        std::snprintf(buf, sizeof(buf), "max |bias - 1| = %.4f over %d draws (tol 0.02)", worst,
                      reps);
        report("detector unbiasedness", worst < 0.02, buf);
    }

    return all_ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scmimo: frequency-domain ZF/RZF downlink precoding simulator"};
    app.require_subcommand(1);

    cli_overrides ov;
    double debug_alpha_scale = 1.0;

    auto* tables = app.add_subcommand("tables", "precompute the scalar lookup table");
    add_common_flags(tables, ov);
    tables->add_option("--m", ov.m, "antenna count M for the table");
    tables->add_option("--k-values", ov.k_values, "comma list of user counts");
    tables->add_option("--draws", ov.draws, "Monte Carlo draws per grid point");

    auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo SNR sweep");
    add_common_flags(simulate, ov);
    simulate->add_option("--table", ov.table_path, "scalar table file (binary)");
    simulate->add_option("--m", ov.m, "BS antennas");
    simulate->add_option("--k", ov.k, "users");
    simulate->add_option("--n", ov.n, "frame length in samples");
    simulate->add_option("--snr-start", ov.snr_start, "sweep start [dB]");
    simulate->add_option("--snr-end", ov.snr_end, "sweep end [dB]");
    simulate->add_option("--snr-step", ov.snr_step, "sweep step [dB]");
    simulate->add_option("--frames", ov.frames, "frames per SNR point");
    simulate->add_option("--precoder", ov.precoder, "zf, rzf or both");
    simulate->add_option("--power-opt", ov.power_opt, "on or off");

    auto* complexity = app.add_subcommand("complexity", "per-bin complex multiply counts");
    add_common_flags(complexity, ov);
    complexity->add_option("--m-list", ov.m_list, "comma list of antenna counts");
    complexity->add_option("--k-max", ov.k_max, "largest user count");

    auto* validate = app.add_subcommand("validate", "model and scalar self-checks");
    add_common_flags(validate, ov);
    validate->add_option("--debug-alpha-scale", debug_alpha_scale,
                         "scale the detector alpha (negative-control testing)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tables->parsed()) return cmd_tables(ov);
        if (simulate->parsed()) return cmd_simulate(ov);
        if (complexity->parsed()) return cmd_complexity(ov);
        if (validate->parsed()) return cmd_validate(ov, debug_alpha_scale);
    } catch (const scmimo::config_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const scmimo::dimension_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const scmimo::numeric_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUnexpected;
    }
    return kExitUnexpected;
}
