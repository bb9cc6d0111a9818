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

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scmimo/outputs.hpp"
#include "scmimo/sim.hpp"

using namespace scmimo;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

power_delay_profile small_pdp(int length) {
    power_delay_profile pdp;
    pdp.length = length;
    return pdp;
}

system_config mini_config() {
    system_config cfg;
    cfg.m = 16;
    cfg.k = 4;
    cfg.n = 256;
    cfg.l_h = 8;
    cfg.l_cp = 9;
    cfg.snr_db_grid = {-10.0, 10.0};
    cfg.frames_per_point = 5;
    cfg.power_opt = false;
    cfg.excess_path_loss_db_hi = 0.0;
    cfg.seed = 4711;
    return cfg;
}

scalar_table mini_table() {
    return build_table(16, {4}, {-10.0, 10.0}, 1000, 321);
}

}  // namespace

TEST_CASE("fd model matches the explicit CP time-domain path") {
    // delta channels: both paths identical to machine precision
    const auto delta_chan = generate_channel(4, 2, 64, small_pdp(1), 1);
    auto rep = validate_fd_model_impl(delta_chan, 9, 77);
    CHECK(rep.pass);
    CHECK(rep.max_abs_error < 1e-12);

    // random channels, N=64, L_h=8, L_CP=9
    const auto chan = generate_channel(8, 3, 64, small_pdp(8), 2);
    rep = validate_fd_model_impl(chan, 9, 78);
    CHECK(rep.pass);
    CHECK(rep.max_abs_error < 1e-9);
}

TEST_CASE("insufficient cyclic prefix is detected") {
    // With an isolated frame the linear-convolution path stays circular up to
    // L_h = L_CP + 1; one tap beyond that leaks inter-block interference.
    const int l_cp = 6;
    const auto ok_chan = generate_channel(4, 2, 64, small_pdp(l_cp + 1), 3);
    CHECK(validate_fd_model_impl(ok_chan, l_cp, 79).pass);

    const auto bad_chan = generate_channel(4, 2, 64, small_pdp(l_cp + 2), 3);
    const auto rep = validate_fd_model_impl(bad_chan, l_cp, 79);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_abs_error > 1e-6);
}

TEST_CASE("fd model validator rejects oversized inputs") {
    const auto chan = generate_channel(2, 1, 512, small_pdp(4), 4);
    CHECK_THROWS_AS(validate_fd_model_impl(chan, 9, 80), config_error);
}

TEST_CASE("sweep produces one record per precoder and point") {
    const auto cfg = mini_config();
    const auto table = mini_table();
    const auto result = run_sweep(cfg, table);
    REQUIRE(result.records.size() == 4);  // 2 precoders x 2 points
    CHECK(result.invariant_failures.empty());
    for (const auto& rec : result.records) {
        CHECK(std::isfinite(rec.mean_gain_db));
        CHECK(rec.frames == 5);
        CHECK(rec.per_user_sinr_db.size() == 4);
        CHECK(std::abs(rec.tx_power_ratio - 1.0) < 0.15);
    }
    CHECK(result.complexity.zf_multiplies_per_bin == 4 * 4 + 4 * 16 + 64 + 16 * 16);
}

TEST_CASE("sweep gains land between the analytic levels") {
    auto cfg = mini_config();
    cfg.frames_per_point = 8;
    const auto table = mini_table();
    const auto result = run_sweep(cfg, table);
    const double gain_m = lin_to_db(cfg.m);           // 12.04 dB
    const double gain_mk = lin_to_db(cfg.m - cfg.k);  // 10.79 dB
    for (const auto& rec : result.records) {
        if (rec.kind == precoder_kind::zf) {
            CHECK(rec.mean_gain_db == Catch::Approx(gain_mk).margin(0.5));
        } else {
            CHECK(rec.mean_gain_db > gain_mk - 0.5);
            CHECK(rec.mean_gain_db < gain_m + 0.5);
        }
    }
    // RZF never falls below ZF beyond the Monte Carlo error
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& zf = result.records[i];
        const auto& rzf = result.records[i + 2];
        const double comb = std::hypot(zf.gain_stderr_db, rzf.gain_stderr_db);
        CHECK(rzf.mean_gain_db >= zf.mean_gain_db - 2.0 * comb);
    }
}

TEST_CASE("sweep is deterministic and independent of thread count") {
    auto cfg = mini_config();
    const auto table = mini_table();
    cfg.threads = 1;
    const auto a = run_sweep(cfg, table);
    cfg.threads = 4;
    const auto b = run_sweep(cfg, table);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].mean_gain_db == b.records[i].mean_gain_db);
        CHECK((a.records[i].per_user_sinr_db.array() ==
               b.records[i].per_user_sinr_db.array()).all());
    }
}

TEST_CASE("rzf-only sweep does not require zf and vice versa") {
    auto cfg = mini_config();
    cfg.run_zf = false;
    const auto result = run_sweep(cfg, mini_table());
    REQUIRE(result.records.size() == 2);
    for (const auto& rec : result.records) CHECK(rec.kind == precoder_kind::rzf);

    // ZF alone runs without any table
    cfg.run_zf = true;
    cfg.run_rzf = false;
    const auto zf_only = run_sweep(cfg, scalar_table{});
    REQUIRE(zf_only.records.size() == 2);
    for (const auto& rec : zf_only.records) CHECK(rec.kind == precoder_kind::zf);
}

TEST_CASE("table coverage is checked before any computation") {
    auto cfg = mini_config();
    const auto table = mini_table();

    auto wrong_k = cfg;
    wrong_k.k = 8;
    wrong_k.m = 16;
    CHECK_THROWS_AS(run_sweep(wrong_k, table), std::out_of_range);

    auto wrong_range = cfg;
    wrong_range.snr_db_grid = {-10.0, 25.0};
    CHECK_THROWS_AS(run_sweep(wrong_range, table), std::out_of_range);

    auto wrong_m = cfg;
    wrong_m.m = 32;
    CHECK_THROWS_AS(run_sweep(wrong_m, table), config_error);
}

TEST_CASE("emitted outputs") {
    const auto dir = std::filesystem::temp_directory_path() / "scmimo_emit_test";
    std::filesystem::remove_all(dir);

    // empty grid: header-only CSV, no charts, still succeeds
    auto cfg = mini_config();
    cfg.snr_db_grid = {};
    const auto empty = run_sweep(cfg, mini_table());
    const auto files = emit_outputs(empty, dir / "empty");
    REQUIRE(files.size() == 2);
    const std::string empty_csv = slurp(dir / "empty" / "results.csv");
    CHECK(empty_csv.find("precoder,snr_db,mean_gain_db") != std::string::npos);
    CHECK(std::count(empty_csv.begin(), empty_csv.end(), '\n') == 2);  // stamp + header
    CHECK_FALSE(std::filesystem::exists(dir / "empty" / "gain_vs_snr.svg"));

    // single point: one row per precoder, charts written
    cfg.snr_db_grid = {10.0};
    const auto single = run_sweep(cfg, mini_table());
    emit_outputs(single, dir / "single");
    const std::string single_csv = slurp(dir / "single" / "results.csv");
    CHECK(std::count(single_csv.begin(), single_csv.end(), '\n') == 4);
    CHECK(single_csv.find("\nzf,10,") != std::string::npos);
    CHECK(single_csv.find("\nrzf,10,") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "single" / "gain_vs_snr.svg"));
    CHECK(std::filesystem::exists(dir / "single" / "complexity_vs_k.svg"));

    // identical config + seed => byte-identical results.csv
    const auto again = run_sweep(cfg, mini_table());
    emit_outputs(again, dir / "again");
    CHECK(slurp(dir / "again" / "results.csv") == single_csv);

    // outputs embed the config hash and seed
    CHECK(single_csv.find("config_hash=") != std::string::npos);
    CHECK(single_csv.find("seed=4711") != std::string::npos);
    const std::string svg = slurp(dir / "single" / "gain_vs_snr.svg");
    CHECK(svg.find("config_hash=") != std::string::npos);
}

TEST_CASE("complexity csv format") {
    std::ostringstream os;
    write_complexity_csv({complexity(64, 16), complexity(128, 1)}, os, "seed=1");
    const std::string csv = os.str();
    CHECK(csv.find("m,k,zf_multiplies_per_bin,rzf_multiplies_per_bin") != std::string::npos);
    CHECK(csv.find("64,16,21760,1280") != std::string::npos);
    CHECK(csv.find("128,1,258,129") != std::string::npos);
}
