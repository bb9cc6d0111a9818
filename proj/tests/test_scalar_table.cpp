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
#include <cstring>
#include <filesystem>
#include <sstream>

#include "scmimo/scalar_table.hpp"

using namespace scmimo;

namespace {

bool entries_bitwise_equal(const scalar_entry& a, const scalar_entry& b) {
    return std::memcmp(&a, &b, sizeof(scalar_entry)) == 0;
}

}  // namespace

TEST_CASE("table entries satisfy their algebraic invariants") {
    const auto table = build_table(64, {16}, {-20, -10, 0, 10, 20, 30}, 1000, 11);
    REQUIRE(table.entries.size() == 6);
    for (const auto& e : table.entries) {
        CHECK(scalar_entry_consistent(e));
        CHECK(e.alpha >= 1.0);
        CHECK(e.sigma2_od >= 0.0);
    }
    // monotone along the grid: lambda integrals decrease with sigma2, i.e.
    // increase with SNR; alpha decreases toward 1
    for (std::size_t si = 1; si < table.snr_grid_db.size(); ++si) {
        CHECK(table.entry(0, si).lambda_alpha > table.entry(0, si - 1).lambda_alpha);
        CHECK(table.entry(0, si).lambda_beta > table.entry(0, si - 1).lambda_beta);
        CHECK(table.entry(0, si).alpha < table.entry(0, si - 1).alpha);
    }
}

TEST_CASE("single-point table reproduces the direct computations") {
    const auto table = build_table(32, {8}, {3.0}, 2000, 99);
    const wishart_spec spec{32, 8};
    const double s2 = sigma2_from_snr_db(3.0);
    const auto& e = table.entry(0, 0);
    CHECK(e.lambda_beta == compute_lambda_beta(spec, s2));
    CHECK(e.lambda_alpha == compute_lambda_alpha(spec, s2));
    CHECK(e.alpha == compute_alpha(e.lambda_alpha, s2));
    const auto od = compute_sigma2_od(spec, s2, 2000, derive_seed(99, 0, 0));
    CHECK(e.sigma2_od == od.value);
}

TEST_CASE("beta endpoints against the analytic references") {
    // high SNR: beta_rzf -> sqrt(M - K); the deep noise-dominated asymptote
    // beta_rzf -> sigma2/sqrt(M) needs sigma2 >> M, i.e. far below -20 dB
    const auto table = build_table(64, {16}, {-50, 30}, 1000, 3);
    const auto& low = table.entry(0, 0);
    const auto& high = table.entry(0, 1);
    CHECK(high.beta_rzf == Catch::Approx(std::sqrt(48.0)).epsilon(0.005));
    CHECK(low.beta_rzf == Catch::Approx(low.sigma2_w / 8.0).epsilon(0.005));
}

TEST_CASE("lookup snaps, interpolates and refuses extrapolation") {
    const auto table = build_table(64, {8, 16}, {-10, 0, 10}, 1000, 7);

    // exact grid point: stored entry, bitwise
    const auto exact = lookup(table, 16, sigma2_from_snr_db(0.0));
    CHECK(entries_bitwise_equal(exact, table.entry(1, 1)));
    const auto edge = lookup(table, 8, sigma2_from_snr_db(10.0));
    CHECK(entries_bitwise_equal(edge, table.entry(0, 2)));

    // interior query: between the neighbors, self-consistent, query sigma2
    const double s2 = sigma2_from_snr_db(4.0);
    const auto mid = lookup(table, 16, s2);
    CHECK(mid.sigma2_w == s2);
    CHECK(scalar_entry_consistent(mid));
    const auto& lo = table.entry(1, 1);
    const auto& hi = table.entry(1, 2);
    CHECK(mid.lambda_alpha > lo.lambda_alpha);
    CHECK(mid.lambda_alpha < hi.lambda_alpha);
    CHECK(mid.beta_rzf < lo.beta_rzf);  // beta_rzf decreases toward sqrt(M-K)
    CHECK(mid.beta_rzf > hi.beta_rzf);
    CHECK(mid.alpha < lo.alpha);
    CHECK(mid.alpha > hi.alpha);

    // out of range / unknown K
    CHECK_THROWS_AS(lookup(table, 16, sigma2_from_snr_db(10.5)), std::out_of_range);
    CHECK_THROWS_AS(lookup(table, 16, sigma2_from_snr_db(-11.0)), std::out_of_range);
    CHECK_THROWS_AS(lookup(table, 5, sigma2_from_snr_db(0.0)), std::out_of_range);
    CHECK_THROWS_WITH(lookup(table, 5, sigma2_from_snr_db(0.0)),
                      Catch::Matchers::ContainsSubstring("8, 16"));
}

TEST_CASE("binary round trip and CSV determinism") {
    const auto dir = std::filesystem::temp_directory_path() / "scmimo_table_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "table.bin";

    const auto table = build_table(16, {2, 4}, {-5, 0, 5}, 1000, 123);
    save_table_binary(table, path);
    const auto back = load_table_binary(path);
    REQUIRE(back.num_antennas == 16);
    REQUIRE(back.k_values == table.k_values);
    REQUIRE(back.snr_grid_db == table.snr_grid_db);
    REQUIRE(back.draws == table.draws);
    REQUIRE(back.seed == table.seed);
    REQUIRE(back.entries.size() == table.entries.size());
    for (std::size_t i = 0; i < table.entries.size(); ++i)
        CHECK(entries_bitwise_equal(table.entries[i], back.entries[i]));

    std::ostringstream csv_a, csv_b;
    export_table_csv(table, csv_a);
    export_table_csv(back, csv_b);
    CHECK(csv_a.str() == csv_b.str());
    CHECK(csv_a.str().find("K,snr_db,sigma2_w,lambda_beta,beta_rzf,lambda_alpha,alpha,"
                           "sigma2_od,sigma2_od_stderr") != std::string::npos);
}

TEST_CASE("parallel and serial table builds are identical") {
    const auto serial = build_table(16, {4}, {-5, 0, 5, 10}, 1000, 5, 1);
    const auto threaded = build_table(16, {4}, {-5, 0, 5, 10}, 1000, 5, 4);
    for (std::size_t i = 0; i < serial.entries.size(); ++i)
        CHECK(entries_bitwise_equal(serial.entries[i], threaded.entries[i]));
}

TEST_CASE("table build input validation") {
    CHECK_THROWS_AS(build_table(16, {}, {0.0}, 1000, 1), config_error);
    CHECK_THROWS_AS(build_table(16, {4}, {}, 1000, 1), config_error);
    CHECK_THROWS_AS(build_table(16, {8, 4}, {0.0}, 1000, 1), config_error);
    CHECK_THROWS_AS(build_table(16, {4}, {5.0, 0.0}, 1000, 1), config_error);
    CHECK_THROWS_AS(build_table(16, {16}, {0.0}, 1000, 1), config_error);
    CHECK_THROWS_AS(build_table(16, {4}, {0.0}, 10, 1), numeric_error);  // draws too low
}
