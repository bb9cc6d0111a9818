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
#include <set>

#include "scmimo/config.hpp"
#include "scmimo/fft.hpp"
#include "scmimo/parallel.hpp"
#include "scmimo/rng.hpp"

using namespace scmimo;

TEST_CASE("derive_seed separates streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 8; ++a)
        for (std::uint64_t b = 0; b < 8; ++b) seen.insert(derive_seed(123, a, b));
    CHECK(seen.size() == 64);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("rng_stream is deterministic and well scaled") {
    rng_stream a(77), b(77);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    rng_stream rng(5);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);

    double cvar = 0;
    for (int i = 0; i < n; ++i) cvar += std::norm(rng.cgaussian(2.0));
    CHECK(std::abs(cvar / n - 2.0) < 0.04);

    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(0.1, 2.0);
        CHECK(u >= 0.1);
        CHECK(u < 2.0);
    }
}

TEST_CASE("dft conventions") {
    // delta -> all ones under the unnormalized forward transform
    Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(16);
    delta(0) = 1.0;
    const Eigen::VectorXcd spec = dft(delta);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(spec(i) - cxd(1.0, 0.0)) < 1e-12);

    rng_stream rng(3);
    Eigen::VectorXcd x(64);
    for (int i = 0; i < 64; ++i) x(i) = rng.cgaussian();
    const Eigen::VectorXcd round = idft(dft(x));
    CHECK((round - x).cwiseAbs().maxCoeff() < 1e-12);

    // Parseval: sum_t |x|^2 == (1/N) sum_n |X|^2
    const double t_power = x.squaredNorm();
    const double f_power = dft(x).squaredNorm() / 64.0;
    CHECK(t_power == Catch::Approx(f_power).epsilon(1e-12));
}

TEST_CASE("parallel_for covers all slots and propagates errors") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] = static_cast<int>(i) + 1; });
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i) + 1);

    CHECK_THROWS_AS(parallel_for(8, 2,
                                 [&](std::size_t i) {
                                     if (i == 3) throw numeric_error("boom");
                                 }),
                    numeric_error);
}

TEST_CASE("config file parsing and overrides") {
    const auto dir = std::filesystem::temp_directory_path() / "scmimo_cfg_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "run.cfg";
    {
        std::ofstream os(path);
        os << "# sample config\n";
        os << "m = 32\n";
        os << "k = 8\n";
        os << "precoder = rzf   # only the regularized path\n";
        os << "power_opt = off\n";
        os << "snr_start_db = -10\n";
        os << "snr_stop_db = 0\n";
        os << "snr_step_db = 5\n";
    }
    run_settings rs;
    load_config_file(rs, path);
    apply_setting(rs, "k", "4");  // override wins
    finalize_settings(rs);
    CHECK(rs.sys.m == 32);
    CHECK(rs.sys.k == 4);
    CHECK_FALSE(rs.sys.run_zf);
    CHECK(rs.sys.run_rzf);
    CHECK_FALSE(rs.sys.power_opt);
    CHECK(rs.sys.snr_db_grid == std::vector<double>{-10, -5, 0});

    CHECK_THROWS_AS(apply_setting(rs, "no_such_key", "1"), config_error);
    CHECK_THROWS_AS(apply_setting(rs, "m", "sixty"), config_error);
    CHECK_THROWS_AS(apply_setting(rs, "power_opt", "maybe"), config_error);
    CHECK_THROWS_AS(make_db_grid(0, 10, -1), config_error);
}

TEST_CASE("sweep config validation") {
    system_config cfg;
    CHECK_NOTHROW(cfg.validate());

    system_config bad = cfg;
    bad.k = bad.m;
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = cfg;
    bad.l_h = bad.l_cp;  // violates L_h <= L_CP - 1
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = cfg;
    bad.run_zf = bad.run_rzf = false;
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = cfg;
    bad.frames_per_point = 0;
    CHECK_THROWS_AS(bad.validate(), config_error);
}
