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

#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

const fs::path kWork = fs::temp_directory_path() / "scmimo_cli_test";

struct run_result {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

run_result run_cli(const std::string& args) {
    const fs::path log = kWork / "cli_log.txt";
    const std::string cmd =
        std::string(SCMIMO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    run_result r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream is(log);
    std::ostringstream os;
    os << is.rdbuf();
    r.output = os.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("cli: complexity command") {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    const auto out = (kWork / "cplx").string();
    const auto r = run_cli("complexity --out " + out);
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(kWork / "cplx" / "complexity.csv");
    CHECK(csv.find("64,16,21760,1280") != std::string::npos);
    CHECK(csv.find("32,31,62496,1953") != std::string::npos);
    CHECK(fs::exists(kWork / "cplx" / "complexity_vs_k.svg"));
}

TEST_CASE("cli: tables command builds a reusable table") {
    fs::create_directories(kWork);
    const auto out = (kWork / "tbl").string();
    const std::string grid_args =
        " --set table_snr_start_db=-5 --set table_snr_stop_db=10 --set table_snr_step_db=5"
        " --draws 1000 --seed 9";
    const auto r =
        run_cli("tables --m 12 --k-values 4 --out " + out + grid_args);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("beta_rzf") != std::string::npos);
    CHECK(fs::exists(kWork / "tbl" / "scalar_table_M12.bin"));
    CHECK(fs::exists(kWork / "tbl" / "scalar_table_M12.csv"));

    // rerun with the same seed reproduces the CSV byte for byte
    const auto out2 = (kWork / "tbl2").string();
    const auto r2 = run_cli("tables --m 12 --k-values 4 --out " + out2 + grid_args);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(kWork / "tbl" / "scalar_table_M12.csv") ==
          slurp(kWork / "tbl2" / "scalar_table_M12.csv"));

    // M <= K rejected before any computation
    const auto bad = run_cli("tables --m 4 --k-values 8 --out " + out + grid_args);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli: simulate requires a table for the rzf path") {
    fs::create_directories(kWork);
    const auto r = run_cli("simulate --out " + (kWork / "nosim").string() +
                           " --table " + (kWork / "missing.bin").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("tables") != std::string::npos);
}

TEST_CASE("cli: simulate runs and is deterministic") {
    fs::create_directories(kWork);
    const std::string table = (kWork / "tbl" / "scalar_table_M12.bin").string();
    if (!fs::exists(table)) {
        run_cli("tables --m 12 --k-values 4 --out " + (kWork / "tbl").string() +
                " --set table_snr_start_db=-5 --set table_snr_stop_db=10"
                " --set table_snr_step_db=5 --draws 1000 --seed 9");
    }
    const std::string common =
        " --table " + table +
        " --m 12 --k 4 --n 64 --set l_h=8 --set l_cp=9 --snr-start 0 --snr-end 5"
        " --snr-step 5 --frames 2 --seed 31 --power-opt off"
        " --set excess_path_loss_db_hi=0";
    const auto r1 = run_cli("simulate --out " + (kWork / "sim1").string() + common);
    INFO(r1.output);
    CHECK(r1.exit_code == 0);
    CHECK(fs::exists(kWork / "sim1" / "results.csv"));
    CHECK(fs::exists(kWork / "sim1" / "gain_vs_snr.svg"));

    const auto r2 = run_cli("simulate --out " + (kWork / "sim2").string() + common);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(kWork / "sim1" / "results.csv") == slurp(kWork / "sim2" / "results.csv"));

    // single-precoder run produces a single curve
    const auto r3 = run_cli("simulate --out " + (kWork / "simzf").string() + common +
                            " --precoder zf");
    CHECK(r3.exit_code == 0);
    const std::string csv = slurp(kWork / "simzf" / "results.csv");
    CHECK(csv.find("\nzf,") != std::string::npos);
    CHECK(csv.find("\nrzf,") == std::string::npos);
}

TEST_CASE("cli: validate self-checks and the alpha negative control") {
    fs::create_directories(kWork);
    const auto ok = run_cli("validate --seed 5");
    INFO(ok.output);
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("FAIL") == std::string::npos);
    CHECK(ok.output.find("detector unbiasedness") != std::string::npos);

    // a 10% alpha error must trip the bias check
    const auto bad = run_cli("validate --seed 5 --debug-alpha-scale 1.1");
    CHECK(bad.exit_code == 4);
    CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("cli: unknown config keys are rejected") {
    fs::create_directories(kWork);
    const auto r = run_cli("simulate --set no_such_key=1 --out " + (kWork / "x").string());
    CHECK(r.exit_code == 2);
}
