#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace catcollapse {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 1,
    kExitInfeasible = 2,
    kExitNonConvergence = 3,
};

struct RunConfig {
    std::string command;  // pcc | lossmatrix | hllm | ratios | curve | oracle
    std::filesystem::path data;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    std::optional<double> stop_quotient;
    bool loss_matrices = false;
    std::optional<std::string> generators;
    int precision = 2;
    std::optional<std::size_t> pcc_step;  // hllm: model the table collapsed at this PCC row
    std::optional<std::string> dim;       // lossmatrix: one variable by name or index
    std::uint64_t oracle_cap = 1'000'000;
};

// Runs one command, writes its artifacts under config.out and returns the exit code.
// Diagnostics go to `log`.
int run_command(const RunConfig& config, std::ostream& log);

}  // namespace catcollapse
