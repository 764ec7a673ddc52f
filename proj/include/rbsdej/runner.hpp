#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rbsdej/config.hpp"
#include "rbsdej/exec.hpp"

namespace rbsdej {

inline constexpr const char* kVersion = "1.0.0";

struct RunOutcome {
    /// 0 when every requested suite passed, 1 otherwise.
    int exit_code = 0;
    std::vector<std::string> failed_suites;
    std::string summary;
};

/// Executes `config.mode` and writes into `out_dir`: config_echo.ini,
/// convergence.csv, norms.csv, properties.csv and junit.xml (as the mode
/// produces them), summary.txt and manifest.txt. Only the manifest and the
/// wall_time column of convergence.csv depend on the clock.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                          const Exec& exec = {});

}  // namespace rbsdej
