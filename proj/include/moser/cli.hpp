#pragma once

#include <filesystem>

#include "moser/experiment.hpp"

namespace moser::cli {

/// Exit codes: 0 success, 1 usage/config error, 2 a numerical tolerance or
/// threshold check failed (the run itself completed).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitTolerance = 2;

int run_constants(const ExperimentConfig& cfg);
int run_bubble(const ExperimentConfig& cfg);
int run_green(const ExperimentConfig& cfg);
int run_maximize(const ExperimentConfig& cfg);
int run_sweep_test1(const ExperimentConfig& cfg);
int run_sweep_test2(const ExperimentConfig& cfg);
int run_sharpness(const ExperimentConfig& cfg);
int run_report(const std::filesystem::path& out_dir);

/// Full argv dispatcher (what tools/moserlab wraps).
int run(int argc, char** argv);

}  // namespace moser::cli
