#pragma once

#include "eelm/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace eelm::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kConfigError = 2, kDivergence = 3, kIoError = 4 };

/// Burn-in from a seeded random state, then sim.steps recorded steps.
/// Writes <out>/trajectory.bin and <out>/config.txt.
fs::path cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir);

/// Trains on train.samples pairs from states [train.start, train.start + train.span]
/// of the trajectory. Writes <out>/model.bin.
fs::path cmd_train(const ExperimentConfig& cfg, const fs::path& trajectory, const fs::path& out_dir);

struct PredictOutcome {
    fs::path file;
    std::optional<std::size_t> diverged_at;
};

/// Rolls the model out from state `start_index` of `initial`. Writes
/// <out>/prediction.bin (partial when the rollout diverged).
PredictOutcome cmd_predict(const fs::path& model, const fs::path& initial, std::size_t start_index,
                           std::size_t n_steps, const fs::path& out_dir);

struct EvaluateOptions {
    /// Index of the simulated state aligned with the first predicted state.
    std::size_t sim_start = 0;
    bool heatmaps = false;
    /// 2D only: write one PGM every this many snapshots.
    std::size_t heatmap_every = 1;
};

/// Writes rse.csv, moments.csv (prediction), moments_sim.csv and optional
/// PGM heatmaps. Compares the common prefix when the prediction is shorter.
std::vector<double> cmd_evaluate(const fs::path& sim, const fs::path& pred, const fs::path& out_dir,
                                 const EvaluateOptions& opts = {});

/// One simulation, then train/predict/evaluate for each ELM seed in
/// [first, last]. Writes <out>/seed_<n>/... and <out>/sweep_rse.csv.
void cmd_sweep(ExperimentConfig cfg, std::uint64_t first, std::uint64_t last, const fs::path& out_dir);

/// Parses "a..b" (or a single integer).
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(std::string_view text);

} // namespace eelm::cli
