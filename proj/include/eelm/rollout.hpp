#pragma once

#include "eelm/elm.hpp"
#include "eelm/field.hpp"
#include "eelm/pde.hpp"
#include "eelm/symmetry.hpp"
#include "eelm/windows.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eelm {

/// A single ELM glued over the whole grid: the learned map v(t) -> v(t + dt).
struct Surrogate {
    ElmModel elm;
    Normalizer normalizer{0.0, 1.0};
    WindowGeometry geom;
    SymmetryConfig symmetry;
    bool zero_mean_wrap = false;
};

/// Throws ConfigError unless geometry and ELM dimensions agree.
void validate(const Surrogate& s);

/// |normalized value| beyond this is treated as divergence.
inline constexpr double kDivergenceBound = 10.0;

/// One surrogate step over every tile. Throws DivergenceError tagged with
/// `step_index` on a non-finite or out-of-range prediction.
Field step_surrogate(const Surrogate& s, const Field& state, std::size_t step_index = 0);

struct RolloutResult {
    Trajectory trajectory;
    /// Step at which the surrogate diverged; the trajectory holds every state before it.
    std::optional<std::size_t> diverged_at;
};

RolloutResult rollout(const Surrogate& s, const Field& v0, std::size_t n_steps, double dt_snapshot);

/// 100 * ||v - v_hat||^2 / ||v - mean(v)||^2 per recorded time.
std::vector<double> rse(const Trajectory& sim, const Trajectory& pred);

/// Time average of v_x(t)^k at every node, one array per requested order.
std::vector<std::vector<double>> raw_moments(const Trajectory& traj, std::span<const int> orders);

using StatePair = std::pair<Field, Field>;

enum class WindowSampling {
    Random,      // anchors and pairs drawn uniformly with replacement
    Exhaustive,  // every tile anchor of every pair exactly once, in order
};

struct TrainConfig {
    WindowGeometry geom;
    std::size_t hidden = 150;
    std::uint64_t seed = 0;
    double noise = 0.0;
    double ridge = kDefaultRidge;
    /// Draw count = draws_per_tile * tiles per snapshot * pairs, unless total_draws is set.
    std::size_t draws_per_tile = 200;
    std::optional<std::size_t> total_draws;
    WindowSampling sampling = WindowSampling::Random;
    SymmetryConfig symmetry;
    bool zero_mean_wrap = false;
};

/// Normalizer, frozen first layer and window moments gathered by training,
/// before the readout solve.
struct TrainingMoments {
    Normalizer normalizer;
    ElmParams params;
    MomentAccumulator acc;
};
TrainingMoments accumulate_training_moments(std::span<const StatePair> pairs, const TrainConfig& cfg);

/// Fits the normalizer on the inputs, accumulates moments over the window
/// draws (augmented over the subgroup when enabled), and solves the readout.
Surrogate train_surrogate(std::span<const StatePair> pairs, const TrainConfig& cfg);

/// `samples` consecutive-snapshot pairs spread evenly over the trajectory
/// (all pairs when fewer are available).
std::vector<StatePair> select_pairs(const Trajectory& traj, std::size_t samples);

/// Input/target window matrices (columns are samples) for a set of pairs,
/// in the surrogate's normalized coordinates. Used for held-out evaluation.
struct WindowSet {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
};
WindowSet make_window_set(const Surrogate& s, std::span<const StatePair> pairs, std::size_t count,
                          std::uint64_t seed);

/// Mean squared error of the surrogate on a window set, with or without
/// group averaging over its symmetry subgroup.
double window_mse(const Surrogate& s, const WindowSet& set, bool group_average);

} // namespace eelm
