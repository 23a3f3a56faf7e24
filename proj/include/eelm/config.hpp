#pragma once

#include "eelm/pde.hpp"
#include "eelm/rollout.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace eelm {

/// Everything one experiment needs: simulation, window/ELM setup, training
/// schedule and rollout. Serialized as flat `section.key = value` text.
struct ExperimentConfig {
    std::string name = "custom";

    Equation equation;
    double L = 200.0;
    std::size_t m = 512;
    double dt = 0.05;
    bool zero_mean_wrap = false;

    // simulation
    std::uint64_t sim_seed = 1;
    std::size_t burn_in = 4000;
    std::size_t sim_steps = 4000;

    // windows
    std::size_t extent = 7;
    std::size_t stride = 4;
    std::size_t pe_order = 0;

    // elm
    std::size_t hidden = 150;
    std::uint64_t elm_seed = 0;
    double ridge = kDefaultRidge;
    std::size_t draws_per_tile = 200;

    // training
    std::size_t samples = 20;
    double noise = 1e-4;
    std::size_t train_start = 0;
    std::size_t train_span = 2000;

    // symmetry
    std::string subgroup = "e";
    bool symmetry_train = false;
    bool symmetry_predict = false;

    // rollout
    std::size_t rollout_start = 2000;
    std::size_t rollout_steps = 2000;

    std::filesystem::path out_dir = "out";

    Grid grid() const;
    WindowGeometry geometry() const;
    SymmetryConfig symmetry() const;
    TrainConfig train_config() const;
};

/// Names of the built-in presets: ks1d-hom, ks1d-inhom, ks2d, ch2d.
std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(std::string_view name);

/// Applies one `key = value` assignment. Throws ConfigError naming the key.
void set_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses config text: one assignment per line, `#` starts a comment. A
/// `preset = name` line resets to that preset before later lines apply.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Cross-field validation with field-level messages.
void validate(const ExperimentConfig& cfg);

/// Round-trippable text form.
std::string to_text(const ExperimentConfig& cfg);

/// Numbers accept an optional `pi` factor: "60pi", "60*pi", "pi".
double parse_real(std::string_view key, std::string_view value);

std::string_view kind_token(EquationKind kind);

} // namespace eelm
