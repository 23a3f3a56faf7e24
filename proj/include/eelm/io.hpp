#pragma once

#include "eelm/pde.hpp"
#include "eelm/rollout.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace eelm::io {

/// Container layout: ASCII `key=value` header lines starting with `magic`
/// and `version`, a blank line, then raw little-endian float64 payload.
struct Container {
    std::map<std::string, std::string> header;
    std::vector<double> payload;
};

inline constexpr const char* kTrajectoryMagic = "eelm-trajectory";
inline constexpr const char* kModelMagic = "eelm-model";
inline constexpr int kFormatVersion = 1;

std::string format_double(double v);

/// Writes to `path.tmp` then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

/// Serializes with header keys in `order` first (the rest alphabetically).
std::string encode(const Container& c, std::span<const std::string> order);
Container decode(const std::string& bytes, const std::string& expected_magic);
std::string read_file(const std::filesystem::path& path);

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);

struct ModelInfo {
    Grid grid;            // grid the model was trained on
    double dt = 0.0;      // time step it emulates
};

void write_model(const std::filesystem::path& path, const Surrogate& s, const ModelInfo& info);
Surrogate read_model(const std::filesystem::path& path, ModelInfo* info = nullptr);

/// `t,rse_percent`, full precision.
void write_rse_csv(const std::filesystem::path& path, double dt_snapshot, std::span<const double> rse);
/// `x,m1,m2,m3`; x is the node coordinate in 1D and the flat node index in 2D.
void write_moments_csv(const std::filesystem::path& path, const Grid& grid,
                       const std::vector<std::vector<double>>& moments);

/// 8-bit binary PGM (P5), values mapped linearly from [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const double> values, double lo, double hi);

/// 64-bit FNV-1a over a file's bytes.
std::uint64_t checksum(const std::filesystem::path& path);

} // namespace eelm::io
