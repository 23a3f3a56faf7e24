#pragma once

#include "eelm/field.hpp"

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace eelm {

/// Sliding-window layout: each input window spans `extent` extra nodes on
/// both sides of a `stride`-wide output block, per axis.
struct WindowGeometry {
    int dims = 1;
    std::size_t extent = 0;
    std::size_t stride = 1;
    /// 0 disables positional encoding; k > 0 appends k + 1 cosines.
    std::size_t pe_order = 0;

    std::size_t side() const { return 2 * extent + stride; }
    std::size_t window_len() const { return dims == 1 ? side() : side() * side(); }
    std::size_t pe_len() const { return pe_order > 0 ? pe_order + 1 : 0; }
    std::size_t input_len() const { return window_len() + pe_len(); }
    std::size_t output_len() const { return dims == 1 ? stride : stride * stride; }

    bool operator==(const WindowGeometry&) const = default;
};

WindowGeometry make_geometry(int dims, std::size_t extent, std::size_t stride, std::size_t pe_order);

/// Throws ConfigError unless the geometry tiles `grid` exactly.
void check_fits(const WindowGeometry& geom, const Grid& grid);

/// Index of the first output node of a window; `col` is unused in 1D.
struct Anchor {
    std::size_t row = 0;
    std::size_t col = 0;

    bool operator==(const Anchor&) const = default;
};

/// Values at anchor-extent ... anchor+stride-1+extent per axis, wrapped
/// periodically, row-major.
std::vector<double> extract_window(const Field& state, Anchor anchor, const WindowGeometry& geom);
void extract_window_into(const Field& state, Anchor anchor, const WindowGeometry& geom, std::span<double> out);

/// Values at anchor ... anchor+stride-1 per axis (wrapped), row-major.
std::vector<double> target_window(const Field& next_state, Anchor anchor, const WindowGeometry& geom);
void target_window_into(const Field& next_state, Anchor anchor, const WindowGeometry& geom, std::span<double> out);

/// Writes an output block back at its anchor; inverse of target_window.
void write_block(Field& state, Anchor anchor, const WindowGeometry& geom, std::span<const double> block);

/// {0, s, ..., m-s} per axis (Cartesian product in 2D, row-major order).
std::vector<Anchor> tile_anchors(std::size_t m, std::size_t stride, int dims);

/// (cos(pi x/L), cos(2 pi x/L), ..., cos(2^k pi x/L)).
std::vector<double> positional_encoding(double x, double L, std::size_t k);

/// Min-max scaling of state values into [0, 1].
class Normalizer {
public:
    Normalizer(double v_min, double v_max);

    static Normalizer fit(std::span<const Field> train_states);

    double normalize(double x) const { return (x - v_min_) / (v_max_ - v_min_); }
    double denormalize(double y) const { return v_min_ + y * (v_max_ - v_min_); }

    double v_min() const { return v_min_; }
    double v_max() const { return v_max_; }

private:
    double v_min_;
    double v_max_;
};

/// Adds i.i.d. N(0, sigma^2) noise to every entry of z.
void add_noise(std::span<double> z, double sigma, std::mt19937_64& rng);
std::vector<double> add_noise(std::vector<double> z, double sigma, std::mt19937_64& rng);

} // namespace eelm
