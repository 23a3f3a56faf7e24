#pragma once

#include "eelm/elm.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eelm {

/// The eight symmetries of the square, in Cayley-enumeration order.
/// Rotations are counterclockwise with the row index increasing downward.
/// FH mirrors columns (reverses a 1D vector), FV mirrors rows, FD transposes,
/// FA reflects across the anti-diagonal.
enum class Symmetry { R0, R90, R180, R270, FH, FV, FD, FA };

inline constexpr std::array<Symmetry, 8> kAllSymmetries = {
    Symmetry::R0, Symmetry::R90, Symmetry::R180, Symmetry::R270,
    Symmetry::FH, Symmetry::FV,  Symmetry::FD,   Symmetry::FA};

/// act(compose(g, h), w) == act(g, act(h, w)).
Symmetry compose(Symmetry g, Symmetry h);
Symmetry inverse(Symmetry g);

std::string_view token(Symmetry g);
/// Parses "e", "r90", "r180", "r270", "fh", "fv", "fd", "fa".
Symmetry parse_symmetry(std::string_view tok);

/// Source index of every output entry: act(g, w)[k] == w[perm[k]].
/// `side` is the window side; dims 1 accepts only R0 and FH.
std::vector<std::size_t> permutation(Symmetry g, std::size_t side, int dims);

/// Applies g to a square window (or 1D vector) stored row-major.
std::vector<double> act(Symmetry g, std::span<const double> w, int dims);

class SymmetryConfig {
public:
    /// Identity only, unused for training and prediction.
    SymmetryConfig();
    /// Validates that `subgroup` contains R0 and is closed under compose and
    /// inverse. Elements are stored in Cayley-enumeration order.
    SymmetryConfig(std::vector<Symmetry> subgroup, bool use_for_training, bool use_for_prediction);

    static SymmetryConfig full(bool use_for_training, bool use_for_prediction);
    /// Comma-separated tokens, e.g. "e,r90,r180,r270".
    static SymmetryConfig parse(std::string_view tokens, bool use_for_training, bool use_for_prediction);

    const std::vector<Symmetry>& subgroup() const { return subgroup_; }
    bool use_for_training() const { return train_; }
    bool use_for_prediction() const { return predict_; }
    bool trivial() const { return subgroup_.size() == 1; }
    std::string to_string() const;

    bool operator==(const SymmetryConfig&) const = default;

private:
    std::vector<Symmetry> subgroup_;
    bool train_ = false;
    bool predict_ = false;
};

using WindowPair = std::pair<std::vector<double>, std::vector<double>>;

/// Emits (act(g, z), act(g, z+)) for every pair and every g in the subgroup.
/// `pe_len` must be zero: a positional encoding breaks the symmetry.
std::vector<WindowPair> augment(std::span<const WindowPair> pairs, const SymmetryConfig& cfg, int dims,
                                std::size_t pe_len = 0);

/// (1/|G|) sum_g act(g^-1, model(act(g, z))) summed in Cayley order.
/// `model` maps a window to a vector-like output of output-window length.
template <typename Model>
std::vector<double> equivariant_predict(const Model& model, std::span<const double> z, const SymmetryConfig& cfg,
                                        int dims, std::size_t pe_len = 0);

/// Overload for a trained ELM.
std::vector<double> equivariant_predict(const ElmModel& model, std::span<const double> z, const SymmetryConfig& cfg,
                                        int dims, std::size_t pe_len = 0);

namespace detail {
std::size_t window_side(std::size_t len, int dims);
void require_no_encoding(std::size_t pe_len);
} // namespace detail

template <typename Model>
std::vector<double> equivariant_predict(const Model& model, std::span<const double> z, const SymmetryConfig& cfg,
                                        int dims, std::size_t pe_len)
{
    detail::require_no_encoding(pe_len);
    std::vector<double> sum;
    for (Symmetry g : cfg.subgroup()) {
        const auto zg = act(g, z, dims);
        const auto yg = model(std::span<const double>(zg));
        std::vector<double> y(yg.data(), yg.data() + yg.size());
        const auto back = act(inverse(g), y, dims);
        if (sum.empty())
            sum.assign(back.size(), 0.0);
        for (std::size_t k = 0; k < back.size(); ++k)
            sum[k] += back[k];
    }
    const double scale = 1.0 / static_cast<double>(cfg.subgroup().size());
    for (double& v : sum)
        v *= scale;
    return sum;
}

} // namespace eelm
