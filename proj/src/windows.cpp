#include "eelm/windows.hpp"

#include "eelm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eelm {

WindowGeometry make_geometry(int dims, std::size_t extent, std::size_t stride, std::size_t pe_order)
{
    if (dims != 1 && dims != 2)
        throw ConfigError("window: dims must be 1 or 2");
    if (stride < 1)
        throw ConfigError("window.stride must be at least 1");
    if (dims == 2 && pe_order > 0)
        throw ConfigError("window.pe_order: positional encoding is only supported in 1D");
    return WindowGeometry{dims, extent, stride, pe_order};
}

void check_fits(const WindowGeometry& geom, const Grid& grid)
{
    if (geom.dims != grid.dims)
        throw ConfigError("window dims do not match grid dims");
    if (grid.m % geom.stride != 0)
        throw ConfigError("window.stride must divide grid.m");
    if (geom.side() > grid.m)
        throw ConfigError("window does not fit the grid (2*extent + stride > m)");
}

namespace {

// (a + offset) mod m for a possibly negative offset.
std::size_t wrap(std::size_t a, std::ptrdiff_t offset, std::size_t m)
{
    const auto mm = static_cast<std::ptrdiff_t>(m);
    auto r = (static_cast<std::ptrdiff_t>(a) + offset) % mm;
    return static_cast<std::size_t>(r < 0 ? r + mm : r);
}

void gather(const Field& state, Anchor anchor, int dims, std::ptrdiff_t lo, std::size_t side, std::span<double> out)
{
    const std::size_t m = state.grid.m;
    if (anchor.row >= m || (dims == 2 && anchor.col >= m))
        throw ConfigError("window anchor out of range");
    if (dims == 1) {
        for (std::size_t a = 0; a < side; ++a)
            out[a] = state.values[wrap(anchor.row, lo + static_cast<std::ptrdiff_t>(a), m)];
        return;
    }
    for (std::size_t a = 0; a < side; ++a) {
        const std::size_t i = wrap(anchor.row, lo + static_cast<std::ptrdiff_t>(a), m);
        const double* row = state.values.data() + i * m;
        for (std::size_t b = 0; b < side; ++b)
            out[a * side + b] = row[wrap(anchor.col, lo + static_cast<std::ptrdiff_t>(b), m)];
    }
}

} // namespace

void extract_window_into(const Field& state, Anchor anchor, const WindowGeometry& geom, std::span<double> out)
{
    if (geom.dims != state.grid.dims || out.size() < geom.window_len())
        throw ConfigError("extract_window: geometry does not match state");
    gather(state, anchor, geom.dims, -static_cast<std::ptrdiff_t>(geom.extent), geom.side(), out);
}

std::vector<double> extract_window(const Field& state, Anchor anchor, const WindowGeometry& geom)
{
    std::vector<double> out(geom.window_len());
    extract_window_into(state, anchor, geom, out);
    return out;
}

void target_window_into(const Field& next_state, Anchor anchor, const WindowGeometry& geom, std::span<double> out)
{
    if (geom.dims != next_state.grid.dims || out.size() < geom.output_len())
        throw ConfigError("target_window: geometry does not match state");
    gather(next_state, anchor, geom.dims, 0, geom.stride, out);
}

std::vector<double> target_window(const Field& next_state, Anchor anchor, const WindowGeometry& geom)
{
    std::vector<double> out(geom.output_len());
    target_window_into(next_state, anchor, geom, out);
    return out;
}

void write_block(Field& state, Anchor anchor, const WindowGeometry& geom, std::span<const double> block)
{
    const std::size_t m = state.grid.m;
    const std::size_t s = geom.stride;
    if (geom.dims == 1) {
        for (std::size_t a = 0; a < s; ++a)
            state.values[(anchor.row + a) % m] = block[a];
        return;
    }
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b)
            state.values[((anchor.row + a) % m) * m + (anchor.col + b) % m] = block[a * s + b];
}

std::vector<Anchor> tile_anchors(std::size_t m, std::size_t stride, int dims)
{
    if (stride == 0 || m % stride != 0)
        throw ConfigError("tile_anchors: stride must divide m");
    std::vector<Anchor> anchors;
    if (dims == 1) {
        for (std::size_t i = 0; i < m; i += stride)
            anchors.push_back({i, 0});
        return anchors;
    }
    for (std::size_t i = 0; i < m; i += stride)
        for (std::size_t j = 0; j < m; j += stride)
            anchors.push_back({i, j});
    return anchors;
}

std::vector<double> positional_encoding(double x, double L, std::size_t k)
{
    std::vector<double> p(k + 1);
    double freq = std::numbers::pi / L;
    for (std::size_t j = 0; j <= k; ++j, freq *= 2.0)
        p[j] = std::cos(freq * x);
    return p;
}

Normalizer::Normalizer(double v_min, double v_max) : v_min_(v_min), v_max_(v_max)
{
    if (!(v_max > v_min) || !std::isfinite(v_min) || !std::isfinite(v_max))
        throw ConfigError("normalizer: v_max must exceed v_min");
}

Normalizer Normalizer::fit(std::span<const Field> train_states)
{
    if (train_states.empty())
        throw ConfigError("normalizer: no training states");
    double lo = train_states.front().values.at(0);
    double hi = lo;
    for (const auto& f : train_states) {
        const auto [mn, mx] = std::minmax_element(f.values.begin(), f.values.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    if (!(hi > lo))
        throw ConfigError("normalizer: training data is constant");
    return Normalizer(lo, hi);
}

void add_noise(std::span<double> z, double sigma, std::mt19937_64& rng)
{
    if (sigma < 0.0)
        throw ConfigError("noise sigma must be non-negative");
    if (sigma == 0.0)
        return;
    std::normal_distribution<double> dist(0.0, sigma);
    for (double& v : z)
        v += dist(rng);
}

std::vector<double> add_noise(std::vector<double> z, double sigma, std::mt19937_64& rng)
{
    add_noise(std::span<double>(z), sigma, rng);
    return z;
}

} // namespace eelm
