#include "eelm/errors.hpp"
#include "eelm/windows.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace eelm;
using std::numbers::pi;

namespace {

Field iota_field(const Grid& g, double start = 0)
{
    Field f(g);
    std::iota(f.values.begin(), f.values.end(), start);
    return f;
}

using V = std::vector<double>;

} // namespace

TEST(Geometry, Lengths)
{
    const auto g1 = make_geometry(1, 7, 4, 3);
    EXPECT_EQ(g1.window_len(), 18u);
    EXPECT_EQ(g1.pe_len(), 4u);
    EXPECT_EQ(g1.input_len(), 22u);
    EXPECT_EQ(g1.output_len(), 4u);
    EXPECT_EQ(make_geometry(1, 7, 4, 0).input_len(), 18u);

    const auto g2 = make_geometry(2, 2, 4, 0);
    EXPECT_EQ(g2.window_len(), 64u);
    EXPECT_EQ(g2.output_len(), 16u);
}

TEST(Geometry, Errors)
{
    EXPECT_THROW(make_geometry(1, 1, 0, 0), ConfigError);
    EXPECT_THROW(make_geometry(3, 1, 1, 0), ConfigError);
    EXPECT_THROW(make_geometry(2, 1, 2, 3), ConfigError);
    EXPECT_THROW(check_fits(make_geometry(1, 1, 3, 0), make_grid(1, 8, 1)), ConfigError);
    EXPECT_THROW(check_fits(make_geometry(1, 3, 4, 0), make_grid(1, 8, 1)), ConfigError);
    EXPECT_THROW(check_fits(make_geometry(2, 1, 4, 0), make_grid(1, 8, 1)), ConfigError);
    EXPECT_NO_THROW(check_fits(make_geometry(1, 2, 4, 0), make_grid(1, 8, 1)));
}

TEST(ExtractWindow, OneDimensionalExamples)
{
    const Field v = iota_field(make_grid(1, 8, 1));
    const auto geom = make_geometry(1, 1, 3, 0);
    EXPECT_EQ(extract_window(v, {0, 0}, geom), (V{7, 0, 1, 2, 3}));
    EXPECT_EQ(extract_window(v, {3, 0}, geom), (V{2, 3, 4, 5, 6}));
    EXPECT_EQ(extract_window(v, {7, 0}, geom), (V{6, 7, 0, 1, 2}));
    EXPECT_THROW(extract_window(v, {8, 0}, geom), ConfigError);
}

TEST(ExtractWindow, TwoDimensionalWrappedPatch)
{
    const Field v = iota_field(Grid{2, 1.0, 4});
    const auto geom = make_geometry(2, 1, 2, 0);
    EXPECT_EQ(extract_window(v, {0, 0}, geom), (V{15, 12, 13, 14, 3, 0, 1, 2, 7, 4, 5, 6, 11, 8, 9, 10}));
    EXPECT_THROW(extract_window(v, {0, 4}, geom), ConfigError);
    EXPECT_THROW(extract_window(v, {0, 0}, make_geometry(1, 1, 2, 0)), ConfigError);
}

TEST(TargetWindow, Examples)
{
    const Field v1 = iota_field(make_grid(1, 8, 1), 10);
    EXPECT_EQ(target_window(v1, {3, 0}, make_geometry(1, 1, 3, 0)), (V{13, 14, 15}));

    const Field v2 = iota_field(Grid{2, 1.0, 4});
    const auto geom = make_geometry(2, 1, 2, 0);
    EXPECT_EQ(target_window(v2, {2, 2}, geom), (V{10, 11, 14, 15}));
    EXPECT_EQ(target_window(v2, {3, 3}, geom), (V{15, 12, 3, 0}));
}

TEST(TileAnchors, Examples)
{
    const auto a1 = tile_anchors(8, 4, 1);
    ASSERT_EQ(a1.size(), 2u);
    EXPECT_EQ(a1[0].row, 0u);
    EXPECT_EQ(a1[1].row, 4u);

    const auto a2 = tile_anchors(8, 4, 2);
    const std::vector<Anchor> expected{{0, 0}, {0, 4}, {4, 0}, {4, 4}};
    EXPECT_EQ(a2, expected);

    EXPECT_EQ(tile_anchors(512, 4, 1).size(), 128u);
    EXPECT_THROW(tile_anchors(8, 3, 1), ConfigError);
}

TEST(TileAnchors, IdentityReassemblyIsExact)
{
    for (int dims : {1, 2}) {
        const Grid g = make_grid(3.0, 16, dims);
        Field v(g);
        for (std::size_t k = 0; k < v.values.size(); ++k)
            v[k] = std::sin(0.37 * double(k)) + 0.1 * double(k);
        const auto geom = make_geometry(dims, 2, 4, 0);
        Field out(g);
        for (const auto& a : tile_anchors(g.m, geom.stride, dims))
            write_block(out, a, geom, target_window(v, a, geom));
        EXPECT_EQ(out, v);
    }
}

TEST(ExtractWindow, TranslationCovariance)
{
    for (int dims : {1, 2}) {
        const Grid g = make_grid(1.0, 12, dims);
        Field v(g);
        for (std::size_t k = 0; k < v.values.size(); ++k)
            v[k] = std::cos(1.3 * double(k * k));
        const auto geom = make_geometry(dims, 2, 3, 0);
        const std::size_t c = 5, m = g.m;
        Field shifted(g);
        for (std::size_t i = 0; i < (dims == 1 ? m : m * m); ++i) {
            if (dims == 1) {
                shifted[(i + c) % m] = v[i];
            } else {
                const std::size_t r = i / m, col = i % m;
                shifted.at((r + c) % m, (col + c) % m) = v[i];
            }
        }
        for (std::size_t r = 0; r < m; ++r) {
            const Anchor a{r, dims == 1 ? 0 : (r * 7) % m};
            const Anchor b{(a.row + c) % m, dims == 1 ? 0 : (a.col + c) % m};
            EXPECT_EQ(extract_window(shifted, b, geom), extract_window(v, a, geom));
        }
    }
}

TEST(PositionalEncoding, Examples)
{
    for (std::size_t k : {0, 1, 3, 5})
        EXPECT_EQ(positional_encoding(0.0, 200, k), V(k + 1, 1.0));
    const auto e = positional_encoding(200, 200, 1);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_NEAR(e[0], -1.0, 1e-15);
    EXPECT_NEAR(e[1], 1.0, 1e-15);

    const double x = 37.5, L = 200;
    const auto e3 = positional_encoding(x, L, 3);
    ASSERT_EQ(e3.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j)
        EXPECT_NEAR(e3[j], std::cos(std::pow(2.0, double(j)) * pi * x / L), 1e-15);
}

TEST(Normalizer, ExamplesAndRoundTrip)
{
    const Normalizer n(-2, 2);
    EXPECT_DOUBLE_EQ(n.normalize(0), 0.5);
    EXPECT_DOUBLE_EQ(n.normalize(-2), 0.0);
    EXPECT_DOUBLE_EQ(n.normalize(2), 1.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    const Normalizer w(-1.37, 3.9);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        EXPECT_NEAR(w.denormalize(w.normalize(x)), x, 1e-14);
    }
}

TEST(Normalizer, FitAndErrors)
{
    const Grid g = make_grid(1, 8, 1);
    std::vector<Field> states{iota_field(g, -3), iota_field(g, 1)};
    const auto n = Normalizer::fit(states);
    EXPECT_EQ(n.v_min(), -3.0);
    EXPECT_EQ(n.v_max(), 8.0);

    EXPECT_THROW(Normalizer(1, 1), ConfigError);
    EXPECT_THROW(Normalizer::fit(std::vector<Field>{}), ConfigError);
    std::vector<Field> flat{Field(g, V(8, 2.0))};
    EXPECT_THROW(Normalizer::fit(flat), ConfigError);
}

TEST(Noise, ZeroSigmaIsIdentityAndSeeded)
{
    std::mt19937_64 rng(3);
    const V z{1, 2, 3};
    EXPECT_EQ(add_noise(z, 0.0, rng), z);
    std::mt19937_64 a(5), b(5);
    EXPECT_EQ(add_noise(z, 1e-4, a), add_noise(z, 1e-4, b));
    EXPECT_THROW(add_noise(z, -1.0, rng), ConfigError);
}

TEST(Noise, EmpiricalStdWithinOnePercent)
{
    std::mt19937_64 rng(7);
    const double sigma = 1e-4;
    const auto eps = add_noise(V(1'000'000, 0.0), sigma, rng);
    double mean = 0, sq = 0;
    for (double e : eps)
        mean += e;
    mean /= double(eps.size());
    for (double e : eps)
        sq += (e - mean) * (e - mean);
    const double sd = std::sqrt(sq / double(eps.size() - 1));
    EXPECT_NEAR(sd, sigma, 0.01 * sigma);
    EXPECT_LT(std::abs(mean), 5 * sigma / 1000);
}
