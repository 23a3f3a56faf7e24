#include "eelm/errors.hpp"
#include "eelm/symmetry.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

using namespace eelm;
using S = Symmetry;
using V = std::vector<double>;

namespace {

// Hand-written action of each element on a d x d row-major array.
V oracle(S g, const V& w, std::size_t d)
{
    V out(w.size());
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            std::size_t si = i, sj = j;
            switch (g) {
            case S::R0: break;
            case S::R90: si = j, sj = d - 1 - i; break;
            case S::R180: si = d - 1 - i, sj = d - 1 - j; break;
            case S::R270: si = d - 1 - j, sj = i; break;
            case S::FH: sj = d - 1 - j; break;
            case S::FV: si = d - 1 - i; break;
            case S::FD: si = j, sj = i; break;
            case S::FA: si = d - 1 - j, sj = d - 1 - i; break;
            }
            out[i * d + j] = w[si * d + sj];
        }
    return out;
}

V random_window(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    V w(n);
    for (auto& v : w)
        v = u(rng);
    return w;
}

V iota(std::size_t n)
{
    V w(n);
    for (std::size_t k = 0; k < n; ++k)
        w[k] = double(k);
    return w;
}

} // namespace

TEST(Act, R90Example)
{
    EXPECT_EQ(act(S::R90, V{1, 2, 3, 4}, 2), (V{2, 4, 1, 3}));
    EXPECT_EQ(act(S::R0, V{1, 2, 3, 4}, 2), (V{1, 2, 3, 4}));
}

TEST(Act, MatchesHandOracleOnSeveralSizes)
{
    for (std::size_t d : {2, 3, 4, 7})
        for (S g : kAllSymmetries)
            EXPECT_EQ(act(g, iota(d * d), 2), oracle(g, iota(d * d), d)) << token(g) << " d=" << d;
}

TEST(Act, InverseUndoes)
{
    std::mt19937_64 rng(1);
    for (S g : kAllSymmetries) {
        const V w = random_window(36, rng);
        EXPECT_EQ(act(g, act(inverse(g), w, 2), 2), w);
        EXPECT_EQ(act(inverse(g), act(g, w, 2), 2), w);
    }
}

TEST(Act, IsAPermutation)
{
    for (S g : kAllSymmetries) {
        auto p = permutation(g, 5, 2);
        std::sort(p.begin(), p.end());
        for (std::size_t k = 0; k < p.size(); ++k)
            EXPECT_EQ(p[k], k);
    }
}

TEST(Act, OneDimensionalRestriction)
{
    EXPECT_EQ(act(S::FH, V{1, 2, 3, 4, 5}, 1), (V{5, 4, 3, 2, 1}));
    EXPECT_EQ(act(S::R0, V{1, 2, 3}, 1), (V{1, 2, 3}));
    for (S g : {S::R90, S::R180, S::R270, S::FV, S::FD, S::FA})
        EXPECT_THROW(act(g, V{1, 2, 3}, 1), ConfigError) << token(g);
    EXPECT_THROW(act(S::R90, V{1, 2, 3, 4, 5}, 2), ConfigError);
}

TEST(Group, NamedCompositions)
{
    EXPECT_EQ(compose(S::R90, S::R90), S::R180);
    EXPECT_EQ(compose(S::R90, S::R270), S::R0);
    EXPECT_EQ(inverse(S::R90), S::R270);
    EXPECT_EQ(inverse(S::R180), S::R180);
    for (S r : {S::FH, S::FV, S::FD, S::FA}) {
        EXPECT_EQ(inverse(r), r);
        EXPECT_EQ(compose(r, r), S::R0);
    }
}

TEST(Group, CayleyTableMatchesPermutationComposition)
{
    const V w = iota(9);
    for (S g : kAllSymmetries)
        for (S h : kAllSymmetries) {
            const V brute = oracle(g, oracle(h, w, 3), 3);
            // The brute-force composite must be exactly one element: compose(g, h).
            int matches = 0;
            for (S k : kAllSymmetries)
                if (oracle(k, w, 3) == brute) {
                    ++matches;
                    EXPECT_EQ(compose(g, h), k) << token(g) << "*" << token(h);
                }
            EXPECT_EQ(matches, 1);
        }
}

TEST(Group, Axioms)
{
    for (S a : kAllSymmetries) {
        EXPECT_EQ(compose(a, S::R0), a);
        EXPECT_EQ(compose(S::R0, a), a);
        EXPECT_EQ(compose(a, inverse(a)), S::R0);
        for (S b : kAllSymmetries)
            for (S c : kAllSymmetries)
                EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
    }
}

TEST(Tokens, RoundTripAndErrors)
{
    for (S g : kAllSymmetries)
        EXPECT_EQ(parse_symmetry(token(g)), g);
    EXPECT_EQ(token(S::R0), "e");
    EXPECT_THROW(parse_symmetry("r45"), ConfigError);
}

TEST(SymmetryConfig, ClosureValidation)
{
    EXPECT_NO_THROW(SymmetryConfig({S::R0, S::R90, S::R180, S::R270}, true, true));
    EXPECT_NO_THROW(SymmetryConfig({S::R0, S::FH}, true, false));
    EXPECT_NO_THROW(SymmetryConfig({S::R0, S::R180, S::FH, S::FV}, true, false));
    EXPECT_THROW(SymmetryConfig({S::R90, S::R180}, true, true), ConfigError);
    EXPECT_THROW(SymmetryConfig({S::R0, S::R90}, true, true), ConfigError);
    EXPECT_THROW(SymmetryConfig({S::R0, S::FH, S::FD}, true, true), ConfigError);
    EXPECT_THROW(SymmetryConfig({}, true, true), ConfigError);
}

TEST(SymmetryConfig, ParseOrderAndDefaults)
{
    const SymmetryConfig d;
    EXPECT_TRUE(d.trivial());
    EXPECT_FALSE(d.use_for_training());
    EXPECT_FALSE(d.use_for_prediction());

    const auto c = SymmetryConfig::parse("r270, e ,r90,r180", true, false);
    const std::vector<S> expected{S::R0, S::R90, S::R180, S::R270};
    EXPECT_EQ(c.subgroup(), expected);
    EXPECT_EQ(c.to_string(), "e,r90,r180,r270");
    EXPECT_EQ(SymmetryConfig::parse("all", true, true), SymmetryConfig::full(true, true));
    EXPECT_EQ(SymmetryConfig::full(false, true).subgroup().size(), 8u);
    EXPECT_THROW(SymmetryConfig::parse("e,bogus", true, true), ConfigError);
}

TEST(Augment, SizesAndIdentity)
{
    std::mt19937_64 rng(2);
    std::vector<WindowPair> pairs{{random_window(36, rng), random_window(4, rng)},
                                  {random_window(36, rng), random_window(4, rng)}};
    const auto same = augment(pairs, SymmetryConfig({S::R0}, true, false), 2);
    EXPECT_EQ(same, pairs);

    const auto full = augment(std::span(pairs).first(1), SymmetryConfig::full(true, false), 2);
    ASSERT_EQ(full.size(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_EQ(full[k].first, act(kAllSymmetries[k], pairs[0].first, 2));
        EXPECT_EQ(full[k].second, act(kAllSymmetries[k], pairs[0].second, 2));
    }
    EXPECT_EQ(augment(pairs, SymmetryConfig::full(true, false), 2).size(), 16u);
    EXPECT_THROW(augment(pairs, SymmetryConfig::full(true, false), 2, 4), ConfigError);
}

TEST(Augment, PreservesRotationInvariantFlow)
{
    // One explicit step of the 5-point heat equation on the central 2x2 block.
    const std::size_t d = 4;
    auto flow = [&](const V& z) {
        V out;
        for (std::size_t i = 1; i <= 2; ++i)
            for (std::size_t j = 1; j <= 2; ++j) {
                const double c = z[i * d + j];
                const double lap = z[(i - 1) * d + j] + z[(i + 1) * d + j] + z[i * d + j - 1] + z[i * d + j + 1] - 4 * c;
                out.push_back(c + 0.1 * lap);
            }
        return out;
    };
    std::mt19937_64 rng(3);
    std::vector<WindowPair> pairs;
    for (int n = 0; n < 5; ++n) {
        const V z = random_window(d * d, rng);
        pairs.emplace_back(z, flow(z));
    }
    for (const auto& [z, zp] : augment(pairs, SymmetryConfig::full(true, false), 2)) {
        const V expect = flow(z);
        for (std::size_t k = 0; k < 4; ++k)
            EXPECT_NEAR(zp[k], expect[k], 1e-15);
    }
}

TEST(EquivariantPredict, FullGroupIsExactlyEquivariant)
{
    const std::size_t side = 8, out_side = 4;
    ElmModel model{init_elm(side * side, 50, 7), {}};
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    model.readout.theta = Eigen::MatrixXd::NullaryExpr(long(out_side * out_side), 50, [&] { return n(rng); });
    const auto cfg = SymmetryConfig::full(false, true);
    for (int trial = 0; trial < 100; ++trial) {
        const V z = random_window(side * side, rng);
        const V base = equivariant_predict(model, z, cfg, 2);
        for (S h : kAllSymmetries) {
            const V lhs = equivariant_predict(model, act(h, z, 2), cfg, 2);
            const V rhs = act(h, base, 2);
            for (std::size_t k = 0; k < lhs.size(); ++k)
                EXPECT_NEAR(lhs[k], rhs[k], 1e-12);
        }
    }
}

TEST(EquivariantPredict, IdentitySubgroupIsPlainPrediction)
{
    ElmModel model{init_elm(16, 20, 3), {Eigen::MatrixXd::Constant(4, 20, 0.01)}};
    std::mt19937_64 rng(4);
    const V z = random_window(16, rng);
    const auto plain = model.predict(z);
    const V avg = equivariant_predict(model, z, SymmetryConfig(), 2);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_EQ(avg[k], plain[Eigen::Index(k)]);
}

TEST(EquivariantPredict, AveragingFixesEquivariantModels)
{
    // Central-block extraction is itself D4-equivariant.
    auto centre = [](std::span<const double> z) {
        std::vector<double> out;
        for (std::size_t i = 1; i <= 2; ++i)
            for (std::size_t j = 1; j <= 2; ++j)
                out.push_back(z[i * 4 + j] * z[i * 4 + j]);
        return out;
    };
    std::mt19937_64 rng(5);
    const V z = random_window(16, rng);
    const V avg = equivariant_predict(centre, z, SymmetryConfig::full(false, true), 2);
    const V raw = centre(z);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_NEAR(avg[k], raw[k], 1e-12);
    EXPECT_THROW(equivariant_predict(centre, z, SymmetryConfig::full(false, true), 2, 3), ConfigError);
}
