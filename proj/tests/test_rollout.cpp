#include "eelm/errors.hpp"
#include "eelm/rollout.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace eelm;
using std::numbers::pi;

namespace {

Trajectory constant_traj(const Grid& g, std::vector<std::vector<double>> states, double dt = 0.1)
{
    Trajectory t{g, dt, {}};
    for (auto& s : states)
        t.states.emplace_back(g, std::move(s));
    return t;
}

const Trajectory& ks1d_data()
{
    static const Trajectory traj = [] {
        const Grid g = make_grid(50, 64, 1);
        const Field v0 = attractor_init(Equation::ks1d_hom(), g, 3, 1000, 0.05, false);
        return simulate(Equation::ks1d_hom(), v0, 0.05, 100, 1, false);
    }();
    return traj;
}

const Trajectory& ks2d_data()
{
    static const Trajectory traj = [] {
        const Grid g = make_grid(20 * pi, 64, 2);
        const Field v0 = attractor_init(Equation::ks2d(), g, 4, 300, 0.05, true);
        return simulate(Equation::ks2d(), v0, 0.05, 2, 1, true);
    }();
    return traj;
}

Field rotate90(const Field& f)
{
    Field out(f.grid);
    const std::size_t m = f.grid.m;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            out.at(i, j) = f.at(j, m - 1 - i);
    return out;
}

double max_abs_diff(const Field& a, const Field& b)
{
    double e = 0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

} // namespace

TEST(Rse, Examples)
{
    const Grid g{1, 4.0, 4};
    const auto sim = constant_traj(g, {{1, 2, 3, 4}});
    const auto pred = constant_traj(g, {{1, 2, 3, 5}});
    const auto r = rse(sim, pred);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0], 20.0, 1e-12);

    EXPECT_EQ(rse(sim, sim), std::vector<double>{0.0});
    const auto baseline = constant_traj(g, {{2.5, 2.5, 2.5, 2.5}});
    EXPECT_NEAR(rse(sim, baseline)[0], 100.0, 1e-12);
}

TEST(Rse, Errors)
{
    const Grid g{1, 4.0, 4};
    const auto a = constant_traj(g, {{1, 2, 3, 4}});
    EXPECT_THROW(rse(a, constant_traj(g, {{1, 2, 3, 4}, {1, 2, 3, 4}})), ConfigError);
    EXPECT_THROW(rse(a, constant_traj(g, {{1, 2, 3, 4}}, 0.2)), ConfigError);
    EXPECT_THROW(rse(a, constant_traj(Grid{1, 5.0, 4}, {{1, 2, 3, 4}})), ConfigError);
    const auto flat = constant_traj(g, {{2, 2, 2, 2}});
    EXPECT_THROW(rse(flat, a), ConfigError);
}

TEST(RawMoments, ConstantAndHandAveraged)
{
    const Grid g{1, 3.0, 3};
    const auto c = constant_traj(g, {{1.5, 1.5, 1.5}, {1.5, 1.5, 1.5}});
    const std::vector<int> orders{1, 2, 3};
    const auto mc = raw_moments(c, orders);
    ASSERT_EQ(mc.size(), 3u);
    for (int k = 0; k < 3; ++k)
        for (double v : mc[std::size_t(k)])
            EXPECT_NEAR(v, std::pow(1.5, k + 1), 1e-15);

    const auto two = constant_traj(g, {{1, -2, 0.5}, {3, 4, -1.5}});
    const auto m = raw_moments(two, orders);
    const std::vector<double> a{1, -2, 0.5}, b{3, 4, -1.5};
    for (std::size_t x = 0; x < 3; ++x) {
        EXPECT_NEAR(m[0][x], (a[x] + b[x]) / 2, 1e-14);
        EXPECT_NEAR(m[1][x], (a[x] * a[x] + b[x] * b[x]) / 2, 1e-14);
        EXPECT_NEAR(m[2][x], (a[x] * a[x] * a[x] + b[x] * b[x] * b[x]) / 2, 1e-14);
    }

    EXPECT_THROW(raw_moments(Trajectory{g, 0.1, {}}, orders), ConfigError);
    const std::vector<int> bad{0};
    EXPECT_THROW(raw_moments(two, bad), ConfigError);
}

TEST(RawMoments, WrappedTrajectoryKeepsInitialMean)
{
    const auto& traj = ks2d_data();
    const std::vector<int> k1{1};
    const auto m1 = raw_moments(traj, k1)[0];
    double mean = 0;
    for (double v : m1)
        mean += v;
    mean /= double(m1.size());
    EXPECT_NEAR(mean, traj.states[0].mean(), 1e-10);
}

TEST(SelectPairs, SpreadAndErrors)
{
    const auto& traj = ks1d_data();
    const auto all = select_pairs(traj, 1000);
    ASSERT_EQ(all.size(), 100u);
    EXPECT_EQ(all[37].first, traj.states[37]);
    EXPECT_EQ(all[37].second, traj.states[38]);
    const auto few = select_pairs(traj, 4);
    ASSERT_EQ(few.size(), 4u);
    EXPECT_EQ(few[1].first, traj.states[25]);
    EXPECT_EQ(few[3].second, traj.states[76]);
    EXPECT_THROW(select_pairs(traj, 0), ConfigError);
    EXPECT_THROW(select_pairs(Trajectory{traj.grid, 0.05, {traj.states[0]}}, 1), ConfigError);
}

TEST(Train, ExhaustiveMomentsMatchBatchOracle)
{
    const auto& traj = ks1d_data();
    const auto pairs = select_pairs(traj, 2);
    TrainConfig cfg;
    cfg.geom = make_geometry(1, 3, 4, 0);
    cfg.hidden = 40;
    cfg.seed = 5;
    cfg.sampling = WindowSampling::Exhaustive;
    const auto tm = accumulate_training_moments(pairs, cfg);

    // Independent one-pass batch over all tiles of both pairs.
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pairs)
        for (double v : p.first.values)
            lo = std::min(lo, v), hi = std::max(hi, v);
    EXPECT_EQ(tm.normalizer.v_min(), lo);
    EXPECT_EQ(tm.normalizer.v_max(), hi);
    const std::size_t m = traj.grid.m, side = 10;
    Eigen::MatrixXd Z(long(side), long(2 * m / 4)), T(4, long(2 * m / 4));
    long col = 0;
    for (const auto& [in, out] : pairs)
        for (std::size_t a = 0; a < m; a += 4, ++col) {
            for (std::size_t k = 0; k < side; ++k)
                Z(long(k), col) = (in[(a + m - 3 + k) % m] - lo) / (hi - lo);
            for (std::size_t k = 0; k < 4; ++k)
                T(long(k), col) = (out[a + k] - lo) / (hi - lo);
        }
    const auto p = init_elm(side, 40, 5);
    Eigen::MatrixXd Phi(40, Z.cols());
    for (long c = 0; c < Z.cols(); ++c)
        for (long i = 0; i < 40; ++i) {
            const double u = p.W.row(i).dot(Z.col(c)) + p.b[i];
            Phi(i, c) = std::log1p(std::exp(u));
        }
    const Eigen::MatrixXd C = T * Phi.transpose() / double(Z.cols());
    const Eigen::MatrixXd D = Phi * Phi.transpose() / double(Z.cols());
    EXPECT_EQ(tm.acc.count(), std::size_t(Z.cols()));
    EXPECT_LT((tm.acc.C() - C).norm() / C.norm(), 1e-10);
    EXPECT_LT((tm.acc.D() - D).norm() / D.norm(), 1e-10);
}

TEST(Train, DrawCountsAndDeterminism)
{
    const auto& traj = ks1d_data();
    const auto pairs = select_pairs(traj, 3);
    TrainConfig cfg;
    cfg.geom = make_geometry(1, 2, 4, 0);
    cfg.hidden = 20;
    cfg.draws_per_tile = 5;
    cfg.noise = 1e-4;
    EXPECT_EQ(accumulate_training_moments(pairs, cfg).acc.count(), 5u * 16u * 3u);
    cfg.total_draws = 77;
    EXPECT_EQ(accumulate_training_moments(pairs, cfg).acc.count(), 77u);

    const auto a = train_surrogate(pairs, cfg);
    const auto b = train_surrogate(pairs, cfg);
    EXPECT_EQ(a.elm.readout.theta, b.elm.readout.theta);
    cfg.seed = 1;
    EXPECT_NE(a.elm.readout.theta, train_surrogate(pairs, cfg).elm.readout.theta);
}

TEST(Train, Errors)
{
    const auto& traj = ks1d_data();
    const auto pairs = select_pairs(traj, 2);
    TrainConfig cfg;
    cfg.geom = make_geometry(1, 2, 4, 0);
    EXPECT_THROW(train_surrogate({}, cfg), ConfigError);
    cfg.geom = make_geometry(1, 2, 3, 0);
    EXPECT_THROW(train_surrogate(pairs, cfg), ConfigError);
    cfg.geom = make_geometry(1, 2, 4, 2);
    cfg.symmetry = SymmetryConfig::parse("e,fh", true, false);
    EXPECT_THROW(train_surrogate(pairs, cfg), ConfigError);
    cfg.symmetry = {};
    cfg.noise = -1;
    EXPECT_THROW(train_surrogate(pairs, cfg), ConfigError);
}

TEST(Step, IdentityFlowOracle)
{
    const auto& traj = ks1d_data();
    std::vector<StatePair> pairs;
    for (std::size_t t = 0; t < 50; t += 5)
        pairs.emplace_back(traj.states[t], traj.states[t]);
    TrainConfig cfg;
    cfg.geom = make_geometry(1, 2, 4, 0);
    cfg.hidden = 150;
    cfg.sampling = WindowSampling::Exhaustive;
    const auto s = train_surrogate(pairs, cfg);
    for (const auto& [in, out] : pairs)
        EXPECT_LT(max_abs_diff(step_surrogate(s, in), in), 1e-3);
}

TEST(Step, WrapPreservesMeanAndRolloutBasics)
{
    const auto& traj = ks2d_data();
    const auto pairs = select_pairs(traj, 1);
    TrainConfig cfg;
    cfg.geom = make_geometry(2, 2, 4, 0);
    cfg.hidden = 120;
    cfg.zero_mean_wrap = true;
    cfg.sampling = WindowSampling::Exhaustive;
    const auto s = train_surrogate(pairs, cfg);

    Field shifted = traj.states[1];
    for (auto& v : shifted.values)
        v += 0.37;
    const Field out = step_surrogate(s, shifted);
    EXPECT_NEAR(out.mean(), shifted.mean(), 1e-10);

    const auto r0 = rollout(s, traj.states[0], 0, 0.05);
    ASSERT_EQ(r0.trajectory.states.size(), 1u);
    EXPECT_FALSE(r0.diverged_at);

    const auto r1 = rollout(s, traj.states[0], 5, 0.05);
    const auto r2 = rollout(s, traj.states[0], 5, 0.05);
    ASSERT_EQ(r1.trajectory.states.size(), 6u);
    for (std::size_t t = 0; t < 6; ++t)
        EXPECT_EQ(r1.trajectory.states[t], r2.trajectory.states[t]);
}

TEST(Step, DivergenceIsReportedWithStep)
{
    const auto& traj = ks1d_data();
    const auto pairs = select_pairs(traj, 2);
    TrainConfig cfg;
    cfg.geom = make_geometry(1, 2, 4, 0);
    cfg.hidden = 30;
    cfg.sampling = WindowSampling::Exhaustive;
    auto s = train_surrogate(pairs, cfg);
    s.elm.readout.theta *= 1e3;
    try {
        step_surrogate(s, traj.states[0], 7);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.step(), 7u);
    }
    const auto r = rollout(s, traj.states[0], 10, 0.05);
    ASSERT_TRUE(r.diverged_at);
    EXPECT_EQ(*r.diverged_at, 1u);
    EXPECT_EQ(r.trajectory.states.size(), 1u);
}

TEST(Step, GroupAveragedRolloutCommutesWithRotation)
{
    const auto& traj = ks2d_data();
    const auto pairs = select_pairs(traj, 1);
    TrainConfig cfg;
    cfg.geom = make_geometry(2, 2, 4, 0);
    cfg.hidden = 100;
    cfg.zero_mean_wrap = true;
    cfg.sampling = WindowSampling::Exhaustive;
    cfg.symmetry = SymmetryConfig::full(true, true);
    const auto s = train_surrogate(pairs, cfg);

    Field a = traj.states[0];
    Field b = rotate90(a);
    for (int step = 0; step < 5; ++step) {
        a = step_surrogate(s, a);
        b = step_surrogate(s, b);
        EXPECT_LT(max_abs_diff(b, rotate90(a)), 1e-10) << "step " << step;
    }
}

TEST(Surrogate, ValidateDimensions)
{
    Surrogate s;
    s.geom = make_geometry(1, 2, 4, 0);
    s.elm.params = init_elm(8, 10, 1);
    s.elm.readout.theta = Eigen::MatrixXd::Zero(4, 10);
    EXPECT_NO_THROW(validate(s));
    s.elm.readout.theta = Eigen::MatrixXd::Zero(3, 10);
    EXPECT_THROW(validate(s), ConfigError);
    s.elm.readout.theta = Eigen::MatrixXd::Zero(4, 10);
    s.geom = make_geometry(1, 3, 4, 0);
    EXPECT_THROW(validate(s), ConfigError);
}
