#include "eelm/rollout.hpp"

#include "eelm/errors.hpp"

#include <cmath>
#include <random>

namespace eelm {

void validate(const Surrogate& s)
{
    if (s.geom.input_len() != s.elm.l_in())
        throw ConfigError("surrogate: window input length does not match ELM l_in");
    if (s.geom.output_len() != s.elm.l_out())
        throw ConfigError("surrogate: window output length does not match ELM l_out");
    if (s.geom.pe_len() > 0 && !s.symmetry.trivial() &&
        (s.symmetry.use_for_training() || s.symmetry.use_for_prediction()))
        throw ConfigError("surrogate: symmetry cannot be combined with positional encoding");
}

namespace {

// Permutes the window rows of Z (positional-encoding rows stay in place).
Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& Z, const std::vector<std::size_t>& perm)
{
    Eigen::MatrixXd out(Z.rows(), Z.cols());
    for (std::size_t k = 0; k < perm.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = Z.row(static_cast<Eigen::Index>(perm[k]));
    for (auto k = static_cast<Eigen::Index>(perm.size()); k < Z.rows(); ++k)
        out.row(k) = Z.row(k);
    return out;
}

Eigen::MatrixXd predict_columns(const Surrogate& s, const Eigen::MatrixXd& Z, bool group_average)
{
    if (!group_average || s.symmetry.trivial())
        return s.elm.predict_batch(Z);

    const int dims = s.geom.dims;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.geom.output_len()), Z.cols());
    for (Symmetry g : s.symmetry.subgroup()) {
        const auto in_perm = permutation(g, s.geom.side(), dims);
        const auto out_perm = permutation(inverse(g), s.geom.stride, dims);
        const Eigen::MatrixXd y = s.elm.predict_batch(permute_rows(Z, in_perm));
        sum += permute_rows(y, out_perm);
    }
    return sum / static_cast<double>(s.symmetry.subgroup().size());
}

Field normalized(const Normalizer& n, Field f)
{
    for (double& v : f.values)
        v = n.normalize(v);
    return f;
}

Field centered(Field f)
{
    const double mu = f.mean();
    for (double& v : f.values)
        v -= mu;
    return f;
}

// Fills column `col` of Z with the window at `anchor` plus its encoding.
void fill_input(const Field& state, Anchor anchor, const WindowGeometry& geom, Eigen::MatrixXd& Z, Eigen::Index col)
{
    double* dst = Z.col(col).data();
    extract_window_into(state, anchor, geom, std::span<double>(dst, geom.window_len()));
    if (geom.pe_len() > 0) {
        const auto pe = positional_encoding(static_cast<double>(anchor.row) * state.grid.dx(), state.grid.L,
                                            geom.pe_order);
        std::copy(pe.begin(), pe.end(), dst + geom.window_len());
    }
}

} // namespace

Field step_surrogate(const Surrogate& s, const Field& state, std::size_t step_index)
{
    check_fits(s.geom, state.grid);
    const double mu = s.zero_mean_wrap ? state.mean() : 0.0;
    Field work = state;
    for (double& v : work.values)
        v = s.normalizer.normalize(v - mu);

    const auto anchors = tile_anchors(state.grid.m, s.geom.stride, s.geom.dims);
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(s.geom.input_len()), static_cast<Eigen::Index>(anchors.size()));
    for (std::size_t t = 0; t < anchors.size(); ++t)
        fill_input(work, anchors[t], s.geom, Z, static_cast<Eigen::Index>(t));

    const Eigen::MatrixXd Y = predict_columns(s, Z, s.symmetry.use_for_prediction());
    if (!Y.allFinite())
        throw DivergenceError("surrogate produced a non-finite value", step_index);
    if (Y.cwiseAbs().maxCoeff() > kDivergenceBound)
        throw DivergenceError("surrogate left the normalized range", step_index);

    Field out(state.grid);
    for (std::size_t t = 0; t < anchors.size(); ++t) {
        const auto col = Y.col(static_cast<Eigen::Index>(t));
        write_block(out, anchors[t], s.geom, std::span<const double>(col.data(), s.geom.output_len()));
    }
    for (double& v : out.values)
        v = s.normalizer.denormalize(v);
    if (s.zero_mean_wrap) {
        const double drift = out.mean();
        for (double& v : out.values)
            v += mu - drift;
    }
    return out;
}

RolloutResult rollout(const Surrogate& s, const Field& v0, std::size_t n_steps, double dt_snapshot)
{
    validate(s);
    RolloutResult result{{v0.grid, dt_snapshot, {v0}}, std::nullopt};
    result.trajectory.states.reserve(n_steps + 1);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        try {
            result.trajectory.states.push_back(step_surrogate(s, result.trajectory.states.back(), step));
        } catch (const DivergenceError& e) {
            result.diverged_at = e.step();
            break;
        }
    }
    return result;
}

std::vector<double> rse(const Trajectory& sim, const Trajectory& pred)
{
    if (!(sim.grid == pred.grid))
        throw ConfigError("rse: trajectories live on different grids");
    if (sim.states.size() != pred.states.size())
        throw ConfigError("rse: trajectories have different lengths");
    if (std::abs(sim.dt_snapshot - pred.dt_snapshot) > 1e-12 * std::abs(sim.dt_snapshot))
        throw ConfigError("rse: trajectories have different snapshot spacing");

    std::vector<double> out(sim.states.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const auto& v = sim.states[t].values;
        const auto& w = pred.states[t].values;
        const double mu = sim.states[t].mean();
        double err = 0.0, var = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            err += (v[k] - w[k]) * (v[k] - w[k]);
            var += (v[k] - mu) * (v[k] - mu);
        }
        if (!(var > 0.0))
            throw ConfigError("rse: simulated state is constant at t index " + std::to_string(t));
        out[t] = 100.0 * err / var;
    }
    return out;
}

std::vector<std::vector<double>> raw_moments(const Trajectory& traj, std::span<const int> orders)
{
    if (traj.states.empty())
        throw ConfigError("raw_moments: empty trajectory");
    const std::size_t n = traj.grid.size();
    const double scale = 1.0 / static_cast<double>(traj.states.size());
    std::vector<std::vector<double>> out;
    for (int k : orders) {
        if (k < 1)
            throw ConfigError("raw_moments: order must be at least 1");
        std::vector<double> acc(n, 0.0);
        for (const auto& f : traj.states)
            for (std::size_t x = 0; x < n; ++x)
                acc[x] += std::pow(f.values[x], k);
        for (double& v : acc)
            v *= scale;
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<StatePair> select_pairs(const Trajectory& traj, std::size_t samples)
{
    if (traj.states.size() < 2)
        throw ConfigError("select_pairs: trajectory needs at least two states");
    if (samples == 0)
        throw ConfigError("train.samples must be at least 1");
    const std::size_t available = traj.states.size() - 1;
    const std::size_t n = std::min(samples, available);
    std::vector<StatePair> pairs;
    pairs.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        const std::size_t t = n == available ? q : q * available / n;
        pairs.emplace_back(traj.states[t], traj.states[t + 1]);
    }
    return pairs;
}

namespace {

struct PreparedPairs {
    Normalizer normalizer;
    std::vector<Field> inputs;
    std::vector<Field> targets;
};

PreparedPairs prepare(std::span<const StatePair> pairs, bool zero_mean_wrap)
{
    std::vector<Field> inputs, targets;
    for (const auto& [in, out] : pairs) {
        if (!(in.grid == out.grid))
            throw ConfigError("train: pair states live on different grids");
        inputs.push_back(zero_mean_wrap ? centered(in) : in);
        targets.push_back(zero_mean_wrap ? centered(out) : out);
    }
    auto norm = Normalizer::fit(inputs);
    for (auto& f : inputs)
        f = normalized(norm, std::move(f));
    for (auto& f : targets)
        f = normalized(norm, std::move(f));
    return {norm, std::move(inputs), std::move(targets)};
}

std::mt19937_64 sampling_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

} // namespace

TrainingMoments accumulate_training_moments(std::span<const StatePair> pairs, const TrainConfig& cfg)
{
    if (pairs.empty())
        throw ConfigError("train: at least one state pair is required");
    const Grid grid = pairs.front().first.grid;
    check_fits(cfg.geom, grid);
    if (cfg.hidden < 1)
        throw ConfigError("elm.hidden must be at least 1");
    const bool augment_training = cfg.symmetry.use_for_training() && !cfg.symmetry.trivial();
    if (cfg.geom.pe_len() > 0 && augment_training)
        throw ConfigError("symmetry augmentation cannot be combined with positional encoding");
    if (cfg.noise < 0.0)
        throw ConfigError("train.noise must be non-negative");

    auto data = prepare(pairs, cfg.zero_mean_wrap);
    const ElmParams params = init_elm(cfg.geom.input_len(), cfg.hidden, cfg.seed);

    const auto anchors = tile_anchors(grid.m, cfg.geom.stride, cfg.geom.dims);
    const std::size_t draws = cfg.sampling == WindowSampling::Exhaustive
                                  ? anchors.size() * pairs.size()
                                  : cfg.total_draws.value_or(cfg.draws_per_tile * anchors.size() * pairs.size());

    const std::vector<Symmetry> group =
        augment_training ? cfg.symmetry.subgroup() : std::vector<Symmetry>{Symmetry::R0};
    std::vector<std::vector<std::size_t>> in_perm, out_perm;
    for (Symmetry g : group) {
        in_perm.push_back(permutation(g, cfg.geom.side(), cfg.geom.dims));
        out_perm.push_back(permutation(g, cfg.geom.stride, cfg.geom.dims));
    }

    auto rng = sampling_rng(cfg.seed, 1);
    std::uniform_int_distribution<std::size_t> pick_pair(0, pairs.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_node(0, grid.m - 1);

    const auto l_in = static_cast<Eigen::Index>(cfg.geom.input_len());
    const auto l_out = static_cast<Eigen::Index>(cfg.geom.output_len());
    const std::size_t wlen = cfg.geom.window_len();
    constexpr std::size_t kBatch = 512;
    Eigen::MatrixXd Z(l_in, static_cast<Eigen::Index>(kBatch));
    Eigen::MatrixXd T(l_out, static_cast<Eigen::Index>(kBatch));
    std::vector<double> z(cfg.geom.input_len()), zp(cfg.geom.output_len());

    MomentAccumulator acc(cfg.geom.output_len(), cfg.hidden);
    Eigen::Index filled = 0;
    auto flush = [&] {
        if (filled == 0)
            return;
        acc.add_batch(embed_batch(params, Z.leftCols(filled)), T.leftCols(filled));
        filled = 0;
    };

    for (std::size_t d = 0; d < draws; ++d) {
        std::size_t p;
        Anchor a;
        if (cfg.sampling == WindowSampling::Exhaustive) {
            p = d / anchors.size();
            a = anchors[d % anchors.size()];
        } else {
            p = pick_pair(rng);
            a.row = pick_node(rng);
            a.col = cfg.geom.dims == 2 ? pick_node(rng) : 0;
        }
        extract_window_into(data.inputs[p], a, cfg.geom, std::span<double>(z.data(), wlen));
        add_noise(std::span<double>(z.data(), wlen), cfg.noise, rng);
        if (cfg.geom.pe_len() > 0) {
            const auto pe = positional_encoding(static_cast<double>(a.row) * grid.dx(), grid.L, cfg.geom.pe_order);
            std::copy(pe.begin(), pe.end(), z.begin() + static_cast<std::ptrdiff_t>(wlen));
        }
        target_window_into(data.targets[p], a, cfg.geom, zp);

        for (std::size_t g = 0; g < group.size(); ++g) {
            auto zcol = Z.col(filled);
            for (std::size_t k = 0; k < wlen; ++k)
                zcol(static_cast<Eigen::Index>(k)) = z[in_perm[g][k]];
            for (std::size_t k = wlen; k < z.size(); ++k)
                zcol(static_cast<Eigen::Index>(k)) = z[k];
            auto tcol = T.col(filled);
            for (std::size_t k = 0; k < zp.size(); ++k)
                tcol(static_cast<Eigen::Index>(k)) = zp[out_perm[g][k]];
            if (++filled == static_cast<Eigen::Index>(kBatch))
                flush();
        }
    }
    flush();
    return {data.normalizer, params, std::move(acc)};
}

Surrogate train_surrogate(std::span<const StatePair> pairs, const TrainConfig& cfg)
{
    auto moments = accumulate_training_moments(pairs, cfg);
    Surrogate s;
    s.geom = cfg.geom;
    s.normalizer = moments.normalizer;
    s.symmetry = cfg.symmetry;
    s.zero_mean_wrap = cfg.zero_mean_wrap;
    s.elm.readout = solve_readout(moments.acc, cfg.ridge);
    s.elm.params = std::move(moments.params);
    return s;
}

WindowSet make_window_set(const Surrogate& s, std::span<const StatePair> pairs, std::size_t count,
                          std::uint64_t seed)
{
    if (pairs.empty())
        throw ConfigError("window set: no pairs");
    const Grid grid = pairs.front().first.grid;
    check_fits(s.geom, grid);

    std::vector<Field> inputs, targets;
    for (const auto& [in, out] : pairs) {
        inputs.push_back(normalized(s.normalizer, s.zero_mean_wrap ? centered(in) : in));
        targets.push_back(normalized(s.normalizer, s.zero_mean_wrap ? centered(out) : out));
    }

    auto rng = sampling_rng(seed, 2);
    std::uniform_int_distribution<std::size_t> pick_pair(0, pairs.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_node(0, grid.m - 1);
    WindowSet set{Eigen::MatrixXd(static_cast<Eigen::Index>(s.geom.input_len()), static_cast<Eigen::Index>(count)),
                  Eigen::MatrixXd(static_cast<Eigen::Index>(s.geom.output_len()), static_cast<Eigen::Index>(count))};
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t p = pick_pair(rng);
        Anchor a{pick_node(rng), s.geom.dims == 2 ? pick_node(rng) : 0};
        fill_input(inputs[p], a, s.geom, set.inputs, static_cast<Eigen::Index>(c));
        double* dst = set.targets.col(static_cast<Eigen::Index>(c)).data();
        target_window_into(targets[p], a, s.geom, std::span<double>(dst, s.geom.output_len()));
    }
    return set;
}

double window_mse(const Surrogate& s, const WindowSet& set, bool group_average)
{
    const Eigen::MatrixXd y = predict_columns(s, set.inputs, group_average);
    return (y - set.targets).squaredNorm() / static_cast<double>(set.targets.size());
}

} // namespace eelm
