#include "eelm/commands.hpp"

#include "eelm/errors.hpp"
#include "eelm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace eelm::cli {

fs::path cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    validate(cfg);
    const Grid grid = cfg.grid();
    const Field v0 = attractor_init(cfg.equation, grid, cfg.sim_seed, cfg.burn_in, cfg.dt, cfg.zero_mean_wrap);
    const Trajectory traj = simulate(cfg.equation, v0, cfg.dt, cfg.sim_steps, 1, cfg.zero_mean_wrap);
    const fs::path file = out_dir / "trajectory.bin";
    io::write_trajectory(file, traj);
    io::write_atomic(out_dir / "config.txt", to_text(cfg));
    return file;
}

fs::path cmd_train(const ExperimentConfig& cfg, const fs::path& trajectory, const fs::path& out_dir)
{
    validate(cfg);
    const Trajectory traj = io::read_trajectory(trajectory);
    if (!(traj.grid == cfg.grid()))
        throw ConfigError("train: trajectory grid does not match grid.L / grid.m");
    if (std::abs(traj.dt_snapshot - cfg.dt) > 1e-12 * cfg.dt)
        throw ConfigError("train: trajectory snapshot spacing must equal time.dt");
    const std::size_t end = cfg.train_start + cfg.train_span;
    if (end >= traj.states.size())
        throw ConfigError("train: train.start + train.span is beyond the trajectory");

    Trajectory window{traj.grid, traj.dt_snapshot,
                      {traj.states.begin() + static_cast<std::ptrdiff_t>(cfg.train_start),
                       traj.states.begin() + static_cast<std::ptrdiff_t>(end + 1)}};
    const auto pairs = select_pairs(window, cfg.samples);
    const Surrogate s = train_surrogate(pairs, cfg.train_config());
    const fs::path file = out_dir / "model.bin";
    io::write_model(file, s, {traj.grid, cfg.dt});
    return file;
}

PredictOutcome cmd_predict(const fs::path& model, const fs::path& initial, std::size_t start_index,
                           std::size_t n_steps, const fs::path& out_dir)
{
    io::ModelInfo info;
    const Surrogate s = io::read_model(model, &info);
    const Trajectory init = io::read_trajectory(initial);
    if (start_index >= init.states.size())
        throw ConfigError("predict: start index is beyond the initial-state file");
    if (!(init.grid == info.grid))
        throw ConfigError("predict: initial state grid does not match the model's training grid");
    auto result = rollout(s, init.states[start_index], n_steps, info.dt);
    const fs::path file = out_dir / "prediction.bin";
    io::write_trajectory(file, result.trajectory);
    return {file, result.diverged_at};
}

namespace {

void write_heatmaps(const Trajectory& traj, const fs::path& dir, const std::string& stem, double lo, double hi,
                    std::size_t every)
{
    const std::size_t m = traj.grid.m;
    if (traj.grid.dims == 1) {
        std::vector<double> img;
        img.reserve(traj.states.size() * m);
        for (const auto& f : traj.states)
            img.insert(img.end(), f.values.begin(), f.values.end());
        io::write_pgm(dir / (stem + ".pgm"), m, traj.states.size(), img, lo, hi);
        return;
    }
    for (std::size_t t = 0; t < traj.states.size(); t += std::max<std::size_t>(every, 1)) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%05zu.pgm", stem.c_str(), t);
        io::write_pgm(dir / name, m, m, traj.states[t].values, lo, hi);
    }
}

} // namespace

std::vector<double> cmd_evaluate(const fs::path& sim_file, const fs::path& pred_file, const fs::path& out_dir,
                                 const EvaluateOptions& opts)
{
    const Trajectory sim_full = io::read_trajectory(sim_file);
    const Trajectory pred = io::read_trajectory(pred_file);
    if (opts.sim_start >= sim_full.states.size())
        throw ConfigError("evaluate: sim start index is beyond the simulated trajectory");
    const std::size_t n = std::min(pred.states.size(), sim_full.states.size() - opts.sim_start);
    Trajectory sim{sim_full.grid, sim_full.dt_snapshot,
                   {sim_full.states.begin() + static_cast<std::ptrdiff_t>(opts.sim_start),
                    sim_full.states.begin() + static_cast<std::ptrdiff_t>(opts.sim_start + n)}};
    Trajectory p{pred.grid, pred.dt_snapshot, {pred.states.begin(), pred.states.begin() + static_cast<std::ptrdiff_t>(n)}};

    const auto r = rse(sim, p);
    io::write_rse_csv(out_dir / "rse.csv", sim.dt_snapshot, r);
    static constexpr int orders[] = {1, 2, 3};
    io::write_moments_csv(out_dir / "moments.csv", p.grid, raw_moments(p, orders));
    io::write_moments_csv(out_dir / "moments_sim.csv", sim.grid, raw_moments(sim, orders));

    if (opts.heatmaps) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto* t : {&sim, &p}) {
            for (const auto& f : t->states) {
                const auto [mn, mx] = std::minmax_element(f.values.begin(), f.values.end());
                lo = std::min(lo, *mn);
                hi = std::max(hi, *mx);
            }
        }
        write_heatmaps(sim, out_dir, "sim", lo, hi, opts.heatmap_every);
        write_heatmaps(p, out_dir, "pred", lo, hi, opts.heatmap_every);
    }
    return r;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(std::string_view text)
{
    auto parse = [&](std::string_view s) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw ConfigError("--seeds: expected a..b, got '" + std::string(text) + "'");
        return v;
    };
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const auto v = parse(text);
        return {v, v};
    }
    const auto a = parse(text.substr(0, dots));
    const auto b = parse(text.substr(dots + 2));
    if (b < a)
        throw ConfigError("--seeds: empty range");
    return {a, b};
}

void cmd_sweep(ExperimentConfig cfg, std::uint64_t first, std::uint64_t last, const fs::path& out_dir)
{
    validate(cfg);
    const fs::path sim = cmd_simulate(cfg, out_dir);
    std::vector<std::vector<double>> curves;
    for (std::uint64_t seed = first; seed <= last; ++seed) {
        cfg.elm_seed = seed;
        const fs::path dir = out_dir / ("seed_" + std::to_string(seed));
        const fs::path model = cmd_train(cfg, sim, dir);
        const auto outcome = cmd_predict(model, sim, cfg.rollout_start, cfg.rollout_steps, dir);
        auto r = cmd_evaluate(sim, outcome.file, dir, {cfg.rollout_start, false, 1});
        // Diverged models count as infinitely bad for the remaining steps.
        r.resize(cfg.rollout_steps + 1, std::numeric_limits<double>::infinity());
        curves.push_back(std::move(r));
        if (seed == last)
            break;
    }

    std::string csv = "t";
    for (std::uint64_t seed = first; seed <= last; ++seed) {
        csv += ",seed_" + std::to_string(seed);
        if (seed == last)
            break;
    }
    csv += ",median\n";
    for (std::size_t t = 0; t <= cfg.rollout_steps; ++t) {
        std::vector<double> col;
        csv += io::format_double(static_cast<double>(t) * cfg.dt);
        for (const auto& c : curves) {
            csv += "," + io::format_double(c[t]);
            col.push_back(c[t]);
        }
        std::sort(col.begin(), col.end());
        const std::size_t k = col.size();
        const double median = k % 2 ? col[k / 2] : 0.5 * (col[k / 2 - 1] + col[k / 2]);
        csv += "," + io::format_double(median) + "\n";
    }
    io::write_atomic(out_dir / "sweep_rse.csv", csv);
}

} // namespace eelm::cli
