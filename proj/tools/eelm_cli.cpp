#include "eelm/commands.hpp"
#include "eelm/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace eelm;
using namespace eelm::cli;

struct CommonOptions {
    std::string config;
    std::string preset;
    std::vector<std::string> sets;
    std::string out;
};

void add_common(CLI::App* sub, CommonOptions& o)
{
    sub->add_option("--config", o.config, "config file (key = value lines)");
    sub->add_option("--preset", o.preset, "built-in preset: ks1d-hom, ks1d-inhom, ks2d, ch2d");
    sub->add_option("--set", o.sets, "override one key, e.g. --set elm.hidden=300");
    sub->add_option("--out", o.out, "output directory");
}

ExperimentConfig resolve(const CommonOptions& o)
{
    ExperimentConfig cfg;
    if (!o.preset.empty())
        cfg = preset(o.preset);
    if (!o.config.empty())
        cfg = load_config(o.config, cfg);
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        set_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (!o.out.empty())
        cfg.out_dir = o.out;
    validate(cfg);
    return cfg;
}

fs::path prepare(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Equivariant ELM surrogates for periodic PDEs"};
    app.require_subcommand(1);

    CommonOptions sim_o, train_o, sweep_o;
    std::optional<std::uint64_t> sim_seed, train_seed;

    auto* sim = app.add_subcommand("simulate", "integrate a PDE and write trajectory.bin");
    add_common(sim, sim_o);
    sim->add_option("--seed", sim_seed, "initial-condition seed (sim.seed)");

    std::string train_traj;
    auto* train = app.add_subcommand("train", "fit a surrogate and write model.bin");
    add_common(train, train_o);
    train->add_option("--trajectory", train_traj, "training trajectory")->required();
    train->add_option("--seed", train_seed, "ELM weight seed (elm.seed)");

    std::string pred_model, pred_initial, pred_out = "out";
    std::size_t pred_start = 0, pred_steps = 0;
    auto* pred = app.add_subcommand("predict", "roll a surrogate out and write prediction.bin");
    pred->add_option("--model", pred_model, "model file")->required();
    pred->add_option("--initial", pred_initial, "trajectory holding the initial state")->required();
    pred->add_option("--start", pred_start, "index of the initial state");
    pred->add_option("--steps", pred_steps, "number of surrogate steps")->required();
    pred->add_option("--out", pred_out, "output directory");

    std::string ev_sim, ev_pred, ev_out = "out";
    EvaluateOptions ev_opts;
    auto* ev = app.add_subcommand("evaluate", "write rse.csv, moments and heatmaps");
    ev->add_option("--sim", ev_sim, "reference trajectory")->required();
    ev->add_option("--pred", ev_pred, "predicted trajectory")->required();
    ev->add_option("--sim-start", ev_opts.sim_start, "reference index aligned with prediction state 0");
    ev->add_flag("--heatmaps", ev_opts.heatmaps, "write PGM heatmaps");
    ev->add_option("--heatmap-every", ev_opts.heatmap_every, "2D: snapshot interval between heatmaps");
    ev->add_option("--out", ev_out, "output directory");

    std::string seeds = "0..9";
    auto* sweep = app.add_subcommand("sweep", "simulate once, then train/predict/evaluate per ELM seed");
    add_common(sweep, sweep_o);
    sweep->add_option("--seeds", seeds, "ELM seed range a..b");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*sim) {
            auto cfg = resolve(sim_o);
            if (sim_seed)
                cfg.sim_seed = *sim_seed;
            const auto file = cmd_simulate(cfg, prepare(cfg.out_dir));
            std::printf("wrote %s\n", file.string().c_str());
        } else if (*train) {
            auto cfg = resolve(train_o);
            if (train_seed)
                cfg.elm_seed = *train_seed;
            const auto file = cmd_train(cfg, train_traj, prepare(cfg.out_dir));
            std::printf("wrote %s\n", file.string().c_str());
        } else if (*pred) {
            const auto outcome = cmd_predict(pred_model, pred_initial, pred_start, pred_steps, prepare(pred_out));
            std::printf("wrote %s\n", outcome.file.string().c_str());
            if (outcome.diverged_at) {
                std::fprintf(stderr, "error: surrogate diverged at step %zu\n", *outcome.diverged_at);
                return kDivergence;
            }
        } else if (*ev) {
            const auto r = cmd_evaluate(ev_sim, ev_pred, prepare(ev_out), ev_opts);
            std::printf("evaluated %zu states, final rse %.3f%%\n", r.size(), r.empty() ? 0.0 : r.back());
        } else if (*sweep) {
            const auto cfg = resolve(sweep_o);
            const auto [a, b] = parse_seed_range(seeds);
            const fs::path dir = prepare(cfg.out_dir);
            for (auto s = a;; ++s) {
                prepare(dir / ("seed_" + std::to_string(s)));
                if (s == b)
                    break;
            }
            cmd_sweep(cfg, a, b, dir);
            std::printf("wrote %s\n", (dir / "sweep_rse.csv").string().c_str());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kDivergence;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kIoError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kOk;
}
