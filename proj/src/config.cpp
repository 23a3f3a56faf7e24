#include "eelm/config.hpp"

#include "eelm/errors.hpp"
#include "eelm/io.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>

namespace eelm {

Grid ExperimentConfig::grid() const { return make_grid(L, m, equation.dims()); }

WindowGeometry ExperimentConfig::geometry() const
{
    return make_geometry(equation.dims(), extent, stride, pe_order);
}

SymmetryConfig ExperimentConfig::symmetry() const
{
    return SymmetryConfig::parse(subgroup, symmetry_train, symmetry_predict);
}

TrainConfig ExperimentConfig::train_config() const
{
    TrainConfig t;
    t.geom = geometry();
    t.hidden = hidden;
    t.seed = elm_seed;
    t.noise = noise;
    t.ridge = ridge;
    t.draws_per_tile = draws_per_tile;
    t.symmetry = symmetry();
    t.zero_mean_wrap = zero_mean_wrap;
    return t;
}

std::vector<std::string> preset_names() { return {"ks1d-hom", "ks1d-inhom", "ks2d", "ch2d"}; }

ExperimentConfig preset(std::string_view name)
{
    ExperimentConfig c;
    c.name = std::string(name);
    if (name == "ks1d-hom") {
        c.equation = Equation::ks1d_hom();
        c.L = 200.0;
        c.m = 512;
        c.extent = 7;
        c.stride = 4;
        c.hidden = 150;
        c.noise = 1e-4;
        c.samples = 20;
        c.pe_order = 0;
        c.burn_in = 4000;
        c.train_start = 0;
        c.train_span = 2000;
        c.rollout_start = 2000;
        c.rollout_steps = 2000;
        c.sim_steps = 4000;
    } else if (name == "ks1d-inhom") {
        c.equation = Equation::ks1d_inhom(0.05, 50.0);
        c.L = 200.0;
        c.m = 512;
        c.extent = 7;
        c.stride = 4;
        c.hidden = 150;
        c.noise = 1e-4;
        c.samples = 200;
        c.pe_order = 3;
        c.burn_in = 4000;
        c.train_start = 0;
        c.train_span = 4000;
        c.rollout_start = 4000;
        c.rollout_steps = 2000;
        c.sim_steps = 6000;
    } else if (name == "ks2d") {
        c.equation = Equation::ks2d();
        c.L = 60.0 * std::numbers::pi;
        c.m = 256;
        c.zero_mean_wrap = true;
        c.extent = 2;
        c.stride = 4;
        c.hidden = 600;
        c.noise = 1e-4;
        c.samples = 1;
        c.pe_order = 0;
        c.burn_in = 4000;
        c.train_start = 0;
        c.train_span = 1;
        c.rollout_start = 1;
        c.rollout_steps = 400;
        c.sim_steps = 401;
    } else if (name == "ch2d") {
        c.equation = Equation::ch2d(0.5, ChForm::Standard);
        c.L = 100.0;
        c.m = 512;
        c.extent = 4;
        c.stride = 4;
        c.hidden = 500;
        c.noise = 1e-3;
        c.samples = 1;
        c.pe_order = 0;
        c.burn_in = 0;
        c.train_start = 200;
        c.train_span = 1;
        c.rollout_start = 200;
        c.rollout_steps = 400;
        c.sim_steps = 600;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    c.dt = 0.05;
    return c;
}

std::string_view kind_token(EquationKind kind)
{
    switch (kind) {
    case EquationKind::Ks1dHom:
        return "ks1d-hom";
    case EquationKind::Ks1dInhom:
        return "ks1d-inhom";
    case EquationKind::Ks2d:
        return "ks2d";
    case EquationKind::Ch2d:
        return "ch2d";
    }
    return "?";
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::uint64_t parse_uint(std::string_view key, std::string_view value)
{
    std::uint64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(value) + "'");
    return v;
}

bool parse_bool(std::string_view key, std::string_view value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(value) + "'");
}

EquationKind parse_kind(std::string_view value)
{
    for (auto k : {EquationKind::Ks1dHom, EquationKind::Ks1dInhom, EquationKind::Ks2d, EquationKind::Ch2d})
        if (kind_token(k) == value)
            return k;
    throw ConfigError("pde.kind: unknown equation '" + std::string(value) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"name", [](auto& c, auto, auto v) { c.name = std::string(v); }},
        {"pde.kind", [](auto& c, auto, auto v) { c.equation.kind = parse_kind(v); }},
        {"pde.gamma", [](auto& c, auto k, auto v) { c.equation.gamma = parse_real(k, v); }},
        {"pde.mu", [](auto& c, auto k, auto v) { c.equation.mu = parse_real(k, v); }},
        {"pde.lambda", [](auto& c, auto k, auto v) { c.equation.lambda = parse_real(k, v); }},
        {"pde.ch_form",
         [](auto& c, auto k, auto v) {
             if (v == "standard")
                 c.equation.ch_form = ChForm::Standard;
             else if (v == "literal")
                 c.equation.ch_form = ChForm::Literal;
             else
                 throw ConfigError(std::string(k) + ": expected 'standard' or 'literal'");
         }},
        {"pde.zero_mean_wrap", [](auto& c, auto k, auto v) { c.zero_mean_wrap = parse_bool(k, v); }},
        {"grid.L", [](auto& c, auto k, auto v) { c.L = parse_real(k, v); }},
        {"grid.m", [](auto& c, auto k, auto v) { c.m = parse_uint(k, v); }},
        {"time.dt", [](auto& c, auto k, auto v) { c.dt = parse_real(k, v); }},
        {"sim.seed", [](auto& c, auto k, auto v) { c.sim_seed = parse_uint(k, v); }},
        {"sim.burn_in", [](auto& c, auto k, auto v) { c.burn_in = parse_uint(k, v); }},
        {"sim.steps", [](auto& c, auto k, auto v) { c.sim_steps = parse_uint(k, v); }},
        {"window.extent", [](auto& c, auto k, auto v) { c.extent = parse_uint(k, v); }},
        {"window.stride", [](auto& c, auto k, auto v) { c.stride = parse_uint(k, v); }},
        {"window.pe_order", [](auto& c, auto k, auto v) { c.pe_order = parse_uint(k, v); }},
        {"elm.hidden", [](auto& c, auto k, auto v) { c.hidden = parse_uint(k, v); }},
        {"elm.seed", [](auto& c, auto k, auto v) { c.elm_seed = parse_uint(k, v); }},
        {"elm.ridge", [](auto& c, auto k, auto v) { c.ridge = parse_real(k, v); }},
        {"elm.draws_per_tile", [](auto& c, auto k, auto v) { c.draws_per_tile = parse_uint(k, v); }},
        {"train.samples", [](auto& c, auto k, auto v) { c.samples = parse_uint(k, v); }},
        {"train.noise", [](auto& c, auto k, auto v) { c.noise = parse_real(k, v); }},
        {"train.start", [](auto& c, auto k, auto v) { c.train_start = parse_uint(k, v); }},
        {"train.span", [](auto& c, auto k, auto v) { c.train_span = parse_uint(k, v); }},
        {"symmetry.subgroup", [](auto& c, auto, auto v) { c.subgroup = std::string(v); }},
        {"symmetry.train", [](auto& c, auto k, auto v) { c.symmetry_train = parse_bool(k, v); }},
        {"symmetry.predict", [](auto& c, auto k, auto v) { c.symmetry_predict = parse_bool(k, v); }},
        {"rollout.start", [](auto& c, auto k, auto v) { c.rollout_start = parse_uint(k, v); }},
        {"rollout.steps", [](auto& c, auto k, auto v) { c.rollout_steps = parse_uint(k, v); }},
        {"out.dir", [](auto& c, auto, auto v) { c.out_dir = std::string(v); }},
    };
    return table;
}

} // namespace

double parse_real(std::string_view key, std::string_view value)
{
    std::string_view num = trim(value);
    double factor = 1.0;
    if (num.ends_with("pi")) {
        factor = std::numbers::pi;
        num.remove_suffix(2);
        if (num.ends_with('*'))
            num.remove_suffix(1);
        if (num.empty())
            return factor;
    }
    const std::string s(num);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
    return v * factor;
}

void set_value(ExperimentConfig& cfg, std::string_view key, std::string_view value)
{
    key = trim(key);
    value = trim(value);
    if (key == "preset") {
        cfg = preset(value);
        return;
    }
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    it->second(cfg, key, value);
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        set_value(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, std::move(base));
}

void validate(const ExperimentConfig& cfg)
{
    const Grid grid = cfg.grid();
    validate(cfg.equation, grid);
    if (!(cfg.dt > 0.0))
        throw ConfigError("time.dt must be positive");
    const auto geom = cfg.geometry();
    check_fits(geom, grid);
    if (cfg.pe_order > 0 && cfg.equation.kind != EquationKind::Ks1dInhom)
        throw ConfigError("window.pe_order: positional encoding is only meaningful for ks1d-inhom");
    const auto sym = cfg.symmetry();
    if (!sym.trivial() && geom.dims == 1 && (cfg.symmetry_train || cfg.symmetry_predict))
        throw ConfigError("symmetry.subgroup: the 1D equations are not reflection-equivariant");
    if (!sym.trivial() && cfg.pe_order > 0 && (cfg.symmetry_train || cfg.symmetry_predict))
        throw ConfigError("symmetry.subgroup: cannot be combined with positional encoding");
    if (cfg.hidden < 1)
        throw ConfigError("elm.hidden must be at least 1");
    if (cfg.ridge < 0.0)
        throw ConfigError("elm.ridge must be non-negative");
    if (cfg.noise < 0.0)
        throw ConfigError("train.noise must be non-negative");
    if (cfg.samples < 1)
        throw ConfigError("train.samples must be at least 1");
    if (cfg.train_span < 1)
        throw ConfigError("train.span must be at least 1");
    if (cfg.draws_per_tile < 1)
        throw ConfigError("elm.draws_per_tile must be at least 1");
}

std::string to_text(const ExperimentConfig& c)
{
    using io::format_double;
    std::string s;
    auto kv = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    kv("name", c.name);
    kv("pde.kind", std::string(kind_token(c.equation.kind)));
    kv("pde.gamma", format_double(c.equation.gamma));
    kv("pde.mu", format_double(c.equation.mu));
    kv("pde.lambda", format_double(c.equation.lambda));
    kv("pde.ch_form", c.equation.ch_form == ChForm::Standard ? "standard" : "literal");
    kv("pde.zero_mean_wrap", c.zero_mean_wrap ? "true" : "false");
    kv("grid.L", format_double(c.L));
    kv("grid.m", std::to_string(c.m));
    kv("time.dt", format_double(c.dt));
    kv("sim.seed", std::to_string(c.sim_seed));
    kv("sim.burn_in", std::to_string(c.burn_in));
    kv("sim.steps", std::to_string(c.sim_steps));
    kv("window.extent", std::to_string(c.extent));
    kv("window.stride", std::to_string(c.stride));
    kv("window.pe_order", std::to_string(c.pe_order));
    kv("elm.hidden", std::to_string(c.hidden));
    kv("elm.seed", std::to_string(c.elm_seed));
    kv("elm.ridge", format_double(c.ridge));
    kv("elm.draws_per_tile", std::to_string(c.draws_per_tile));
    kv("train.samples", std::to_string(c.samples));
    kv("train.noise", format_double(c.noise));
    kv("train.start", std::to_string(c.train_start));
    kv("train.span", std::to_string(c.train_span));
    kv("symmetry.subgroup", c.subgroup);
    kv("symmetry.train", c.symmetry_train ? "true" : "false");
    kv("symmetry.predict", c.symmetry_predict ? "true" : "false");
    kv("rollout.start", std::to_string(c.rollout_start));
    kv("rollout.steps", std::to_string(c.rollout_steps));
    kv("out.dir", c.out_dir.string());
    return s;
}

} // namespace eelm
