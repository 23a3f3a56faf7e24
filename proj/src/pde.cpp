#include "eelm/pde.hpp"

#include "eelm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

namespace eelm {

void validate(const Equation& eq, const Grid& grid)
{
    if (eq.dims() != grid.dims)
        throw ConfigError("equation dims do not match grid dims");
    if (eq.kind == EquationKind::Ch2d && !(eq.gamma > 0.0))
        throw ConfigError("pde.gamma must be positive for ch2d");
    if (eq.kind == EquationKind::Ks1dInhom && !(eq.lambda > 0.0))
        throw ConfigError("pde.lambda must be positive for ks1d-inhom");
    if (!std::isfinite(eq.mu))
        throw ConfigError("pde.mu must be finite");
}

namespace {

// |k|^2 for every mode of the full layout.
std::vector<double> wavenumber_squared(const Grid& grid)
{
    const auto k = wavenumbers(grid);
    const std::size_t m = grid.m;
    std::vector<double> k2(grid.size());
    if (grid.dims == 1) {
        for (std::size_t j = 0; j < m; ++j)
            k2[j] = k[j] * k[j];
    } else {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                k2[i * m + j] = k[i] * k[i] + k[j] * k[j];
    }
    return k2;
}

bool all_finite(std::span<const Complex> v)
{
    return std::all_of(v.begin(), v.end(),
                       [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

} // namespace

std::vector<double> linear_symbol(const Equation& eq, const Grid& grid)
{
    validate(eq, grid);
    const double g = eq.kind == EquationKind::Ch2d ? eq.gamma : 1.0;
    auto symbol = wavenumber_squared(grid);
    for (double& s : symbol)
        s = s - g * s * s;
    return symbol;
}

NonlinearOperator::NonlinearOperator(const Equation& eq, const Grid& grid)
    : eq_(eq), grid_(grid), k_(wavenumbers(grid)), a_(grid.size()), b_(grid.size()), c_(grid.size())
{
    validate(eq, grid);
    if (eq.kind == EquationKind::Ks1dInhom) {
        Field f(grid);
        for (std::size_t i = 0; i < grid.m; ++i)
            f[i] = eq.mu * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) * grid.dx() / eq.lambda);
        forcing_ = to_spectral(f).coeffs;
    }
}

void NonlinearOperator::operator()(std::span<const Complex> vhat, std::span<Complex> out)
{
    const std::size_t m = grid_.m;
    const std::size_t n = grid_.size();
    const std::size_t nyquist = m / 2;
    const double scale = 1.0 / static_cast<double>(n);
    SpectralField work(grid_);

    switch (eq_.kind) {
    case EquationKind::Ks1dHom:
    case EquationKind::Ks1dInhom: {
        // -v v_x in conservative form -1/2 (v^2)_x
        fft::transform(grid_, vhat, a_, +1);
        for (std::size_t j = 0; j < n; ++j)
            work.coeffs[j] = a_[j].real() * a_[j].real();
        fft::transform(grid_, work.coeffs, b_, -1);
        for (std::size_t j = 0; j < n; ++j)
            work.coeffs[j] = b_[j] * scale;
        dealias_in_place(work);
        for (std::size_t j = 0; j < m; ++j)
            out[j] = j == nyquist ? Complex{} : Complex(0.0, -0.5 * k_[j]) * work.coeffs[j];
        if (!forcing_.empty())
            for (std::size_t j = 0; j < m; ++j)
                out[j] += forcing_[j];
        break;
    }
    case EquationKind::Ks2d: {
        // -1/2 |grad v|^2
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const Complex c = vhat[i * m + j];
                a_[i * m + j] = i == nyquist ? Complex{} : Complex(0.0, k_[i]) * c;
                b_[i * m + j] = j == nyquist ? Complex{} : Complex(0.0, k_[j]) * c;
            }
        }
        fft::transform(grid_, a_, a_, +1);
        fft::transform(grid_, b_, b_, +1);
        for (std::size_t p = 0; p < n; ++p) {
            const double gx = a_[p].real();
            const double gy = b_[p].real();
            c_[p] = -0.5 * (gx * gx + gy * gy);
        }
        fft::transform(grid_, c_, work.coeffs, -1);
        for (auto& c : work.coeffs)
            c *= scale;
        dealias_in_place(work);
        std::copy(work.coeffs.begin(), work.coeffs.end(), out.begin());
        break;
    }
    case EquationKind::Ch2d: {
        fft::transform(grid_, vhat, a_, +1);
        for (std::size_t p = 0; p < n; ++p) {
            const double v = a_[p].real();
            c_[p] = v * v * v;
        }
        fft::transform(grid_, c_, work.coeffs, -1);
        for (auto& c : work.coeffs)
            c *= scale;
        dealias_in_place(work);
        const bool literal = eq_.ch_form == ChForm::Literal;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double k2 = k_[i] * k_[i] + k_[j] * k_[j];
                out[i * m + j] = (literal ? k2 * k2 : -k2) * work.coeffs[i * m + j];
            }
        }
        break;
    }
    }
}

Field nonlinear_term(const Equation& eq, const Field& v)
{
    NonlinearOperator op(eq, v.grid);
    const auto s = to_spectral(v);
    SpectralField out(v.grid);
    op(s.coeffs, out.coeffs);
    if (!all_finite(out.coeffs))
        throw DivergenceError("nonlinear term is not finite", 0);
    return to_physical(out);
}

Field rhs(const Equation& eq, const Field& v)
{
    NonlinearOperator op(eq, v.grid);
    const auto symbol = linear_symbol(eq, v.grid);
    const auto s = to_spectral(v);
    SpectralField out(v.grid);
    op(s.coeffs, out.coeffs);
    for (std::size_t p = 0; p < out.coeffs.size(); ++p)
        out.coeffs[p] += symbol[p] * s.coeffs[p];
    if (!all_finite(out.coeffs))
        throw DivergenceError("right-hand side is not finite", 0);
    return to_physical(out);
}

namespace {

struct PhiCoefficients {
    double e, e2, q, f1, f2, f3;
};

PhiCoefficients contour_coefficients(double z, double dt)
{
    constexpr int points = 32;
    Complex q{}, f1{}, f2{}, f3{};
    for (int j = 0; j < points; ++j) {
        const double theta = 2.0 * std::numbers::pi * (j + 0.5) / points;
        const Complex r = z + std::polar(1.0, theta);
        const Complex er = std::exp(r);
        const Complex r3 = r * r * r;
        q += (std::exp(r / 2.0) - 1.0) / r;
        f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        f2 += (2.0 + r + er * (r - 2.0)) / r3;
        f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    return {std::exp(z), std::exp(z / 2.0), dt * q.real() / points, dt * f1.real() / points,
            dt * f2.real() / points, dt * f3.real() / points};
}

} // namespace

Etdrk4::Etdrk4(std::span<const double> symbol, double dt) : dt_(dt)
{
    if (!(dt > 0.0))
        throw ConfigError("etdrk4: dt must be positive");
    const std::size_t n = symbol.size();
    e_.resize(n);
    e2_.resize(n);
    q_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    f3_.resize(n);
    // Symbols repeat heavily in 2D (they depend on |k| only).
    std::unordered_map<double, PhiCoefficients> seen;
    for (std::size_t p = 0; p < n; ++p) {
        const double z = dt * symbol[p];
        auto it = seen.find(z);
        if (it == seen.end())
            it = seen.emplace(z, contour_coefficients(z, dt)).first;
        const auto& c = it->second;
        e_[p] = c.e;
        e2_[p] = c.e2;
        q_[p] = c.q;
        f1_[p] = c.f1;
        f2_[p] = c.f2;
        f3_[p] = c.f3;
    }
}

void Etdrk4::step(std::vector<Complex>& v, const Nonlinear& nonlinear) const
{
    const std::size_t n = v.size();
    if (n != e_.size())
        throw ConfigError("etdrk4: state size does not match symbol");
    std::vector<Complex> nv(n), a(n), na(n), b(n), nb(n), c(n), nc(n);

    nonlinear(v, nv);
    for (std::size_t p = 0; p < n; ++p)
        a[p] = e2_[p] * v[p] + q_[p] * nv[p];
    nonlinear(a, na);
    for (std::size_t p = 0; p < n; ++p)
        b[p] = e2_[p] * v[p] + q_[p] * na[p];
    nonlinear(b, nb);
    for (std::size_t p = 0; p < n; ++p)
        c[p] = e2_[p] * a[p] + q_[p] * (2.0 * nb[p] - nv[p]);
    nonlinear(c, nc);
    for (std::size_t p = 0; p < n; ++p)
        v[p] = e_[p] * v[p] + f1_[p] * nv[p] + 2.0 * f2_[p] * (na[p] + nb[p]) + f3_[p] * nc[p];
}

SpectralField etdrk4_step(const SpectralField& v, double dt, const Equation& eq)
{
    const auto symbol = linear_symbol(eq, v.grid);
    Etdrk4 stepper(symbol, dt);
    NonlinearOperator op(eq, v.grid);
    SpectralField out = v;
    stepper.step(out.coeffs, std::ref(op));
    if (!all_finite(out.coeffs))
        throw DivergenceError("etdrk4 step produced a non-finite state", 0);
    return out;
}

Trajectory simulate(const Equation& eq, const Field& v0, double dt, std::size_t n_steps,
                    std::size_t snapshot_every, bool zero_mean_wrap)
{
    validate(eq, v0.grid);
    if (snapshot_every == 0 || n_steps % snapshot_every != 0)
        throw ConfigError("simulate: snapshot_every must divide n_steps");

    Trajectory traj{v0.grid, dt * static_cast<double>(snapshot_every), {v0}};
    if (n_steps == 0)
        return traj;

    const auto symbol = linear_symbol(eq, v0.grid);
    Etdrk4 stepper(symbol, dt);
    NonlinearOperator op(eq, v0.grid);
    const Etdrk4::Nonlinear nonlinear = std::ref(op);

    auto state = to_spectral(v0);
    traj.states.reserve(n_steps / snapshot_every + 1);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        const Complex mean = state.coeffs[0];
        if (zero_mean_wrap)
            state.coeffs[0] = 0.0;
        stepper.step(state.coeffs, nonlinear);
        if (zero_mean_wrap)
            state.coeffs[0] = mean;
        if (!all_finite(state.coeffs))
            throw DivergenceError("simulation produced a non-finite state", step);
        if (step % snapshot_every == 0)
            traj.states.push_back(to_physical(state));
    }
    return traj;
}

Field uniform_random_field(const Grid& grid, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Field f(grid);
    for (auto& v : f.values)
        v = dist(rng);
    return f;
}

Field attractor_init(const Equation& eq, const Grid& grid, std::uint64_t seed,
                     std::size_t burn_in_steps, double dt, bool zero_mean_wrap)
{
    auto v0 = uniform_random_field(grid, seed);
    if (burn_in_steps == 0)
        return v0;
    auto traj = simulate(eq, v0, dt, burn_in_steps, burn_in_steps, zero_mean_wrap);
    return std::move(traj.states.back());
}

} // namespace eelm
