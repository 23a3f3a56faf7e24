#pragma once

#include "eelm/field.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace eelm {

enum class EquationKind { Ks1dHom, Ks1dInhom, Ks2d, Ch2d };

/// Placement of the cubic term in Cahn-Hilliard: Standard is Lap(v^3),
/// Literal is Bih(v^3). The linear part is identical.
enum class ChForm { Standard, Literal };

struct Equation {
    EquationKind kind = EquationKind::Ks1dHom;
    double gamma = 0.5;   // Ch2d
    double mu = 0.0;      // Ks1dInhom forcing amplitude
    double lambda = 1.0;  // Ks1dInhom forcing wavelength
    ChForm ch_form = ChForm::Standard;

    int dims() const { return kind == EquationKind::Ks2d || kind == EquationKind::Ch2d ? 2 : 1; }

    static Equation ks1d_hom() { return {}; }
    static Equation ks1d_inhom(double mu, double lambda)
    {
        return {EquationKind::Ks1dInhom, 0.5, mu, lambda, ChForm::Standard};
    }
    static Equation ks2d() { return {EquationKind::Ks2d, 0.5, 0.0, 1.0, ChForm::Standard}; }
    static Equation ch2d(double gamma, ChForm form = ChForm::Standard)
    {
        return {EquationKind::Ch2d, gamma, 0.0, 1.0, form};
    }
};

/// Throws ConfigError on bad parameters or a dims mismatch with `grid`.
void validate(const Equation& eq, const Grid& grid);

/// Real multiplier of the linear part per spectral mode (full layout).
/// KS: |k|^2 - |k|^4; CH: |k|^2 - gamma |k|^4.
std::vector<double> linear_symbol(const Equation& eq, const Grid& grid);

/// Evaluates the nonlinear part (and the Ks1dInhom forcing) in spectral
/// space. Owns scratch buffers, so one instance per thread.
class NonlinearOperator {
public:
    NonlinearOperator(const Equation& eq, const Grid& grid);

    void operator()(std::span<const Complex> vhat, std::span<Complex> out);

    const Grid& grid() const { return grid_; }

private:
    Equation eq_;
    Grid grid_;
    std::vector<double> k_;
    std::vector<Complex> forcing_;
    std::vector<Complex> a_, b_, c_;
};

/// Physical-space nonlinear term. Throws DivergenceError on a non-finite result.
Field nonlinear_term(const Equation& eq, const Field& v);

/// Full right-hand side (linear + nonlinear) in physical space.
Field rhs(const Equation& eq, const Field& v);

/// Fourth-order exponential time differencing Runge-Kutta for
/// v' = diag(symbol) v + N(v). The phi-function coefficients are contour
/// averages over 32 points on a unit circle around dt * symbol.
class Etdrk4 {
public:
    using Nonlinear = std::function<void(std::span<const Complex>, std::span<Complex>)>;

    Etdrk4(std::span<const double> symbol, double dt);

    /// Advances v in place by one step.
    void step(std::vector<Complex>& v, const Nonlinear& nonlinear) const;

    double dt() const { return dt_; }

private:
    double dt_;
    std::vector<double> e_, e2_, q_, f1_, f2_, f3_;
};

/// One ETDRK4 step of `eq` from v. Throws DivergenceError (step 0) when the
/// result is non-finite.
SpectralField etdrk4_step(const SpectralField& v, double dt, const Equation& eq);

struct Trajectory {
    Grid grid;
    double dt_snapshot = 0.0;
    std::vector<Field> states;
};

/// Integrates n_steps of size dt, recording v0 and every snapshot_every-th
/// state. With zero_mean_wrap the mean is removed before each step and the
/// original mean restored afterwards, so the mean is held fixed.
Trajectory simulate(const Equation& eq, const Field& v0, double dt, std::size_t n_steps,
                    std::size_t snapshot_every, bool zero_mean_wrap);

/// Node values i.i.d. uniform on [-1, 1] from a seeded generator.
Field uniform_random_field(const Grid& grid, std::uint64_t seed);

/// uniform_random_field followed by burn_in_steps of simulation.
Field attractor_init(const Equation& eq, const Grid& grid, std::uint64_t seed,
                     std::size_t burn_in_steps, double dt, bool zero_mean_wrap);

} // namespace eelm
