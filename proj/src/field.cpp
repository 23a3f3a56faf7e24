#include "eelm/field.hpp"

#include "eelm/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace eelm {

Grid make_grid(double L, std::size_t m, int dims)
{
    if (dims != 1 && dims != 2)
        throw ConfigError("grid: dims must be 1 or 2");
    if (!(L > 0.0) || !std::isfinite(L))
        throw ConfigError("grid: L must be positive and finite");
    if (m < 8)
        throw ConfigError("grid: m must be at least 8");
    if (m % 2 != 0)
        throw ConfigError("grid: m must be even");
    return Grid{dims, L, m};
}

std::vector<int> frequencies(std::size_t m)
{
    std::vector<int> f(m);
    const int half = static_cast<int>(m / 2);
    for (std::size_t j = 0; j < m; ++j) {
        const int jj = static_cast<int>(j);
        f[j] = jj < half ? jj : jj - static_cast<int>(m);
    }
    return f;
}

std::vector<double> wavenumbers(const Grid& grid)
{
    const auto f = frequencies(grid.m);
    std::vector<double> k(grid.m);
    const double scale = 2.0 * std::numbers::pi / grid.L;
    for (std::size_t j = 0; j < grid.m; ++j)
        k[j] = scale * f[j];
    return k;
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v))
{
    if (values.size() != grid.size())
        throw ConfigError("field: value count does not match grid");
}

double Field::mean() const
{
    double sum = 0.0;
    for (double v : values)
        sum += v;
    return sum / static_cast<double>(values.size());
}

bool Field::all_finite() const
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

namespace fft {

namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& [key, plan] : plans)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(const Grid& grid, int sign)
    {
        std::lock_guard lock(mutex);
        const auto key = std::make_tuple(grid.dims, grid.m, sign);
        if (auto it = plans.find(key); it != plans.end())
            return it->second;

        std::vector<Complex> a(grid.size()), b(grid.size());
        auto* in = reinterpret_cast<fftw_complex*>(a.data());
        auto* out = reinterpret_cast<fftw_complex*>(b.data());
        const int n = static_cast<int>(grid.m);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        const int dir = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan plan = grid.dims == 1 ? fftw_plan_dft_1d(n, in, out, dir, flags)
                                        : fftw_plan_dft_2d(n, n, in, out, dir, flags);
        plans.emplace(key, plan);
        return plan;
    }
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

} // namespace

void transform(const Grid& grid, std::span<const Complex> in, std::span<Complex> out, int sign)
{
    if (in.size() != grid.size() || out.size() != grid.size())
        throw ConfigError("fft: buffer size does not match grid");
    fftw_plan plan = cache().get(grid, sign);
    // Plans are out-of-place; route aliasing calls through a scratch copy.
    if (in.data() == out.data()) {
        std::vector<Complex> tmp(in.begin(), in.end());
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
        return;
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

} // namespace fft

SpectralField to_spectral(const Field& f)
{
    if (f.values.size() != f.grid.size())
        throw ConfigError("to_spectral: field shape does not match grid");
    if (!f.all_finite())
        throw ConfigError("to_spectral: non-finite field value");

    SpectralField s(f.grid);
    std::vector<Complex> in(f.values.begin(), f.values.end());
    fft::transform(f.grid, in, s.coeffs, -1);
    const double scale = 1.0 / static_cast<double>(f.grid.size());
    for (auto& c : s.coeffs)
        c *= scale;
    return s;
}

Field to_physical(const SpectralField& s)
{
    std::vector<Complex> out(s.grid.size());
    fft::transform(s.grid, s.coeffs, out, +1);
    Field f(s.grid);
    for (std::size_t k = 0; k < out.size(); ++k)
        f.values[k] = out[k].real();
    return f;
}

void dealias_in_place(SpectralField& s)
{
    const std::size_t m = s.grid.m;
    const auto f = frequencies(m);
    // |f| > m/3  <=>  3|f| > m, exact in integers.
    auto cut = [&](std::size_t j) { return 3 * static_cast<std::size_t>(std::abs(f[j])) > m; };
    if (s.grid.dims == 1) {
        for (std::size_t j = 0; j < m; ++j)
            if (cut(j))
                s.coeffs[j] = 0.0;
        return;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (cut(i) || cut(j))
                s.coeffs[i * m + j] = 0.0;
}

SpectralField dealias(SpectralField s)
{
    dealias_in_place(s);
    return s;
}

namespace {

// Multiply every coefficient by a real function of the per-axis wavenumbers.
template <typename Symbol>
SpectralField apply_symbol(const SpectralField& s, Symbol&& symbol)
{
    const auto k = wavenumbers(s.grid);
    const std::size_t m = s.grid.m;
    SpectralField out(s.grid);
    if (s.grid.dims == 1) {
        for (std::size_t j = 0; j < m; ++j)
            out.coeffs[j] = s.coeffs[j] * symbol(k[j] * k[j]);
    } else {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                out.coeffs[i * m + j] = s.coeffs[i * m + j] * symbol(k[i] * k[i] + k[j] * k[j]);
    }
    return out;
}

} // namespace

SpectralField derivative(const SpectralField& s, int axis)
{
    if (axis < 0 || axis >= s.grid.dims)
        throw ConfigError("derivative: axis out of range");
    const auto k = wavenumbers(s.grid);
    const std::size_t m = s.grid.m;
    const std::size_t nyquist = m / 2;
    SpectralField out(s.grid);
    if (s.grid.dims == 1) {
        for (std::size_t j = 0; j < m; ++j)
            out.coeffs[j] = j == nyquist ? Complex{} : Complex(0.0, k[j]) * s.coeffs[j];
        return out;
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t a = axis == 0 ? i : j;
            out.coeffs[i * m + j] = a == nyquist ? Complex{} : Complex(0.0, k[a]) * s.coeffs[i * m + j];
        }
    }
    return out;
}

SpectralField laplacian(const SpectralField& s)
{
    return apply_symbol(s, [](double k2) { return -k2; });
}

SpectralField biharmonic(const SpectralField& s)
{
    return apply_symbol(s, [](double k2) { return k2 * k2; });
}

Field laplacian(const Field& f) { return to_physical(laplacian(to_spectral(f))); }

Field biharmonic(const Field& f) { return to_physical(biharmonic(to_spectral(f))); }

Field grad_squared(const Field& f)
{
    const auto s = to_spectral(f);
    Field out(f.grid);
    for (int axis = 0; axis < f.grid.dims; ++axis) {
        const auto d = to_physical(derivative(s, axis));
        for (std::size_t k = 0; k < d.values.size(); ++k)
            out.values[k] += d.values[k] * d.values[k];
    }
    return out;
}

} // namespace eelm
