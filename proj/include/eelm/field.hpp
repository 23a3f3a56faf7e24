#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eelm {

using Complex = std::complex<double>;

/// Periodic uniform discretization of [0, L)^dims with m nodes per axis.
/// Node i sits at coordinate i * dx; node m aliases node 0.
struct Grid {
    int dims = 1;
    double L = 1.0;
    std::size_t m = 8;

    double dx() const { return L / static_cast<double>(m); }
    /// Total node count, m^dims.
    std::size_t size() const { return dims == 1 ? m : m * m; }

    bool operator==(const Grid&) const = default;
};

/// Validating constructor. Throws ConfigError for odd m, m < 8, L <= 0 or
/// dims outside {1, 2}.
Grid make_grid(double L, std::size_t m, int dims);

/// Standard DFT integer frequencies 0, 1, ..., m/2-1, -m/2, ..., -1.
std::vector<int> frequencies(std::size_t m);

/// Angular wavenumbers 2*pi*f/L for one axis (all axes share them).
std::vector<double> wavenumbers(const Grid& grid);

/// Real scalar state on a grid, row-major: values[i * m + j] is node (i, j).
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> v);

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    double& at(std::size_t i, std::size_t j) { return values[i * grid.m + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * grid.m + j]; }

    double mean() const;
    bool all_finite() const;

    bool operator==(const Field&) const = default;
};

/// Discrete Fourier coefficients of a real field in full complex layout,
/// normalized so coeffs[0] equals the spatial mean.
struct SpectralField {
    Grid grid;
    std::vector<Complex> coeffs;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), coeffs(g.size(), Complex{}) {}
};

/// Forward transform, divided by m^dims. Throws ConfigError on non-finite input.
SpectralField to_spectral(const Field& f);
/// Inverse transform (unscaled); the imaginary residue is discarded.
Field to_physical(const SpectralField& s);

/// 2/3 rule: zero every mode with |f| > m/3 on any axis.
SpectralField dealias(SpectralField s);
void dealias_in_place(SpectralField& s);

/// Spectral derivative along `axis` (0 = rows / x in 1D, 1 = columns).
/// The Nyquist mode is zeroed.
SpectralField derivative(const SpectralField& s, int axis);
SpectralField laplacian(const SpectralField& s);
SpectralField biharmonic(const SpectralField& s);

/// Physical-space convenience wrappers around the spectral operators.
Field laplacian(const Field& f);
Field biharmonic(const Field& f);
/// |grad v|^2 with spectral first derivatives, product formed pointwise.
Field grad_squared(const Field& f);

namespace fft {

/// Unnormalized in-place-safe complex DFTs over a grid's full layout.
/// sign = -1 forward, +1 inverse. Plans are cached and shared across threads.
void transform(const Grid& grid, std::span<const Complex> in, std::span<Complex> out, int sign);

} // namespace fft

} // namespace eelm
