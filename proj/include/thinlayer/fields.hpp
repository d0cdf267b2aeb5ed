#pragma once

#include "thinlayer/geometry.hpp"

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace thinlayer {

using GridPtr = std::shared_ptr<const Grid>;

/// Vertical location of a field's unknowns. Horizontal nodes are always
/// x_i = i * dx.
enum class Stagger { Center, Face };

/// Grid function on (x-node, z-center) or (x-node, z-face), stored row-major
/// with one row per z-level (top to bottom) and nx values per row.
///
/// A Dirichlet field (psi and its differences) carries an implicit zero on
/// z = 0 and z = -H.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, Stagger stagger = Stagger::Center, bool dirichlet = false);

    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
    [[nodiscard]] const Grid& grid() const noexcept { return *grid_; }
    [[nodiscard]] Stagger stagger() const noexcept { return stagger_; }
    [[nodiscard]] bool dirichlet() const noexcept { return dirichlet_; }
    [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }

    [[nodiscard]] double& operator()(std::ptrdiff_t i, std::size_t row) noexcept
    {
        return data_[row * nx_ + wrap(i)];
    }
    [[nodiscard]] double operator()(std::ptrdiff_t i, std::size_t row) const noexcept
    {
        return data_[row * nx_ + wrap(i)];
    }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * nx_, nx_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept
    {
        return {data_.data() + r * nx_, nx_};
    }
    [[nodiscard]] std::vector<double>& values() noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

    void fill(double v);
    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double a);
    /// this += a * other
    ScalarField& axpy(double a, const ScalarField& other);

    [[nodiscard]] bool same_layout(const ScalarField& other) const noexcept;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool all_finite() const;

private:
    [[nodiscard]] std::size_t wrap(std::ptrdiff_t i) const noexcept
    {
        const auto n = static_cast<std::ptrdiff_t>(nx_);
        return static_cast<std::size_t>(((i % n) + n) % n);
    }

    GridPtr grid_;
    Stagger stagger_ = Stagger::Center;
    bool dirichlet_ = false;
    std::size_t nx_ = 0;
    std::size_t rows_ = 0;
    std::vector<double> data_;
};

ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator+(ScalarField a, const ScalarField& b);

/// Darcy velocity on the staggered layout: u_x at centers, u_z at faces.
struct VectorField {
    ScalarField ux;
    ScalarField uz;

    VectorField() = default;
    explicit VectorField(const GridPtr& grid);
    [[nodiscard]] double max_abs() const;
};

/// Horizontal Fourier amplitudes per z-level for m = 0 .. nx/2, normalized so
/// that f(x_i) = sum over the full Hermitian spectrum of f_m exp(i k_m x_i).
class SpectralSlice {
public:
    SpectralSlice() = default;
    SpectralSlice(std::size_t nx, std::size_t rows, double period);

    [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t modes() const noexcept { return nx_ / 2 + 1; }
    [[nodiscard]] double period() const noexcept { return period_; }

    [[nodiscard]] std::complex<double>& operator()(std::size_t row, std::size_t m) noexcept
    {
        return data_[row * modes() + m];
    }
    [[nodiscard]] const std::complex<double>& operator()(std::size_t row, std::size_t m) const noexcept
    {
        return data_[row * modes() + m];
    }
    [[nodiscard]] std::span<std::complex<double>> row(std::size_t r) noexcept
    {
        return {data_.data() + r * modes(), modes()};
    }
    [[nodiscard]] std::span<const std::complex<double>> row(std::size_t r) const noexcept
    {
        return {data_.data() + r * modes(), modes()};
    }

    /// k_m = 2 pi m / L.
    [[nodiscard]] double wavenumber(std::size_t m) const noexcept;
    /// Multiplicity of mode m in Parseval sums: 1 for m = 0 and the Nyquist
    /// mode, 2 otherwise.
    [[nodiscard]] double weight(std::size_t m) const noexcept;

private:
    std::size_t nx_ = 0;
    std::size_t rows_ = 0;
    double period_ = 1.0;
    std::vector<std::complex<double>> data_;
};

/// Wavenumber used by first derivatives: k_m below Nyquist, zero at the
/// Nyquist mode so that the derivative of a real field stays real.
double derivative_wavenumber(std::size_t m, std::size_t nx, double period) noexcept;

SpectralSlice ft_forward(const ScalarField& f);
/// Inverse transform into a field with the given layout. The slice must have
/// as many rows as the layout requires.
ScalarField ft_inverse(const SpectralSlice& s, const GridPtr& grid, Stagger stagger = Stagger::Center,
                       bool dirichlet = false);
/// In-place variant reusing the storage of `out`.
void ft_inverse_into(const SpectralSlice& s, ScalarField& out);

/// Spectral x-derivative (Nyquist mode dropped).
ScalarField ddx(const ScalarField& f);

/// Discrete divergence at cell centers: spectral d/dx of u_x plus the face
/// difference (u_z(top) - u_z(bottom)) / dz.
ScalarField divergence(const VectorField& u);

/// Linear interpolation of a center field to interior faces. Boundary faces
/// receive zero for Dirichlet fields and the adjacent cell value otherwise.
ScalarField center_to_face(const ScalarField& f);

/// Mean of the two adjacent face values at each center.
ScalarField face_to_center(const ScalarField& f);

/// L psi = -div(D grad psi) for a Dirichlet center field, assembled with the
/// same harmonic face diffusivities as the transport operator.
ScalarField apply_diffusion_operator(const ScalarField& psi);

/// Grid-weighted inner product: cell widths for center fields, dual widths
/// (face_spacing) for face fields, dx horizontally.
double inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& f);

struct NormSet {
    double l2 = 0.0;       ///< ||psi||
    double grad_D = 0.0;   ///< ||sqrt(D) grad psi||
    double grad = 0.0;     ///< ||grad psi||
    double L_op = 0.0;     ///< ||L psi||
};

/// Norms of a Dirichlet center field. x-derivatives are evaluated in Fourier
/// space (all modes, including Nyquist); z-derivatives on faces with the
/// dual-cell widths as weights.
NormSet norms(const ScalarField& psi);

/// ||grad p|| for a center field with zero-flux vertical boundaries.
double gradient_norm_neumann(const ScalarField& p);

/// ||u|| with u_x weighted on cells and u_z on dual cells.
double l2_norm(const VectorField& u);

}  // namespace thinlayer
