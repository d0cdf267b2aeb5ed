#pragma once

#include "thinlayer/fields.hpp"

#include <complex>
#include <vector>

namespace thinlayer {

/// Symmetric tridiagonal matrix; `lower[c]` couples rows c and c-1
/// (lower[0] unused), `upper[c]` couples rows c and c+1.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
};

/// Per-mode pressure operator, rows scaled by the cell widths so that the
/// matrix is symmetric: kappa^2 K_c dz_c on the diagonal plus the face
/// transmissibilities K_f / h_f of the interior faces. Boundary faces carry
/// no flux.
Tridiagonal pressure_mode_matrix(const Grid& grid, double kappa);

/// Right-hand side K_f psi_f(top) - K_f psi_f(bottom) of one mode, from the
/// face-interpolated amplitudes psi_face (nz + 1 entries, zero on the boundary).
std::vector<std::complex<double>> pressure_mode_rhs(const Grid& grid,
                                                    std::span<const std::complex<double>> psi_face);

/// Solve a symmetric positive definite tridiagonal system (Thomas sweep).
std::vector<std::complex<double>> solve_tridiagonal(const Tridiagonal& a,
                                                    std::span<const std::complex<double>> rhs);

/// Pressure for the Darcy problem -div(K grad p) = d/dz(K psi) with zero
/// normal flux at z = 0, -H, horizontally periodic, mean-zero. Solved mode by
/// mode; the zero and Nyquist modes are hydrostatic and fixed by the gauge.
/// Throws SolverError if any mode's residual exceeds 1e-10 of its rhs.
ScalarField solve_pressure(const ScalarField& psi);

/// u_x = -K d_x p at centers, u_z = -K_f (d_z p + psi_f) at interior faces,
/// zero on the boundary faces.
VectorField darcy_velocity(const ScalarField& p, const ScalarField& psi);

struct PressureRatio {
    double l2 = 0.0;  ///< ||grad p|| / ||psi||
    double l4 = 0.0;  ///< ||grad p||_4 / ||psi||_4 with grad p averaged to centers
};

/// Discrete analogue of ||grad p|| <= C_p ||psi||. Zero for psi = 0.
PressureRatio pressure_stability_check(const ScalarField& psi, const ScalarField& p);

}  // namespace thinlayer
