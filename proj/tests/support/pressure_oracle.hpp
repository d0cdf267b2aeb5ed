#pragma once

// Dense reference solutions for the discrete pressure problem, shared by the
// unit tests and the acceptance binary.

#include "thinlayer/fields.hpp"
#include "thinlayer/pressure.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace thinlayer::oracle {

/// Real spectral first-derivative matrix on nx periodic nodes, built from the
/// DFT sums directly. The Nyquist mode has no derivative.
inline Eigen::MatrixXd spectral_dx(std::size_t nx, double L)
{
    const auto n = static_cast<long>(nx);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const double two_pi = 2.0 * std::numbers::pi;
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            std::complex<double> s = 0.0;
            for (long m = -n / 2 + 1; m < n / 2; ++m) {
                const double k = two_pi * static_cast<double>(m) / L;
                s += std::complex<double>(0.0, k) *
                     std::exp(std::complex<double>(0.0, two_pi * static_cast<double>(m * (i - j)) / n));
            }
            d(i, j) = s.real() / static_cast<double>(n);
        }
    }
    return d;
}

/// Pressure from one dense solve of the full two-dimensional discrete system:
/// flux-form z operator scaled by dz, K dz (-Dx Dx) in x, and the same
/// face-interpolated buoyancy right-hand side. The two-dimensional null space
/// (x-constant and x-alternating, both constant in z) is removed by appending
/// the cell-weighted mean conditions as extra rows.
inline ScalarField dense_pressure(const ScalarField& psi)
{
    const Grid& g = psi.grid();
    const auto nx = static_cast<long>(g.nx());
    const auto nz = static_cast<long>(g.nz());
    const long n = nx * nz;
    const auto dz = g.dz();
    const auto hf = g.face_spacing();
    const auto Kc = g.K_cell();
    const auto Kf = g.K_face();
    const Eigen::MatrixXd dx = spectral_dx(g.nx(), g.period());
    const Eigen::MatrixXd dxx = dx * dx;

    auto id = [nx](long i, long c) { return c * nx + i; };
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 2, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 2);
    for (long c = 0; c < nz; ++c) {
        for (long i = 0; i < nx; ++i) {
            const long row = id(i, c);
            for (long j = 0; j < nx; ++j) {
                a(row, id(j, c)) -= Kc[c] * dz[c] * dxx(i, j);
            }
            for (long f : {c, c + 1}) {
                if (f == 0 || f == nz) {
                    continue;
                }
                const double t = Kf[f] / hf[f];
                const long other = f == c ? c - 1 : c + 1;
                a(row, row) += t;
                a(row, id(i, other)) -= t;
                const double w_up = 0.5 * dz[f] / hf[f];
                const double w_dn = 0.5 * dz[f - 1] / hf[f];
                const double psi_f = w_up * psi(i, static_cast<std::size_t>(f - 1)) +
                                     w_dn * psi(i, static_cast<std::size_t>(f));
                b(row) += (f == c ? 1.0 : -1.0) * Kf[f] * psi_f;
            }
            a(n, row) = dz[c];
            a(n + 1, row) = dz[c] * (i % 2 == 0 ? 1.0 : -1.0);
        }
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    ScalarField p(psi.grid_ptr(), Stagger::Center, false);
    for (long c = 0; c < nz; ++c) {
        for (long i = 0; i < nx; ++i) {
            p(i, static_cast<std::size_t>(c)) = x(id(i, c));
        }
    }
    return p;
}

/// Max-norm error of the pressure against the separated solution of
/// -lap p = d_z psi, psi = sin(2 pi x / L) sin(pi z' / H), z' = -z, with unit K
/// and zero-flux vertical boundaries:
///   p = A sin(2 pi x / L) cos(pi z / H),  A = -(pi/H) / ((pi/H)^2 + (2 pi/L)^2).
inline double manufactured_error(std::size_t nx, double dz, double L = 1.0, double H = 1.0)
{
    const double pi = std::numbers::pi;
    const auto g = std::make_shared<const Grid>(build_grid(LayerStack(L, {0.0, -H}, {1.0}, {1.0}), nx, dz));
    ScalarField psi(g, Stagger::Center, true);
    for (std::size_t c = 0; c < g->nz(); ++c) {
        for (std::size_t i = 0; i < g->nx(); ++i) {
            psi(static_cast<std::ptrdiff_t>(i), c) =
                std::sin(2 * pi * g->x(i) / L) * std::sin(-pi * g->z_centers()[c] / H);
        }
    }
    const ScalarField p = solve_pressure(psi);
    const double kz = pi / H;
    const double kx = 2 * pi / L;
    const double amp = -kz / (kz * kz + kx * kx);
    double err = 0.0;
    for (std::size_t c = 0; c < g->nz(); ++c) {
        for (std::size_t i = 0; i < g->nx(); ++i) {
            const double exact = amp * std::sin(kx * g->x(i)) * std::cos(kz * g->z_centers()[c]);
            err = std::max(err, std::abs(p(static_cast<std::ptrdiff_t>(i), c) - exact));
        }
    }
    return err;
}

}  // namespace thinlayer::oracle
