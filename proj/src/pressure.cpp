#include "thinlayer/pressure.hpp"

#include "thinlayer/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace thinlayer {

Tridiagonal pressure_mode_matrix(const Grid& grid, double kappa)
{
    const std::size_t nz = grid.nz();
    const auto dz = grid.dz();
    const auto hf = grid.face_spacing();
    const auto Kc = grid.K_cell();
    const auto Kf = grid.K_face();

    Tridiagonal a{std::vector<double>(nz, 0.0), std::vector<double>(nz, 0.0), std::vector<double>(nz, 0.0)};
    for (std::size_t c = 0; c < nz; ++c) {
        a.diag[c] = kappa * kappa * Kc[c] * dz[c];
    }
    for (std::size_t f = 1; f < nz; ++f) {
        const double t = Kf[f] / hf[f];
        a.diag[f - 1] += t;
        a.diag[f] += t;
        a.upper[f - 1] = -t;
        a.lower[f] = -t;
    }
    return a;
}

std::vector<std::complex<double>> pressure_mode_rhs(const Grid& grid,
                                                    std::span<const std::complex<double>> psi_face)
{
    const std::size_t nz = grid.nz();
    const auto Kf = grid.K_face();
    std::vector<std::complex<double>> b(nz);
    for (std::size_t c = 0; c < nz; ++c) {
        const std::complex<double> top = c == 0 ? 0.0 : Kf[c] * psi_face[c];
        const std::complex<double> bottom = c + 1 == nz ? 0.0 : Kf[c + 1] * psi_face[c + 1];
        b[c] = top - bottom;
    }
    return b;
}

std::vector<std::complex<double>> solve_tridiagonal(const Tridiagonal& a,
                                                    std::span<const std::complex<double>> rhs)
{
    const std::size_t n = a.diag.size();
    std::vector<double> c_prime(n);
    std::vector<std::complex<double>> x(rhs.begin(), rhs.end());
    double denom = a.diag[0];
    c_prime[0] = a.upper[0] / denom;
    x[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = a.diag[i] - a.lower[i] * c_prime[i - 1];
        c_prime[i] = a.upper[i] / denom;
        x[i] = (x[i] - a.lower[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c_prime[i] * x[i + 1];
    }
    return x;
}

namespace {

// Zero-wavenumber mode: every face flux vanishes, so p integrates psi_f
// downward from a pinned top value, then the cell-weighted mean is removed.
std::vector<std::complex<double>> solve_hydrostatic(const Grid& grid,
                                                    std::span<const std::complex<double>> psi_face)
{
    const std::size_t nz = grid.nz();
    const auto hf = grid.face_spacing();
    const auto dz = grid.dz();
    std::vector<std::complex<double>> p(nz);
    p[0] = 0.0;
    for (std::size_t f = 1; f < nz; ++f) {
        p[f] = p[f - 1] + hf[f] * psi_face[f];
    }
    std::complex<double> mean = 0.0;
    for (std::size_t c = 0; c < nz; ++c) {
        mean += dz[c] * p[c];
    }
    mean /= grid.depth();
    for (auto& v : p) {
        v -= mean;
    }
    return p;
}

double residual_max(const Tridiagonal& a, std::span<const std::complex<double>> x,
                    std::span<const std::complex<double>> b)
{
    const std::size_t n = a.diag.size();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> ax = a.diag[i] * x[i];
        if (i > 0) {
            ax += a.lower[i] * x[i - 1];
        }
        if (i + 1 < n) {
            ax += a.upper[i] * x[i + 1];
        }
        r = std::max(r, std::abs(ax - b[i]));
    }
    return r;
}

double max_abs(std::span<const std::complex<double>> v)
{
    double m = 0.0;
    for (const auto& z : v) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

}  // namespace

ScalarField solve_pressure(const ScalarField& psi)
{
    if (psi.stagger() != Stagger::Center || !psi.dirichlet()) {
        throw FieldError("pressure solve expects psi as a Dirichlet center field");
    }
    const Grid& g = psi.grid();
    const std::size_t nz = g.nz();
    const SpectralSlice psi_hat = ft_forward(psi);
    const auto dz = g.dz();
    const auto hf = g.face_spacing();

    SpectralSlice p_hat(g.nx(), nz, g.period());
    std::vector<std::complex<double>> psi_face(nz + 1);
    for (std::size_t m = 0; m < psi_hat.modes(); ++m) {
        psi_face.front() = 0.0;
        psi_face.back() = 0.0;
        for (std::size_t f = 1; f < nz; ++f) {
            const double w_up = 0.5 * dz[f] / hf[f];
            const double w_dn = 0.5 * dz[f - 1] / hf[f];
            psi_face[f] = w_up * psi_hat(f - 1, m) + w_dn * psi_hat(f, m);
        }
        const double kappa = derivative_wavenumber(m, g.nx(), g.period());
        const Tridiagonal a = pressure_mode_matrix(g, kappa);
        const auto b = pressure_mode_rhs(g, psi_face);
        const auto p = kappa == 0.0 ? solve_hydrostatic(g, psi_face) : solve_tridiagonal(a, b);

        const double scale = max_abs(b);
        const double res = residual_max(a, p, b);
        if (res > 1e-10 * scale) {
            throw SolverError(fmt::format("pressure mode {} residual {:.3e} exceeds 1e-10 of rhs {:.3e}", m, res,
                                          scale));
        }
        for (std::size_t c = 0; c < nz; ++c) {
            p_hat(c, m) = p[c];
        }
    }
    return ft_inverse(p_hat, psi.grid_ptr(), Stagger::Center, false);
}

VectorField darcy_velocity(const ScalarField& p, const ScalarField& psi)
{
    if (!p.same_layout(psi) || p.stagger() != Stagger::Center) {
        throw FieldError("pressure and psi must be center fields on the same grid");
    }
    const Grid& g = p.grid();
    const std::size_t nz = g.nz();
    const auto Kc = g.K_cell();
    const auto Kf = g.K_face();
    const auto hf = g.face_spacing();
    const auto dz = g.dz();

    VectorField u(p.grid_ptr());
    u.ux = ddx(p);
    for (std::size_t c = 0; c < nz; ++c) {
        for (double& v : u.ux.row(c)) {
            v *= -Kc[c];
        }
    }
    for (std::size_t f = 1; f < nz; ++f) {
        const double w_up = 0.5 * dz[f] / hf[f];
        const double w_dn = 0.5 * dz[f - 1] / hf[f];
        auto pu = p.row(f - 1);
        auto pd = p.row(f);
        auto su = psi.row(f - 1);
        auto sd = psi.row(f);
        auto out = u.uz.row(f);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double psi_f = w_up * su[i] + w_dn * sd[i];
            out[i] = -Kf[f] * ((pu[i] - pd[i]) / hf[f] + psi_f);
        }
    }
    return u;
}

PressureRatio pressure_stability_check(const ScalarField& psi, const ScalarField& p)
{
    PressureRatio r;
    const double psi_l2 = l2_norm(psi);
    if (psi_l2 == 0.0) {
        return r;
    }
    r.l2 = gradient_norm_neumann(p) / psi_l2;

    const Grid& g = p.grid();
    const std::size_t nz = g.nz();
    const auto hf = g.face_spacing();
    const auto dz = g.dz();
    const ScalarField px = ddx(p);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t c = 0; c < nz; ++c) {
        double row_num = 0.0;
        double row_den = 0.0;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            const double gtop = c == 0 ? 0.0 : (p(ii, c - 1) - p(ii, c)) / hf[c];
            const double gbot = c + 1 == nz ? 0.0 : (p(ii, c) - p(ii, c + 1)) / hf[c + 1];
            const double gz = 0.5 * (gtop + gbot);
            const double g2 = px(ii, c) * px(ii, c) + gz * gz;
            row_num += g2 * g2;
            const double s2 = psi(ii, c) * psi(ii, c);
            row_den += s2 * s2;
        }
        num += dz[c] * row_num;
        den += dz[c] * row_den;
    }
    r.l4 = std::pow(num / den, 0.25);
    return r;
}

}  // namespace thinlayer
