#include "thinlayer/transport.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/pressure.hpp"
#include "thinlayer/snapshot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace thinlayer {

SimState make_state(ScalarField psi, double t)
{
    SimState s;
    s.t = t;
    s.p = solve_pressure(psi);
    s.u = darcy_velocity(s.p, psi);
    s.psi = std::move(psi);
    return s;
}

double cfl_dt(const SimState& s, double safety, double dt_max)
{
    if (!(safety > 0.0) || safety > 1.0) {
        throw std::invalid_argument(fmt::format("CFL safety factor {} must lie in (0, 1]", safety));
    }
    const Grid& g = s.psi.grid();
    double limit = std::numeric_limits<double>::infinity();
    const double ux = s.u.ux.max_abs();
    if (ux > 0.0) {
        limit = g.dx() / ux;
    }
    const auto dz = g.dz();
    for (std::size_t c = 0; c < g.nz(); ++c) {
        double w = 0.0;
        for (double v : s.u.uz.row(c)) {
            w = std::max(w, std::abs(v));
        }
        for (double v : s.u.uz.row(c + 1)) {
            w = std::max(w, std::abs(v));
        }
        if (w > 0.0) {
            limit = std::min(limit, dz[c] / w);
        }
    }
    return std::min(dt_max, safety * limit);
}

// ---------------------------------------------------------------------------

ExplicitOperator::ExplicitOperator(const GridPtr& grid, const BackgroundProfile& profile, bool upwind)
    : grid_(grid), profile_(profile.sample(*grid)), upwind_(upwind)
{
}

ScalarField ExplicitOperator::advection(const ScalarField& psi, const VectorField& u) const
{
    return upwind_ ? advection_upwind(psi, u) : advection_centered(psi, u);
}

// div(u psi) ~ 1/2 d_x(u_x psi) + 1/2 u_x d_x psi
//            + (F_top - F_bottom)/dz - 1/2 psi (u_z,top - u_z,bottom)/dz
// with F = u_z (psi_up + psi_dn)/2 on interior faces. Both halves are
// skew-adjoint in the grid inner product.
ScalarField ExplicitOperator::advection_centered(const ScalarField& psi, const VectorField& u) const
{
    const Grid& g = *grid_;
    const std::size_t nz = g.nz();
    const std::size_t nx = g.nx();
    const auto dz = g.dz();

    ScalarField prod = psi;
    for (std::size_t k = 0; k < prod.values().size(); ++k) {
        prod.values()[k] *= u.ux.values()[k];
    }
    ScalarField out = ddx(prod);
    const ScalarField dpsi = ddx(psi);

    for (std::size_t c = 0; c < nz; ++c) {
        auto o = out.row(c);
        auto ux = u.ux.row(c);
        auto dp = dpsi.row(c);
        auto s = psi.row(c);
        auto wt = u.uz.row(c);
        auto wb = u.uz.row(c + 1);
        for (std::size_t i = 0; i < nx; ++i) {
            const double up = c == 0 ? 0.0 : psi(static_cast<std::ptrdiff_t>(i), c - 1);
            const double dn = c + 1 == nz ? 0.0 : psi(static_cast<std::ptrdiff_t>(i), c + 1);
            const double f_top = c == 0 ? 0.0 : wt[i] * 0.5 * (up + s[i]);
            const double f_bot = c + 1 == nz ? 0.0 : wb[i] * 0.5 * (s[i] + dn);
            const double xpart = 0.5 * o[i] + 0.5 * ux[i] * dp[i];
            const double zpart = (f_top - f_bot) / dz[c] - 0.5 * s[i] * (wt[i] - wb[i]) / dz[c];
            o[i] = xpart + zpart;
        }
    }
    return out;
}

ScalarField ExplicitOperator::advection_upwind(const ScalarField& psi, const VectorField& u) const
{
    const Grid& g = *grid_;
    const std::size_t nz = g.nz();
    const std::size_t nx = g.nx();
    const auto dz = g.dz();
    const double dx = g.dx();
    ScalarField out(grid_, Stagger::Center, false);
    for (std::size_t c = 0; c < nz; ++c) {
        for (std::size_t i = 0; i < nx; ++i) {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            auto xflux = [&](std::ptrdiff_t left) {
                const double vel = 0.5 * (u.ux(left, c) + u.ux(left + 1, c));
                return vel * (vel > 0.0 ? psi(left, c) : psi(left + 1, c));
            };
            auto zflux = [&](std::size_t f) {
                if (f == 0 || f == nz) {
                    return 0.0;
                }
                const double w = u.uz(ii, f);
                return w * (w > 0.0 ? psi(ii, f) : psi(ii, f - 1));
            };
            out(ii, c) = (xflux(ii) - xflux(ii - 1)) / dx + (zflux(c) - zflux(c + 1)) / dz[c];
        }
    }
    return out;
}

ScalarField ExplicitOperator::forcing(const VectorField& u) const
{
    const Grid& g = *grid_;
    const auto Dc = g.D_cell();
    ScalarField out(grid_, Stagger::Center, false);
    for (std::size_t c = 0; c < g.nz(); ++c) {
        const double slope = profile_.dphi_c[c];
        // Face-difference curvature: sums to the exact net source on any grid,
        // which midpoint sampling of the kinked profile does not.
        const double source = Dc[c] * (profile_.dphi_f[c] - profile_.dphi_f[c + 1]) / g.dz()[c];
        auto o = out.row(c);
        auto wt = u.uz.row(c);
        auto wb = u.uz.row(c + 1);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            o[i] = source - slope * 0.5 * (wt[i] + wb[i]);
        }
    }
    return out;
}

ScalarField ExplicitOperator::apply(const ScalarField& psi, const VectorField& u) const
{
    ScalarField out = forcing(u);
    out -= advection(psi, u);
    return out;
}

// ---------------------------------------------------------------------------

ScalarField solve_implicit_diffusion(const ScalarField& rhs, double a)
{
    const Grid& g = rhs.grid();
    const std::size_t nz = g.nz();
    const auto dz = g.dz();
    const auto hf = g.face_spacing();
    const auto Dc = g.D_cell();
    const auto Df = g.D_face();

    SpectralSlice r = ft_forward(rhs);
    Tridiagonal m{std::vector<double>(nz, 0.0), std::vector<double>(nz, 0.0), std::vector<double>(nz, 0.0)};
    std::vector<std::complex<double>> b(nz);
    for (std::size_t mode = 0; mode < r.modes(); ++mode) {
        const double k = r.wavenumber(mode);
        for (std::size_t c = 0; c < nz; ++c) {
            const double s_top = Df[c] / hf[c];
            const double s_bot = Df[c + 1] / hf[c + 1];
            m.diag[c] = dz[c] + a * (k * k * Dc[c] * dz[c] + s_top + s_bot);
            m.lower[c] = c == 0 ? 0.0 : -a * s_top;
            m.upper[c] = c + 1 == nz ? 0.0 : -a * s_bot;
            b[c] = dz[c] * r(c, mode);
        }
        const auto x = solve_tridiagonal(m, b);
        for (std::size_t c = 0; c < nz; ++c) {
            r(c, mode) = x[c];
        }
    }
    return ft_inverse(r, rhs.grid_ptr(), Stagger::Center, true);
}

namespace {

const double kGamma = 1.0 - 1.0 / std::numbers::sqrt2;
const double kDelta = 1.0 - 1.0 / (2.0 * kGamma);

void check_finite(const ScalarField& f, long step, double t)
{
    if (!f.all_finite()) {
        throw DivergenceError(fmt::format("non-finite psi at step {} (t = {:.17g})", step, t), step);
    }
}

}  // namespace

Integrator::Integrator(GridPtr grid, const BackgroundProfile& profile, TransportOptions options)
    : grid_(std::move(grid)), explicit_(grid_, profile, options.upwind), options_(std::move(options))
{
}

VectorField Integrator::darcy(const ScalarField& psi, ScalarField* p_out) const
{
    ScalarField p = solve_pressure(psi);
    VectorField u = darcy_velocity(p, psi);
    if (options_.on_darcy_update) {
        options_.on_darcy_update(u);
    }
    if (p_out != nullptr) {
        *p_out = std::move(p);
    }
    return u;
}

SimState Integrator::step(const SimState& s, double dt) const
{
    const double limit = cfl(s);
    if (dt > limit * (1.0 + 1e-9)) {
        throw CflError(fmt::format("dt = {:.6g} exceeds the CFL limit {:.6g}", dt, limit), limit);
    }
    const double gdt = kGamma * dt;

    const ScalarField n1 = explicit_.apply(s.psi, s.u);
    ScalarField rhs = s.psi;
    rhs.axpy(gdt, n1);
    ScalarField y2 = solve_implicit_diffusion(rhs, gdt);
    check_finite(y2, s.step + 1, s.t + gdt);
    // L y2 recovered from the stage equation (I - gdt L) y2 = rhs.
    ScalarField ly2 = y2;
    ly2 -= rhs;
    ly2 *= 1.0 / gdt;

    const VectorField u2 = darcy(y2, nullptr);
    const ScalarField n2 = explicit_.apply(y2, u2);

    rhs = s.psi;
    rhs.axpy(dt * kDelta, n1);
    rhs.axpy(dt * (1.0 - kDelta), n2);
    rhs.axpy(dt * (1.0 - kGamma), ly2);
    ScalarField next = solve_implicit_diffusion(rhs, gdt);
    check_finite(next, s.step + 1, s.t + dt);

    SimState out;
    out.t = s.t + dt;
    out.step = s.step + 1;
    out.dt = dt;
    out.u = darcy(next, &out.p);
    out.psi = std::move(next);
    return out;
}

SimState Integrator::step_frozen(const SimState& s, double dt) const
{
    const double gdt = kGamma * dt;
    const VectorField zero(grid_);
    const ScalarField n = explicit_.forcing(zero);

    ScalarField rhs = s.psi;
    rhs.axpy(gdt, n);
    ScalarField y2 = solve_implicit_diffusion(rhs, gdt);
    ScalarField ly2 = y2;
    ly2 -= rhs;
    ly2 *= 1.0 / gdt;

    rhs = s.psi;
    rhs.axpy(dt, n);
    rhs.axpy(dt * (1.0 - kGamma), ly2);
    SimState out;
    out.psi = solve_implicit_diffusion(rhs, gdt);
    check_finite(out.psi, s.step + 1, s.t + dt);
    out.t = s.t + dt;
    out.step = s.step + 1;
    out.dt = dt;
    out.p = ScalarField(grid_, Stagger::Center, false);
    out.u = zero;
    return out;
}

SimState step(const SimState& s, const BackgroundProfile& profile, double dt, const TransportOptions& options)
{
    const Integrator integrator(s.psi.grid_ptr(), profile, options);
    return integrator.step(s, dt);
}

// ---------------------------------------------------------------------------

namespace {

// Uniform deviate in [-1, 1) from the raw 64-bit engine output, so the
// sequence does not depend on the standard library's distributions.
double uniform_pm1(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0; }

}  // namespace

ScalarField make_initial(const InitSpec& spec, const GridPtr& grid)
{
    const Grid& g = *grid;
    ScalarField psi(grid, Stagger::Center, true);
    const double L = g.period();
    const double H = g.depth();
    const auto zc = g.z_centers();
    const double pi = std::numbers::pi;

    switch (spec.kind) {
    case InitKind::Zero:
        break;
    case InitKind::Mode:
        for (std::size_t c = 0; c < g.nz(); ++c) {
            const double sz = std::sin(pi * spec.vertical_mode * (-zc[c]) / H);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                psi(static_cast<std::ptrdiff_t>(i), c) =
                    spec.amplitude * std::sin(2.0 * pi * spec.mode * g.x(i) / L) * sz;
            }
        }
        break;
    case InitKind::Random: {
        const int M = std::max(1, spec.random_modes);
        std::mt19937_64 rng(spec.seed);
        // a[m][n] cos + b[m][n] sin, n = 1..M vertical sine modes.
        std::vector<double> a(static_cast<std::size_t>(M * M));
        std::vector<double> b(static_cast<std::size_t>(M * M));
        double norm_sq = 0.0;
        for (int m = 0; m < M; ++m) {
            for (int n = 1; n <= M; ++n) {
                const double decay = 1.0 / static_cast<double>(m + n);
                const auto k = static_cast<std::size_t>(m * M + n - 1);
                a[k] = decay * uniform_pm1(rng);
                b[k] = m == 0 ? 0.0 : decay * uniform_pm1(rng);
                const double area = m == 0 ? L * H / 2.0 : L * H / 4.0;
                norm_sq += (a[k] * a[k] + b[k] * b[k]) * area;
            }
        }
        const double scale = norm_sq > 0.0 ? spec.norm / std::sqrt(norm_sq) : 0.0;
        for (std::size_t c = 0; c < g.nz(); ++c) {
            for (std::size_t i = 0; i < g.nx(); ++i) {
                double v = 0.0;
                for (int m = 0; m < M; ++m) {
                    const double arg = 2.0 * pi * m * g.x(i) / L;
                    const double cm = std::cos(arg);
                    const double sm = std::sin(arg);
                    for (int n = 1; n <= M; ++n) {
                        const auto k = static_cast<std::size_t>(m * M + n - 1);
                        v += (a[k] * cm + b[k] * sm) * std::sin(pi * n * (-zc[c]) / H);
                    }
                }
                psi(static_cast<std::ptrdiff_t>(i), c) = scale * v;
            }
        }
        break;
    }
    case InitKind::Snapshot: {
        const Snapshot snap = read_snapshot(spec.snapshot_path);
        if (snap.stagger != Stagger::Center) {
            throw FormatError("initial snapshot must be a center field");
        }
        ScalarField loaded = snapshot_to_field(snap, grid);
        psi.values() = loaded.values();
        break;
    }
    }
    return psi;
}

// ---------------------------------------------------------------------------

TrajectorySample sample_state(const SimState& s)
{
    const NormSet n = norms(s.psi);
    TrajectorySample row;
    row.t = s.t;
    row.psi_sq = n.l2 * n.l2;
    row.grad_D_sq = n.grad_D * n.grad_D;
    row.L_sq = n.L_op * n.L_op;
    row.max_div = divergence(s.u).max_abs();
    row.dt = s.dt;
    return row;
}

TrajectoryRecord simulate(ScalarField psi0, const BackgroundProfile& profile, const SimulateOptions& options)
{
    TrajectoryRecord record;
    const GridPtr grid = psi0.grid_ptr();
    const double min_dz = grid->min_dz();

    TransportOptions topt = options.transport;
    if (options.check_divergence) {
        auto user_hook = topt.on_darcy_update;
        const double floor = options.divergence_velocity_floor;
        topt.on_darcy_update = [&record, min_dz, floor, user_hook](const VectorField& u) {
            const double umax = u.max_abs();
            if (umax <= floor) {
                ++record.div_floored;
            }
            const double scale = std::max(umax, floor);
            if (scale > 0.0) {
                const double ratio = divergence(u).max_abs() / (scale / min_dz);
                record.max_div_ratio = std::max(record.max_div_ratio, ratio);
            }
            if (user_hook) {
                user_hook(u);
            }
        };
    }
    const Integrator integrator(grid, profile, topt);

    std::vector<double> targets = options.sample_times;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::remove_if(targets.begin(), targets.end(),
                                 [&](double t) { return !(t > 0.0) || t > options.t_end; }),
                  targets.end());
    if (targets.empty() || targets.back() < options.t_end) {
        targets.push_back(options.t_end);
    }

    SimState s = make_state(std::move(psi0));
    if (topt.on_darcy_update) {
        topt.on_darcy_update(s.u);
    }
    auto observe = [&](const SimState& st) {
        record.samples.push_back(sample_state(st));
        for (const auto& obs : options.observers) {
            obs(st);
        }
    };
    observe(s);

    const long cadence = std::max<long>(1, options.observer_cadence);
    std::size_t next_target = 0;
    if (options.t_end > 0.0) {
        try {
            while (next_target < targets.size()) {
                const double target = targets[next_target];
                double dt = integrator.cfl(s);
                bool lands = false;
                if (target - s.t <= dt * (1.0 + 1e-9)) {
                    dt = target - s.t;
                    lands = true;
                } else if (s.t + 2.0 * dt > target) {
                    // Split the remainder evenly rather than leaving a sliver.
                    dt = 0.5 * (target - s.t);
                }
                s = integrator.step(s, dt);
                if (lands) {
                    s.t = target;
                    ++next_target;
                    observe(s);
                } else if (s.step % cadence == 0) {
                    observe(s);
                }
            }
        } catch (const DivergenceError& e) {
            record.completed = false;
            record.failure = e.what();
        }
    }
    record.final_state = std::move(s);
    return record;
}

void write_trajectory(const std::filesystem::path& path, const std::vector<TrajectorySample>& samples)
{
    std::ofstream out(path);
    if (!out) {
        throw FormatError(fmt::format("cannot open {} for writing", path.string()));
    }
    out << "# t psi_sq grad_D_sq L_sq max_div dt\n";
    for (const auto& s : samples) {
        out << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", s.t, s.psi_sq, s.grad_D_sq, s.L_sq,
                           s.max_div, s.dt);
    }
}

std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError(fmt::format("cannot open {}", path.string()));
    }
    std::vector<TrajectorySample> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ss(line);
        TrajectorySample s;
        if (!(ss >> s.t >> s.psi_sq >> s.grad_D_sq >> s.L_sq >> s.max_div >> s.dt)) {
            throw FormatError(fmt::format("{}:{}: expected six numeric columns", path.string(), lineno));
        }
        rows.push_back(s);
    }
    return rows;
}

}  // namespace thinlayer
