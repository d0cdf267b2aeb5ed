#include "thinlayer/thinlimit.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/estimates.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace thinlayer {

std::size_t worker_count(std::size_t fallback)
{
    if (const char* env = std::getenv("THINLAYER_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return fallback > 0 ? fallback : 1;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body)
{
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(run);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

// ---------------------------------------------------------------------------

Grid build_reference_grid(const ThinFamily& family, std::size_t nx, double target_dz, std::size_t cell_budget)
{
    std::vector<double> z = family.base().interfaces();
    for (double eps : family.epsilons()) {
        const LayerStack member = family.instantiate(eps);
        z.insert(z.end(), member.interfaces().begin(), member.interfaces().end());
    }
    std::sort(z.begin(), z.end(), std::greater<>());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    const std::size_t segments = z.size() - 1;
    const LayerStack stack(family.base().period(), z, std::vector<double>(segments, 1.0),
                           std::vector<double>(segments, 1.0));
    return build_grid(stack, nx, target_dz, cell_budget);
}

namespace {

// Resample every row of f to nx_out nodes by trigonometric interpolation.
std::vector<double> resample_x(const ScalarField& f, std::size_t nx_out)
{
    const std::size_t nx = f.nx();
    const std::size_t rows = f.rows();
    if (nx_out == nx) {
        return f.values();
    }
    if (nx_out < nx) {
        throw FieldError(fmt::format("reference nx = {} is coarser than the source nx = {}", nx_out, nx));
    }
    const SpectralSlice src = ft_forward(f);
    SpectralSlice dst(nx_out, rows, f.grid().period());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t m = 0; m < src.modes(); ++m) {
            // The source Nyquist term appears once; in the finer spectrum it
            // becomes an ordinary mode paired with its conjugate.
            dst(r, m) = m + 1 == src.modes() ? 0.5 * src(r, m) : src(r, m);
        }
    }
    // Inverse onto a scratch grid with the right node count. Only the row
    // count and nx matter for the transform.
    std::vector<double> z_faces(rows + 1);
    for (std::size_t k = 0; k <= rows; ++k) {
        z_faces[k] = -static_cast<double>(k);
    }
    const auto scratch = std::make_shared<const Grid>(
        LayerStack(f.grid().period(), {0.0, -static_cast<double>(rows)}, {1.0}, {1.0}), nx_out, z_faces);
    return ft_inverse(dst, scratch).values();
}

}  // namespace

ScalarField to_reference(const ScalarField& f, const GridPtr& ref)
{
    const Grid& g = f.grid();
    if (std::abs(g.period() - ref->period()) > 1e-12 * g.period() ||
        std::abs(g.depth() - ref->depth()) > 1e-12 * g.depth()) {
        throw FieldError("reference grid covers a different domain");
    }
    const std::size_t nx = ref->nx();
    const std::vector<double> rows_x = resample_x(f, nx);

    // Interpolation nodes, top to bottom, each tied to a source row (or to a
    // zero boundary value when row == npos).
    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::vector<double> zn;
    std::vector<std::size_t> rn;
    const bool dirichlet_center = f.stagger() == Stagger::Center && f.dirichlet();
    const auto zs = f.stagger() == Stagger::Center ? g.z_centers() : g.z_faces();
    if (dirichlet_center) {
        zn.push_back(0.0);
        rn.push_back(npos);
    }
    for (std::size_t r = 0; r < zs.size(); ++r) {
        zn.push_back(zs[r]);
        rn.push_back(r);
    }
    if (dirichlet_center) {
        zn.push_back(-g.depth());
        rn.push_back(npos);
    }

    ScalarField out(ref, Stagger::Center, f.dirichlet());
    const auto zc = ref->z_centers();
    std::size_t k = 0;  // zn[k] >= z > zn[k + 1] for the current query
    for (std::size_t c = 0; c < zc.size(); ++c) {
        const double z = zc[c];
        while (k + 2 < zn.size() && zn[k + 1] >= z) {
            ++k;
        }
        const double w = (zn[k] - z) / (zn[k] - zn[k + 1]);  // may leave [0,1] when extrapolating
        auto o = out.row(c);
        for (std::size_t i = 0; i < nx; ++i) {
            const double a = rn[k] == npos ? 0.0 : rows_x[rn[k] * nx + i];
            const double b = rn[k + 1] == npos ? 0.0 : rows_x[rn[k + 1] * nx + i];
            o[i] = (1.0 - w) * a + w * b;
        }
    }
    return out;
}

ReferenceState project_state(const SimState& s, const GridPtr& ref)
{
    ReferenceState r;
    r.t = s.t;
    r.psi = to_reference(s.psi, ref);
    r.px = to_reference(ddx(s.p), ref);
    r.uz = to_reference(s.u.uz, ref);
    return r;
}

DifferenceNorms difference_norms(const ReferenceState& a, const LayerStack& layers_a, const ReferenceState& b,
                                 const LayerStack& layers_b)
{
    const Grid& g = a.psi.grid();
    const auto zc = g.z_centers();
    const auto dz = g.dz();
    const double dx = g.dx();
    double s_psi = 0.0;
    double s_u = 0.0;
    double s_p = 0.0;
    for (std::size_t c = 0; c < g.nz(); ++c) {
        const double Ka = layers_a.K_at(zc[c]);
        const double Kb = layers_b.K_at(zc[c]);
        double r_psi = 0.0;
        double r_u = 0.0;
        double r_p = 0.0;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            const double dpsi = a.psi(ii, c) - b.psi(ii, c);
            const double dux = -Ka * a.px(ii, c) + Kb * b.px(ii, c);
            const double duz = a.uz(ii, c) - b.uz(ii, c);
            const double dpx = a.px(ii, c) - b.px(ii, c);
            const double pz_a = -a.uz(ii, c) / Ka - a.psi(ii, c);
            const double pz_b = -b.uz(ii, c) / Kb - b.psi(ii, c);
            const double dpz = pz_a - pz_b;
            r_psi += dpsi * dpsi;
            r_u += dux * dux + duz * duz;
            r_p += dpx * dpx + dpz * dpz;
        }
        s_psi += dz[c] * r_psi;
        s_u += dz[c] * r_u;
        s_p += dz[c] * r_p;
    }
    return {std::sqrt(dx * s_psi), std::sqrt(dx * s_u), std::sqrt(dx * s_p)};
}

double coefficient_difference(const LayerStack& member, const LayerStack& limit, bool permeability)
{
    std::vector<double> z = member.interfaces();
    z.insert(z.end(), limit.interfaces().begin(), limit.interfaces().end());
    std::sort(z.begin(), z.end(), std::greater<>());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        const double mid = 0.5 * (z[k] + z[k + 1]);
        const double d = permeability ? member.K_at(mid) - limit.K_at(mid) : member.D_at(mid) - limit.D_at(mid);
        sum += d * d * (z[k] - z[k + 1]);
    }
    return std::sqrt(member.period() * sum);
}

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_points)
{
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) {
        if (x[k] > 0.0 && y[k] > 0.0 && std::isfinite(y[k])) {
            pts.emplace_back(x[k], y[k]);
        }
    }
    std::sort(pts.begin(), pts.end());
    RateFit fit;
    const std::size_t use = std::max(min_points, std::size_t{2});
    if (pts.size() < 2) {
        return fit;
    }
    pts.resize(std::min(pts.size(), use));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(pts.size());
    for (const auto& [px, py] : pts) {
        const double lx = std::log(px);
        const double ly = std::log(py);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = m * sxx - sx * sx;
    if (den <= 0.0) {
        return fit;
    }
    fit.rate = (m * sxy - sx * sy) / den;
    fit.prefactor = std::exp((sy - fit.rate * sx) / m);
    fit.used = pts.size();
    fit.valid = true;
    return fit;
}

namespace {

struct LimitRun {
    std::vector<ReferenceState> states;
    std::vector<TrajectorySample> samples;
};

// Run one member to t_end and call visit(k, state) at each sample time.
TrajectoryRecord run_sampled(const GridPtr& grid, const BackgroundProfile& profile, const SweepOptions& options,
                             const std::vector<double>& times,
                             const std::function<void(std::size_t, const SimState&)>& visit)
{
    SimulateOptions so;
    so.t_end = options.t_end;
    so.transport = options.transport;
    so.observer_cadence = std::numeric_limits<long>::max();
    so.sample_times.assign(times.begin() + 1, times.end());
    so.observers.emplace_back([&](const SimState& s) {
        const auto it = std::find(times.begin(), times.end(), s.t);
        if (it != times.end()) {
            visit(static_cast<std::size_t>(it - times.begin()), s);
        }
    });
    return simulate(make_initial(options.init, grid), profile, so);
}

}  // namespace

SweepResult sweep(const ThinFamily& family, const BackgroundProfile& profile, const SweepOptions& options)
{
    if (options.init.kind == InitKind::Snapshot) {
        throw std::invalid_argument("the epsilon sweep needs analytic initial data (mode, random or zero)");
    }
    SweepResult result;
    result.null_family = family.is_null();
    const LayerStack& limit = family.base();
    const auto ref = std::make_shared<const Grid>(
        build_reference_grid(family, options.nx, 0.5 * options.target_dz, options.cell_budget));

    std::vector<double> times{0.0};
    const std::size_t n = std::max<std::size_t>(1, options.n_samples);
    for (std::size_t k = 1; k <= n; ++k) {
        times.push_back(options.t_end * static_cast<double>(k) / static_cast<double>(n));
    }

    // Limit model on its own grid, and on the reference faces for the
    // discretization floor.
    const auto limit_grid = std::make_shared<const Grid>(build_grid(limit, options.nx, options.target_dz,
                                                                    options.cell_budget));
    const auto fine_limit_grid = std::make_shared<const Grid>(
        limit, options.nx, std::vector<double>(ref->z_faces().begin(), ref->z_faces().end()));

    LimitRun base_run;
    base_run.states.resize(times.size());
    std::vector<double> floor_energy(times.size(), 0.0);
    std::vector<ReferenceState> fine_states(times.size());
    std::vector<TrajectoryRecord> limit_records(2);
    parallel_for(2, options.workers, [&](std::size_t which) {
        const GridPtr& grid = which == 0 ? limit_grid : fine_limit_grid;
        auto& store = which == 0 ? base_run.states : fine_states;
        limit_records[which] = run_sampled(grid, profile, options, times,
                                           [&](std::size_t k, const SimState& s) { store[k] = project_state(s, ref); });
    });
    for (std::size_t w = 0; w < 2; ++w) {
        if (!limit_records[w].completed) {
            throw DivergenceError(fmt::format("limit model failed: {}", limit_records[w].failure), 0);
        }
    }
    result.limit_samples = limit_records[0].samples;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double e = difference_norms(fine_states[k], limit, base_run.states[k], limit).energy();
        result.null_tolerance = std::max(result.null_tolerance, e);
    }

    std::vector<double> members;
    for (double eps : family.epsilons()) {
        if (eps > 0.0) {
            members.push_back(eps);
        }
    }
    result.records.resize(members.size());
    parallel_for(members.size(), options.workers, [&](std::size_t m) {
        ConvergenceRecord& rec = result.records[m];
        rec.eps = members[m];
        const LayerStack stack = family.instantiate(rec.eps);
        rec.K_diff = coefficient_difference(stack, limit, true);
        rec.D_diff = coefficient_difference(stack, limit, false);
        rec.times = times;
        rec.psi_l2.assign(times.size(), 0.0);
        rec.u_l2.assign(times.size(), 0.0);
        rec.grad_p_l2.assign(times.size(), 0.0);
        rec.energy.assign(times.size(), 0.0);
        std::vector<bool> seen(times.size(), false);
        const auto grid = std::make_shared<const Grid>(build_grid(stack, options.nx, options.target_dz,
                                                                  options.cell_budget));
        const TrajectoryRecord tr = run_sampled(grid, profile, options, times, [&](std::size_t k, const SimState& s) {
            const DifferenceNorms d = difference_norms(project_state(s, ref), stack, base_run.states[k], limit);
            rec.psi_l2[k] = d.psi;
            rec.u_l2[k] = d.u;
            rec.grad_p_l2[k] = d.grad_p;
            rec.energy[k] = d.energy();
            seen[k] = true;
        });
        if (!tr.completed) {
            rec.failed = true;
            rec.failure = tr.failure;
        }
        std::size_t kept = 0;
        while (kept < times.size() && seen[kept]) {
            ++kept;
        }
        for (auto* v : {&rec.times, &rec.psi_l2, &rec.u_l2, &rec.grad_p_l2, &rec.energy}) {
            v->resize(kept);
        }
        rec.sup_energy = rec.energy.empty() ? 0.0 : *std::max_element(rec.energy.begin(), rec.energy.end());
    });

    std::vector<double> eps, energy, kd, dd;
    for (const auto& rec : result.records) {
        kd.push_back(rec.K_diff);
        dd.push_back(rec.D_diff);
        if (rec.failed) {
            result.warnings.push_back(fmt::format("epsilon {:.17g} excluded from the fit: {}", rec.eps, rec.failure));
            continue;
        }
        eps.push_back(rec.eps);
        energy.push_back(rec.sup_energy);
    }
    std::vector<double> all_eps;
    for (const auto& rec : result.records) {
        all_eps.push_back(rec.eps);
    }
    result.energy_fit = fit_rate(eps, energy, options.fit_points);
    result.K_fit = fit_rate(all_eps, kd, options.fit_points);
    result.D_fit = fit_rate(all_eps, dd, options.fit_points);

    // Pair up (eps, E) in increasing eps and require strict growth.
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        pairs.emplace_back(eps[k], energy[k]);
    }
    std::sort(pairs.begin(), pairs.end());
    result.monotone = pairs.size() >= 2;
    for (std::size_t k = 1; k < pairs.size(); ++k) {
        if (!(pairs[k].second > pairs[k - 1].second)) {
            result.monotone = false;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

AttractorSample sample_attractor(const LayerStack& member, double eps, const BackgroundProfile& profile,
                                 const GridPtr& ref, const AttractorOptions& options)
{
    if (options.n_init == 0) {
        throw std::invalid_argument("attractor sampling needs at least one initial condition");
    }
    if (!(options.cadence > 0.0) || !(options.window >= 0.0)) {
        throw std::invalid_argument("attractor cadence must be positive and the window non-negative");
    }
    AttractorSample out;
    out.eps = eps;
    out.window = options.window;
    out.cadence = options.cadence;
    out.spin_up = absorbing_time(options.radius, member) + 1.0 + options.spin_pad;

    std::vector<double> times;
    const auto count = static_cast<std::size_t>(std::floor(options.window / options.cadence + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) {
        times.push_back(out.spin_up + options.cadence * static_cast<double>(k));
    }

    const auto grid = std::make_shared<const Grid>(build_grid(member, options.nx, options.target_dz,
                                                              options.cell_budget));
    struct Slot {
        std::vector<double> t, psi_sq;
        std::vector<ScalarField> snaps;
        std::string failure;
    };
    std::vector<Slot> slots(options.n_init);
    for (std::size_t i = 0; i < options.n_init; ++i) {
        out.seeds.push_back(options.seed + i);
        out.initial_norms.push_back(options.radius * static_cast<double>(i + 1) /
                                    static_cast<double>(options.n_init));
    }
    parallel_for(options.n_init, options.workers, [&](std::size_t i) {
        InitSpec init;
        init.kind = InitKind::Random;
        init.seed = out.seeds[i];
        init.norm = out.initial_norms[i];
        SimulateOptions so;
        so.t_end = times.back();
        so.transport = options.transport;
        so.observer_cadence = std::numeric_limits<long>::max();
        so.sample_times = times;
        Slot& slot = slots[i];
        so.observers.emplace_back([&](const SimState& s) {
            if (std::find(times.begin(), times.end(), s.t) != times.end()) {
                slot.t.push_back(s.t);
                const double n = l2_norm(s.psi);
                slot.psi_sq.push_back(n * n);
                slot.snaps.push_back(to_reference(s.psi, ref));
            }
        });
        const TrajectoryRecord rec = simulate(make_initial(init, grid), profile, so);
        if (!rec.completed) {
            slot.failure = rec.failure;
        }
    });

    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].failure.empty()) {
            out.warnings.push_back(fmt::format("initial condition {} (seed {}) aborted: {}", i, out.seeds[i],
                                               slots[i].failure));
            continue;
        }
        out.times.insert(out.times.end(), slots[i].t.begin(), slots[i].t.end());
        out.psi_sq.insert(out.psi_sq.end(), slots[i].psi_sq.begin(), slots[i].psi_sq.end());
        for (auto& f : slots[i].snaps) {
            out.snapshots.push_back(std::move(f));
        }
    }
    if (out.snapshots.size() < std::max<std::size_t>(1, options.min_snapshots)) {
        throw Error(fmt::format("attractor sample for epsilon {:.17g} has {} snapshots, fewer than {}", eps,
                                out.snapshots.size(), options.min_snapshots));
    }
    return out;
}

double semidistance(const std::vector<ScalarField>& A, const std::vector<ScalarField>& B)
{
    if (A.empty() || B.empty()) {
        throw std::invalid_argument("semidistance of an empty sample");
    }
    const Grid& g = A.front().grid();
    const auto dz = g.dz();
    const double dx = g.dx();
    const std::size_t nx = g.nx();
    double worst = 0.0;  // squared
    for (const auto& a : A) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : B) {
            if (!a.same_layout(b)) {
                throw FieldError("semidistance operands live on different grids");
            }
            double sum = 0.0;
            bool pruned = false;
            for (std::size_t c = 0; c < g.nz() && !pruned; ++c) {
                const double w = dz[c] * dx;
                auto ra = a.row(c);
                auto rb = b.row(c);
                for (std::size_t i = 0; i < nx; ++i) {
                    const double d = ra[i] - rb[i];
                    sum += w * d * d;
                }
                // Partial sums only grow, so this pair cannot beat `best`.
                pruned = sum > best;
            }
            if (!pruned && sum < best) {
                best = sum;
            }
            if (best <= worst) {
                break;  // a cannot raise the maximum any more
            }
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

double semidistance(const AttractorSample& A, const AttractorSample& B)
{
    return semidistance(A.snapshots, B.snapshots);
}

}  // namespace thinlayer
