#include "thinlayer/app.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/estimates.hpp"
#include "thinlayer/pressure.hpp"
#include "thinlayer/snapshot.hpp"
#include "thinlayer/thinlimit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <utility>

namespace thinlayer {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

/// Ordered key=value lines, written to summary.txt and echoed to the log.
class Summary {
public:
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, num(value)); }
    void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
    void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

    void write(const fs::path& path, std::ostream& log) const
    {
        std::ofstream out(path);
        if (!out) {
            throw FormatError(fmt::format("cannot write {}", path.string()));
        }
        for (const auto& [k, v] : lines_) {
            out << k << '=' << v << '\n';
            log << k << '=' << v << '\n';
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw FormatError(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

void prepare_output(const CommandOptions& opt, const RunConfig& cfg)
{
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (ec || !fs::is_directory(opt.out)) {
        throw FormatError(fmt::format("cannot create output directory {}", opt.out.string()));
    }
    fs::copy_file(opt.config, opt.out / "config.toml", fs::copy_options::overwrite_existing, ec);
    if (ec) {
        throw FormatError(fmt::format("cannot copy {} into {}", opt.config.string(), opt.out.string()));
    }
    auto out = open_out(opt.out / "config.resolved.toml");
    out << serialize(cfg);
}

std::size_t workers_for(const RunConfig& cfg) { return worker_count(static_cast<std::size_t>(cfg.run.workers)); }

void add_constants(Summary& s, const EnergyReport& r)
{
    s.add("delta", r.delta);
    s.add("delta_max", r.admissibility.delta_max);
    s.add("delta_admissible", r.admissibility.admissible);
    s.add("M1", r.M1);
    s.add("M2", r.M2);
    s.add("M3", r.M3);
    s.add("M4_parametric", r.M4);
    s.add("M5_parametric", r.M5);
    s.add("M6_parametric", r.M6);
    s.add("T1", r.T1);
    s.add("absorbing_bound", r.absorbing_bound());
}

void write_audit(std::ostream& out, const std::string& title, const AuditReport& a)
{
    out << "# " << title << (a.applicable ? "" : " (" + a.note + ")") << '\n';
    out << "# check applicable pass checked worst_residual worst_t tolerance\n";
    for (const auto& c : a.checks) {
        out << fmt::format("{} {} {} {} {:.17g} {:.17g} {:.17g}\n", c.name, c.applicable ? "yes" : "no",
                           c.pass ? "pass" : "FAIL", c.checked, c.worst_residual, c.worst_t, c.tolerance);
    }
    for (const auto& [k, v] : a.fitted) {
        out << fmt::format("# {} = {:.17g}\n", k, v);
    }
}

void add_audit(Summary& s, const std::string& prefix, const AuditReport& a)
{
    s.add(prefix + "_applicable", a.applicable);
    for (const auto& c : a.checks) {
        s.add(prefix + "_" + c.name + "_pass", c.pass);
        s.add(prefix + "_" + c.name + "_worst", c.worst_residual);
    }
    for (const auto& [k, v] : a.fitted) {
        s.add(prefix + "_" + k, v);
    }
    s.add(prefix + "_pass", a.pass());
}

// ---------------------------------------------------------------------------

int run_simulate(const CommandOptions& opt, RunConfig cfg, std::ostream& log)
{
    if (opt.t_end) {
        cfg.time.t_end = *opt.t_end;
    }
    prepare_output(opt, cfg);
    const LayerStack layers = make_layers(cfg);
    const BackgroundProfile profile = make_profile(cfg);
    const auto grid = std::make_shared<const Grid>(build_grid(layers, static_cast<std::size_t>(cfg.grid.nx),
                                                              cfg.grid.target_dz,
                                                              static_cast<std::size_t>(cfg.grid.cell_budget)));
    ScalarField psi0 = make_initial(make_init(cfg), grid);
    const NormSet n0 = norms(psi0);

    SimulateOptions so;
    so.t_end = cfg.time.t_end;
    so.transport = make_transport(cfg);
    so.observer_cadence = cfg.time.observer_cadence;
    so.check_divergence = true;
    // Pressure rounding scales with the buoyancy velocity K (|psi| + |phi|),
    // so the relative test means nothing once u decays far below it.
    so.divergence_velocity_floor =
        1e-4 * layers.K_max() * (psi0.max_abs() + std::max(std::abs(cfg.profile.c0), std::abs(cfg.profile.c_mH)));
    const TrajectoryRecord rec = simulate(std::move(psi0), profile, so);

    write_trajectory(opt.out / "trajectory.txt", rec.samples);
    write_snapshot(opt.out / "final_psi.snap", rec.final_state.psi, rec.final_state.t);

    Summary s;
    s.add("command", std::string("simulate"));
    s.add("completed", rec.completed);
    if (!rec.completed) {
        s.add("failure", rec.failure);
    }
    s.add("t_final", rec.final_state.t);
    s.add("steps", std::to_string(rec.final_state.step));
    s.add("nx", grid->nx());
    s.add("nz", grid->nz());
    s.add("max_div_ratio", rec.max_div_ratio);
    s.add("div_floored_updates", std::to_string(rec.div_floored));
    s.add("pressure_ratio_l2", pressure_stability_check(rec.final_state.psi, rec.final_state.p).l2);

    const EnergyReport report = constants(layers, profile, cfg.estimates, n0.l2, n0.grad_D * n0.grad_D);
    add_constants(s, report);

    bool ok = rec.completed;
    if (cfg.audit.enabled) {
        AuditOptions ao;
        ao.tol_factor = cfg.audit.tol_factor;
        ao.max_dz = grid->max_dz();
        ao.slope_rel = cfg.audit.slope_rel;
        const AuditReport l2 = audit_l2(rec.samples, report, ao);
        const AuditReport h1 = audit_h1(rec.samples, report, ao);
        auto out = open_out(opt.out / "audit.txt");
        write_audit(out, "L2 estimates", l2);
        write_audit(out, "H1 estimates", h1);
        add_audit(s, "l2", l2);
        add_audit(s, "h1", h1);
        const bool div_ok = rec.max_div_ratio <= 1e-10;
        s.add("divergence_pass", div_ok);
        ok = ok && l2.pass() && h1.pass() && div_ok;
    }
    s.add("status", std::string(ok ? "pass" : "fail"));
    s.write(opt.out / "summary.txt", log);
    return ok ? 0 : 1;
}

int run_verify(const CommandOptions& opt, const RunConfig& cfg, std::ostream& log)
{
    if (!opt.record) {
        throw ConfigError({"verify needs --record <trajectory file>"});
    }
    const auto samples = read_trajectory(*opt.record);
    if (samples.empty()) {
        throw FormatError(fmt::format("{} holds no samples", opt.record->string()));
    }
    prepare_output(opt, cfg);
    const LayerStack layers = make_layers(cfg);
    const BackgroundProfile profile = make_profile(cfg);
    const Grid grid = build_grid(layers, static_cast<std::size_t>(cfg.grid.nx), cfg.grid.target_dz,
                                 static_cast<std::size_t>(cfg.grid.cell_budget));
    const EnergyReport report =
        constants(layers, profile, cfg.estimates, std::sqrt(samples.front().psi_sq), samples.front().grad_D_sq);

    AuditOptions ao;
    ao.tol_factor = cfg.audit.tol_factor;
    ao.max_dz = grid.max_dz();
    ao.slope_rel = cfg.audit.slope_rel;
    const AuditReport l2 = audit_l2(samples, report, ao);
    const AuditReport h1 = audit_h1(samples, report, ao);
    {
        auto out = open_out(opt.out / "verify.txt");
        write_audit(out, "L2 estimates", l2);
        write_audit(out, "H1 estimates", h1);
    }
    Summary s;
    s.add("command", std::string("verify"));
    s.add("samples", samples.size());
    add_constants(s, report);
    add_audit(s, "l2", l2);
    add_audit(s, "h1", h1);
    const bool ok = l2.pass() && h1.pass();
    s.add("status", std::string(ok ? "pass" : "fail"));
    s.write(opt.out / "summary.txt", log);
    return ok ? 0 : 1;
}

int run_sweep(const CommandOptions& opt, RunConfig cfg, std::ostream& log)
{
    if (opt.epsilons) {
        cfg.thin.epsilons = *opt.epsilons;
    }
    if (opt.t_end) {
        cfg.time.t_end = *opt.t_end;
    }
    cfg = parse_config(serialize(cfg));  // revalidate overrides
    prepare_output(opt, cfg);
    const ThinFamily family = make_family(cfg);
    const BackgroundProfile profile = make_profile(cfg);

    SweepOptions so;
    so.nx = static_cast<std::size_t>(cfg.grid.nx);
    so.target_dz = cfg.grid.target_dz;
    so.cell_budget = static_cast<std::size_t>(cfg.grid.cell_budget);
    so.t_end = cfg.time.t_end;
    so.n_samples = static_cast<std::size_t>(cfg.thin.samples);
    so.transport = make_transport(cfg);
    so.init = make_init(cfg);
    so.workers = workers_for(cfg);
    log << fmt::format("sweeping {} members with {} worker(s)\n", family.epsilons().size(), so.workers);
    const SweepResult res = sweep(family, profile, so);

    for (std::size_t m = 0; m < res.records.size(); ++m) {
        const auto& rec = res.records[m];
        auto out = open_out(opt.out / fmt::format("convergence_{:02d}.txt", m));
        out << fmt::format("# eps = {:.17g}\n", rec.eps);
        out << fmt::format("# K_diff = {:.17g}\n# D_diff = {:.17g}\n", rec.K_diff, rec.D_diff);
        if (rec.failed) {
            out << "# failed: " << rec.failure << '\n';
        }
        out << "# t psi_diff u_diff grad_p_diff E\n";
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            out << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", rec.times[k], rec.psi_l2[k], rec.u_l2[k],
                               rec.grad_p_l2[k], rec.energy[k]);
        }
    }
    write_trajectory(opt.out / "limit_trajectory.txt", res.limit_samples);

    const double null_bound = cfg.audit.null_factor * res.null_tolerance;
    bool null_ok = true;
    {
        auto out = open_out(opt.out / "rates.txt");
        if (res.null_family) {
            out << "# null family\n";
        }
        out << "# eps sup_E K_diff D_diff\n";
        for (const auto& rec : res.records) {
            out << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g}{}\n", rec.eps, rec.sup_energy, rec.K_diff, rec.D_diff,
                               rec.failed ? " failed" : "");
            if (rec.failed || rec.sup_energy > null_bound) {
                null_ok = false;
            }
        }
        out << fmt::format("# rate = {:.17g}\n# prefactor = {:.17g}\n# fit_points = {}\n", res.energy_fit.rate,
                           res.energy_fit.prefactor, res.energy_fit.used);
        out << fmt::format("# K_rate = {:.17g}\n# D_rate = {:.17g}\n", res.K_fit.rate, res.D_fit.rate);
        out << fmt::format("# null_tolerance = {:.17g}\n", res.null_tolerance);
    }

    Summary s;
    s.add("command", std::string("sweep-epsilon"));
    s.add("members", res.records.size());
    s.add("null_family", res.null_family);
    s.add("rate", res.energy_fit.rate);
    s.add("prefactor", res.energy_fit.prefactor);
    s.add("fit_points", res.energy_fit.used);
    s.add("monotone", res.monotone);
    s.add("K_rate", res.K_fit.rate);
    s.add("D_rate", res.D_fit.rate);
    s.add("null_tolerance", res.null_tolerance);
    for (const auto& w : res.warnings) {
        log << "warning: " << w << '\n';
    }

    bool ok = std::none_of(res.records.begin(), res.records.end(), [](const auto& r) { return r.failed; });
    if (cfg.audit.enabled) {
        if (res.null_family) {
            s.add("null_pass", null_ok);
            ok = ok && null_ok;
        } else {
            const bool rate_ok = res.energy_fit.valid && res.energy_fit.rate >= cfg.audit.rate_min;
            const bool coef_ok = std::abs(res.K_fit.rate - 0.5) <= cfg.audit.coef_slope_tol &&
                                 std::abs(res.D_fit.rate - 0.5) <= cfg.audit.coef_slope_tol;
            s.add("rate_pass", rate_ok);
            s.add("monotone_pass", res.monotone);
            s.add("coefficient_pass", coef_ok);
            ok = ok && rate_ok && res.monotone && coef_ok;
        }
    }
    s.add("status", std::string(ok ? "pass" : "fail"));
    s.write(opt.out / "summary.txt", log);
    return ok ? 0 : 1;
}

int run_attractor(const CommandOptions& opt, RunConfig cfg, std::ostream& log)
{
    if (opt.epsilons) {
        cfg.thin.epsilons = *opt.epsilons;
        cfg = parse_config(serialize(cfg));
    }
    prepare_output(opt, cfg);
    const ThinFamily family = make_family(cfg);
    const BackgroundProfile profile = make_profile(cfg);

    AttractorOptions ao;
    ao.nx = static_cast<std::size_t>(cfg.attractor.nx > 0 ? cfg.attractor.nx : cfg.grid.nx);
    ao.target_dz = cfg.attractor.target_dz > 0.0 ? cfg.attractor.target_dz : cfg.grid.target_dz;
    ao.cell_budget = static_cast<std::size_t>(cfg.grid.cell_budget);
    ao.n_init = static_cast<std::size_t>(cfg.attractor.n_init);
    ao.window = cfg.attractor.window;
    ao.cadence = cfg.attractor.cadence;
    ao.seed = cfg.attractor.seed;
    ao.radius = cfg.attractor.radius;
    ao.spin_pad = cfg.attractor.spin_pad;
    ao.min_snapshots = static_cast<std::size_t>(cfg.attractor.min_snapshots);
    ao.transport = make_transport(cfg);
    ao.workers = workers_for(cfg);

    const auto ref = std::make_shared<const Grid>(build_reference_grid(family, ao.nx, 0.5 * ao.target_dz,
                                                                       ao.cell_budget));
    std::vector<double> eps{0.0};
    for (double e : family.epsilons()) {
        eps.push_back(e);
    }

    std::vector<AttractorSample> samples;
    bool absorbed = true;
    Summary s;
    s.add("command", std::string("attractor"));
    for (std::size_t m = 0; m < eps.size(); ++m) {
        const LayerStack member = family.instantiate(eps[m]);
        log << fmt::format("sampling epsilon {:.17g}\n", eps[m]);
        samples.push_back(sample_attractor(member, eps[m], profile, ref, ao));
        const AttractorSample& a = samples.back();
        for (const auto& w : a.warnings) {
            log << "warning: " << w << '\n';
        }

        const EnergyReport rep = constants(member, profile, cfg.estimates, ao.radius);
        const Grid member_grid = build_grid(member, ao.nx, ao.target_dz, ao.cell_budget);
        const double h = std::max(ao.transport.dt_max, member_grid.max_dz());
        const double tol = cfg.audit.tol_factor * 2.0 * h * h * rep.absorbing_bound();
        double worst = 0.0;
        for (double v : a.psi_sq) {
            worst = std::max(worst, v);
        }
        const bool inside = worst <= rep.absorbing_bound() + tol;
        absorbed = absorbed && inside;

        auto out = open_out(opt.out / fmt::format("attractor_{:02d}.txt", m));
        out << fmt::format("# eps = {:.17g}\n# spin_up = {:.17g}\n# window = {:.17g}\n# cadence = {:.17g}\n", a.eps,
                           a.spin_up, a.window, a.cadence);
        out << fmt::format("# absorbing_bound = {:.17g}\n# max_psi_sq = {:.17g}\n", rep.absorbing_bound(), worst);
        out << "# seeds =";
        for (auto seed : a.seeds) {
            out << ' ' << seed;
        }
        out << "\n# initial_norms =";
        for (double v : a.initial_norms) {
            out << ' ' << num(v);
        }
        out << "\n# t psi_sq\n";
        for (std::size_t k = 0; k < a.times.size(); ++k) {
            out << fmt::format("{:.17g} {:.17g}\n", a.times[k], a.psi_sq[k]);
        }
        s.add(fmt::format("snapshots_{:02d}", m), a.snapshots.size());
        s.add(fmt::format("max_psi_sq_{:02d}", m), worst);
    }

    std::vector<double> d;
    {
        auto out = open_out(opt.out / "semidistance.txt");
        out << "# eps d(A_eps,A_0)\n";
        for (std::size_t m = 1; m < samples.size(); ++m) {
            d.push_back(semidistance(samples[m], samples[0]));
            out << fmt::format("{:.17g} {:.17g}\n", eps[m], d.back());
            s.add(fmt::format("semidistance_{:02d}", m), d.back());
        }
    }
    // Family order is decreasing eps, so d should not grow along the list.
    bool non_increasing = !d.empty();
    for (std::size_t k = 1; k < d.size(); ++k) {
        if (d[k] > d[k - 1]) {
            non_increasing = false;
        }
    }
    const bool halved = d.size() >= 2 && d.back() <= 0.5 * d.front();
    s.add("absorbed", absorbed);
    s.add("non_increasing", non_increasing);
    s.add("halved", halved);

    bool ok = true;
    if (cfg.audit.enabled) {
        ok = absorbed && (family.is_null() || (non_increasing && halved));
    }
    s.add("status", std::string(ok ? "pass" : "fail"));
    s.write(opt.out / "summary.txt", log);
    return ok ? 0 : 1;
}

}  // namespace

fs::path default_output_dir(const std::string& command)
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    return fs::path(command + "-" + stamp);
}

int dispatch(const CommandOptions& options, std::ostream& log)
{
    const RunConfig cfg = load_config(options.config);
    if (options.command == "simulate") {
        return run_simulate(options, cfg, log);
    }
    if (options.command == "verify") {
        return run_verify(options, cfg, log);
    }
    if (options.command == "sweep-epsilon") {
        return run_sweep(options, cfg, log);
    }
    if (options.command == "attractor") {
        return run_attractor(options, cfg, log);
    }
    throw ConfigError({fmt::format("unknown command '{}'", options.command)});
}

}  // namespace thinlayer
