#include "thinlayer/errors.hpp"
#include "thinlayer/transport.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

using namespace thinlayer;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr unit_grid(std::size_t nx, double dz, double L = 1.0)
{
    return std::make_shared<const Grid>(build_grid(LayerStack(L, {0.0, -1.0}, {1.0}, {1.0}), nx, dz));
}

GridPtr layered_grid(std::size_t nx, double dz)
{
    return std::make_shared<const Grid>(
        build_grid(LayerStack(1.0, {0.0, -0.4, -0.45, -1.0}, {1.0, 3.0, 0.7}, {1.0, 0.4, 1.5}), nx, dz));
}

ScalarField mode_field(const GridPtr& g, double amp)
{
    InitSpec spec;
    spec.kind = InitKind::Mode;
    spec.amplitude = amp;
    return make_initial(spec, g);
}

ScalarField random_field(const GridPtr& g, std::uint64_t seed, double norm)
{
    InitSpec spec;
    spec.kind = InitKind::Random;
    spec.seed = seed;
    spec.norm = norm;
    return make_initial(spec, g);
}

}  // namespace

TEST(Transport, NullSolutionStaysZero)
{
    const auto g = layered_grid(16, 0.05);
    const BackgroundProfile prof(1.0, 0.1, 0.7, 0.7);
    const Integrator integ(g, prof, {.dt_max = 0.01});
    SimState s = make_state(ScalarField(g, Stagger::Center, true));
    for (int k = 0; k < 20; ++k) {
        s = integ.step(s, 0.01);
    }
    EXPECT_EQ(s.psi.max_abs(), 0.0);
    EXPECT_EQ(s.u.max_abs(), 0.0);
    EXPECT_EQ(s.step, 20);
}

TEST(Transport, FrozenDiffusionDecaysAtHeatEigenvalue)
{
    const double L = 1.0;
    const auto g = unit_grid(16, 1.0 / 64, L);
    const BackgroundProfile prof(1.0, 0.1, 0.0, 0.0);
    const Integrator integ(g, prof, {.dt_max = 1e-3});
    SimState s = make_state(mode_field(g, 1.0));
    const double n0 = l2_norm(s.psi);
    const double T = 0.1;
    for (int k = 0; k < 100; ++k) {
        s = integ.step_frozen(s, T / 100);
    }
    const double lambda = pi * pi + 4 * pi * pi / (L * L);
    const double expect = std::exp(-lambda * T);
    EXPECT_NEAR(l2_norm(s.psi) / n0, expect, 1e-3 * expect);
}

TEST(Transport, FrozenDiffusionSecondOrderInTime)
{
    const auto g = unit_grid(8, 1.0 / 32);
    const BackgroundProfile prof(1.0, 0.1, 0.0, 0.0);
    auto run = [&](int steps) {
        const Integrator integ(g, prof, {.dt_max = 1.0});
        SimState s = make_state(mode_field(g, 1.0));
        for (int k = 0; k < steps; ++k) {
            s = integ.step_frozen(s, 0.2 / steps);
        }
        return l2_norm(s.psi);
    };
    const double ref = run(640);
    const double e1 = std::abs(run(20) - ref);
    const double e2 = std::abs(run(40) - ref);
    EXPECT_GT(std::log2(e1 / e2), 1.8);
}

TEST(Transport, ImplicitDiffusionIsContractive)
{
    const auto g = layered_grid(16, 0.05);
    const ScalarField rhs = random_field(g, 4, 1.0);
    for (double a : {1e-4, 1e-1, 10.0, 1e6}) {
        EXPECT_LE(l2_norm(solve_implicit_diffusion(rhs, a)), l2_norm(rhs));
    }
}

TEST(Transport, CenteredAdvectionIsEnergyNeutral)
{
    const auto g = layered_grid(32, 0.02);
    const BackgroundProfile prof(1.0, 0.1, 1.0, 0.0);
    const ExplicitOperator op(g, prof);
    const SimState s = make_state(random_field(g, 8, 3.0));
    const ScalarField adv = op.advection(s.psi, s.u);
    EXPECT_LE(std::abs(inner(s.psi, adv)), 1e-10 * l2_norm(s.psi) * l2_norm(adv));
}

TEST(Transport, ForcingVanishesWithoutContrast)
{
    const auto g = layered_grid(16, 0.05);
    const ExplicitOperator op(g, BackgroundProfile(1.0, 0.1, 2.0, 2.0));
    const SimState s = make_state(random_field(g, 2, 1.0));
    EXPECT_EQ(op.forcing(s.u).max_abs(), 0.0);
}

TEST(Transport, ForcingSourceIntegratesToZero)
{
    // D phi'' integrates to D (phi'(0) - phi'(-H)) = 0 over each column.
    const auto g = unit_grid(8, 0.02);
    const ExplicitOperator op(g, BackgroundProfile(1.0, 0.05, 1.0, 0.5));
    const ScalarField f = op.forcing(VectorField(g));
    double total = 0.0;
    for (std::size_t c = 0; c < g->nz(); ++c) {
        total += g->dz()[c] * f(0, c);
    }
    EXPECT_NEAR(total, 0.0, 1e-12);
}

TEST(Cfl, ZeroVelocityGivesDtMax)
{
    const SimState s = make_state(ScalarField(unit_grid(8, 0.1), Stagger::Center, true));
    EXPECT_EQ(cfl_dt(s, 0.5, 0.03), 0.03);
}

TEST(Cfl, HorizontalLimit)
{
    const auto g = unit_grid(100, 0.5);
    SimState s = make_state(ScalarField(g, Stagger::Center, true));
    s.u.ux.fill(1.0);
    EXPECT_NEAR(cfl_dt(s, 0.5, 1.0), 0.005, 1e-15);
}

TEST(Cfl, SafetyOutOfRange)
{
    const SimState s = make_state(ScalarField(unit_grid(8, 0.1), Stagger::Center, true));
    EXPECT_THROW(cfl_dt(s, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(cfl_dt(s, 1.5, 1.0), std::invalid_argument);
}

TEST(Cfl, OversizedStepRefusedWithSuggestion)
{
    const auto g = unit_grid(32, 0.05);
    const BackgroundProfile prof(1.0, 0.1, 0.0, 0.0);
    const Integrator integ(g, prof, {.dt_max = 10.0, .safety = 0.5});
    const SimState s = make_state(random_field(g, 1, 50.0));
    const double limit = integ.cfl(s);
    try {
        (void)integ.step(s, 2 * limit);
        FAIL() << "expected a CFL refusal";
    } catch (const CflError& e) {
        EXPECT_DOUBLE_EQ(e.suggested_dt(), limit);
    }
}

TEST(Simulate, ZeroDurationReturnsInitialField)
{
    const auto g = layered_grid(16, 0.05);
    const ScalarField psi0 = random_field(g, 3, 1.0);
    SimulateOptions opt;
    opt.t_end = 0.0;
    const TrajectoryRecord rec = simulate(psi0, BackgroundProfile(1.0, 0.1, 1.0, 0.0), opt);
    EXPECT_TRUE(rec.completed);
    EXPECT_EQ(rec.final_state.psi.values(), psi0.values());
}

TEST(Simulate, LandsOnSampleTimesAndIsDeterministic)
{
    const auto g = layered_grid(16, 0.05);
    SimulateOptions opt;
    opt.t_end = 0.3;
    opt.sample_times = {0.1, 0.2, 0.25};
    opt.transport.dt_max = 0.007;
    opt.observer_cadence = 1000;
    const BackgroundProfile prof(1.0, 0.1, 1.0, 0.0);
    const TrajectoryRecord a = simulate(random_field(g, 5, 2.0), prof, opt);
    const TrajectoryRecord b = simulate(random_field(g, 5, 2.0), prof, opt);
    ASSERT_TRUE(a.completed);
    std::vector<double> times;
    for (const auto& row : a.samples) {
        times.push_back(row.t);
    }
    for (double t : {0.0, 0.1, 0.2, 0.25, 0.3}) {
        EXPECT_NE(std::find(times.begin(), times.end(), t), times.end()) << t;
    }
    EXPECT_EQ(a.final_state.psi.values(), b.final_state.psi.values());
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        EXPECT_EQ(a.samples[k].psi_sq, b.samples[k].psi_sq);
    }
}

TEST(Simulate, TrajectoryFileRoundTrip)
{
    const auto g = unit_grid(8, 0.1);
    SimulateOptions opt;
    opt.t_end = 0.05;
    opt.transport.dt_max = 0.01;
    const TrajectoryRecord rec = simulate(random_field(g, 2, 1.0), BackgroundProfile(1.0, 0.1, 1.0, 0.0), opt);
    const auto path = std::filesystem::temp_directory_path() / "thinlayer_traj_roundtrip.txt";
    write_trajectory(path, rec.samples);
    const auto back = read_trajectory(path);
    std::filesystem::remove(path);
    ASSERT_EQ(back.size(), rec.samples.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        EXPECT_EQ(back[k].t, rec.samples[k].t);
        EXPECT_EQ(back[k].psi_sq, rec.samples[k].psi_sq);
        EXPECT_EQ(back[k].grad_D_sq, rec.samples[k].grad_D_sq);
        EXPECT_EQ(back[k].L_sq, rec.samples[k].L_sq);
    }
}

TEST(Initial, RandomFieldHasRequestedNorm)
{
    const auto g = unit_grid(64, 1.0 / 128);
    const ScalarField psi = random_field(g, 17, 2.5);
    EXPECT_NEAR(l2_norm(psi), 2.5, 1e-3 * 2.5);
    EXPECT_EQ(psi.values(), random_field(g, 17, 2.5).values());
    EXPECT_NE(psi.values(), random_field(g, 18, 2.5).values());
}

TEST(Initial, ModeFieldFormula)
{
    const auto g = unit_grid(8, 0.125, 2.0);
    InitSpec spec;
    spec.kind = InitKind::Mode;
    spec.amplitude = 0.5;
    spec.mode = 2;
    spec.vertical_mode = 3;
    const ScalarField psi = make_initial(spec, g);
    for (std::size_t c = 0; c < g->nz(); ++c) {
        for (std::size_t i = 0; i < g->nx(); ++i) {
            const double expect =
                0.5 * std::sin(2 * pi * 2 * g->x(i) / 2.0) * std::sin(pi * 3 * -g->z_centers()[c]);
            EXPECT_NEAR(psi(static_cast<std::ptrdiff_t>(i), c), expect, 1e-15);
        }
    }
}
