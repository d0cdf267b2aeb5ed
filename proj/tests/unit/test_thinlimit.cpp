#include "thinlayer/errors.hpp"
#include "thinlayer/thinlimit.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>

using namespace thinlayer;

namespace {

GridPtr unit_grid(std::size_t nx, double dz)
{
    return std::make_shared<const Grid>(build_grid(LayerStack(1.0, {0.0, -1.0}, {1.0}, {1.0}), nx, dz));
}

ScalarField random_field(const GridPtr& g, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g, Stagger::Center, true);
    for (double& v : f.values()) {
        v = u(rng);
    }
    return f;
}

double brute_force(const std::vector<ScalarField>& A, const std::vector<ScalarField>& B)
{
    double worst = 0.0;
    for (const auto& a : A) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : B) {
            best = std::min(best, l2_norm(a - b));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

ThinFamily contrasted_family(std::vector<double> eps)
{
    return build_family(LayerStack(1.0, {0.0, -0.5, -1.0}, {1.0, 1.0}, {1.0, 1.0}), 2, std::move(eps), 0.5, 0.5);
}

}  // namespace

TEST(Semidistance, IdenticalSetsAreAtZero)
{
    const auto g = unit_grid(8, 0.1);
    const std::vector<ScalarField> A{random_field(g, 1), random_field(g, 2), random_field(g, 3)};
    EXPECT_EQ(semidistance(A, A), 0.0);
}

TEST(Semidistance, SingletonsGiveTheL2Distance)
{
    const auto g = unit_grid(8, 0.1);
    const ScalarField f = random_field(g, 4);
    const ScalarField h = random_field(g, 5);
    EXPECT_DOUBLE_EQ(semidistance({f}, {h}), l2_norm(f - h));
}

TEST(Semidistance, MatchesExhaustiveOracle)
{
    const auto g = unit_grid(8, 0.1);
    for (unsigned trial = 0; trial < 20; ++trial) {
        std::vector<ScalarField> A;
        std::vector<ScalarField> B;
        for (unsigned k = 0; k < 3; ++k) {
            A.push_back(random_field(g, 100 * trial + k));
        }
        for (unsigned k = 0; k < 2; ++k) {
            B.push_back(random_field(g, 100 * trial + 50 + k));
        }
        EXPECT_NEAR(semidistance(A, B), brute_force(A, B), 1e-14);
        EXPECT_NEAR(semidistance(B, A), brute_force(B, A), 1e-14);
    }
}

TEST(Semidistance, AsymmetricAndTriangle)
{
    const auto g = unit_grid(8, 0.1);
    const ScalarField zero(g, Stagger::Center, true);
    ScalarField far = zero;
    far.fill(1.0);
    EXPECT_EQ(semidistance({zero}, {zero, far}), 0.0);
    EXPECT_GT(semidistance({zero, far}, {zero}), 0.0);

    for (unsigned t = 0; t < 10; ++t) {
        const std::vector<ScalarField> A{random_field(g, t), random_field(g, t + 20)};
        const std::vector<ScalarField> B{random_field(g, t + 40), random_field(g, t + 60)};
        const std::vector<ScalarField> C{random_field(g, t + 80)};
        EXPECT_LE(semidistance(A, C), semidistance(A, B) + semidistance(B, C) + 1e-12);
    }
}

TEST(Semidistance, EmptyInputRejected)
{
    const auto g = unit_grid(8, 0.1);
    EXPECT_THROW(semidistance({}, {random_field(g, 1)}), std::invalid_argument);
    EXPECT_THROW(semidistance({random_field(g, 1)}, {}), std::invalid_argument);
}

TEST(ToReference, ConstantAndLinearReproduced)
{
    const auto fam = contrasted_family({0.1, 0.05});
    const auto src = std::make_shared<const Grid>(build_grid(fam.instantiate(0.1), 8, 0.07));
    const auto ref = std::make_shared<const Grid>(build_reference_grid(fam, 16, 0.03));

    ScalarField c(src, Stagger::Center, false);
    c.fill(2.5);
    const ScalarField cr = to_reference(c, ref);
    for (double v : cr.values()) {
        EXPECT_NEAR(v, 2.5, 1e-14);
    }

    ScalarField lin(src, Stagger::Center, false);
    for (std::size_t r = 0; r < src->nz(); ++r) {
        for (double& v : lin.row(r)) {
            v = 1.0 - 2.0 * src->z_centers()[r];
        }
    }
    const ScalarField lr = to_reference(lin, ref);
    for (std::size_t r = 0; r < ref->nz(); ++r) {
        for (double v : lr.row(r)) {
            EXPECT_NEAR(v, 1.0 - 2.0 * ref->z_centers()[r], 1e-13);
        }
    }
}

TEST(ToReference, SpectralInX)
{
    const auto g = unit_grid(8, 0.1);
    const auto ref = unit_grid(32, 0.1);
    ScalarField f(g, Stagger::Center, false);
    for (std::size_t r = 0; r < g->nz(); ++r) {
        for (std::size_t i = 0; i < g->nx(); ++i) {
            f(static_cast<std::ptrdiff_t>(i), r) = std::cos(2 * std::numbers::pi * 3 * g->x(i));
        }
    }
    const ScalarField out = to_reference(f, ref);
    for (std::size_t i = 0; i < ref->nx(); ++i) {
        EXPECT_NEAR(out(static_cast<std::ptrdiff_t>(i), 2), std::cos(2 * std::numbers::pi * 3 * ref->x(i)), 1e-13);
    }
}

TEST(ReferenceGrid, ContainsEveryMemberInterface)
{
    const auto fam = contrasted_family({0.08, 0.04, 0.02, 0.01});
    const Grid ref = build_reference_grid(fam, 8, 0.05);
    const auto faces = ref.z_faces();
    for (double eps : fam.epsilons()) {
        const LayerStack member = fam.instantiate(eps);
        for (double z : member.interfaces()) {
            EXPECT_NE(std::find(faces.begin(), faces.end(), z), faces.end()) << z;
        }
    }
    EXPECT_LE(ref.max_dz(), 0.05 * (1 + 1e-12));
}

TEST(CoefficientDifference, ScalesAsSquareRootOfThickness)
{
    const auto fam = contrasted_family({0.08, 0.04, 0.02, 0.01});
    const LayerStack limit = fam.instantiate(0.0);
    std::vector<double> eps;
    std::vector<double> diffs;
    for (double e : fam.epsilons()) {
        const double d = coefficient_difference(fam.instantiate(e), limit, true);
        EXPECT_NEAR(d, 0.5 * std::sqrt(e), 1e-14);
        eps.push_back(e);
        diffs.push_back(d);
    }
    const RateFit fit = fit_rate(eps, diffs, 4);
    EXPECT_TRUE(fit.valid);
    EXPECT_NEAR(fit.rate, 0.5, 1e-12);
}

TEST(FitRate, RecoversPowerLawFromSmallestPoints)
{
    const std::vector<double> x{1.0, 0.5, 0.25, 0.125, 0.0625, 0.0};
    std::vector<double> y;
    for (double v : x) {
        y.push_back(v > 0.3 ? 7.0 : 3.0 * std::pow(v, 0.8));
    }
    const RateFit fit = fit_rate(x, y, 3);
    EXPECT_EQ(fit.used, 3u);
    EXPECT_NEAR(fit.rate, 0.8, 1e-12);
    EXPECT_NEAR(fit.prefactor, 3.0, 1e-12);
    EXPECT_FALSE(fit_rate({1.0}, {1.0}).valid);
}

TEST(DifferenceNorms, SameStateIsZero)
{
    const auto g = unit_grid(16, 0.05);
    const SimState s = make_state(random_field(g, 3));
    const ReferenceState r = project_state(s, g);
    const DifferenceNorms d = difference_norms(r, g->layers(), r, g->layers());
    EXPECT_EQ(d.energy(), 0.0);
}

TEST(Parallel, EveryIndexOnceAndErrorsPropagate)
{
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k]++; });
    for (const auto& h : hits) {
        EXPECT_EQ(h.load(), 1);
    }
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t k) {
                                  if (k == 7) {
                                      throw std::runtime_error("boom");
                                  }
                              }),
                 std::runtime_error);
}

TEST(Parallel, WorkerCountFromEnvironment)
{
    ::setenv("THINLAYER_WORKERS", "3", 1);
    EXPECT_EQ(worker_count(), 3u);
    ::setenv("THINLAYER_WORKERS", "junk", 1);
    EXPECT_EQ(worker_count(2), 2u);
    ::unsetenv("THINLAYER_WORKERS");
    EXPECT_EQ(worker_count(), 1u);
}

TEST(Sweep, NullFamilyIsAtTheFloor)
{
    const auto fam = build_family(LayerStack(1.0, {0.0, -0.5, -1.0}, {1.0, 1.0}, {1.0, 1.0}), 2,
                                  {0.08, 0.04, 0.02, 0.01}, 1.0, 1.0);
    SweepOptions opt;
    opt.nx = 16;
    opt.target_dz = 0.04;
    opt.t_end = 0.1;
    opt.n_samples = 4;
    opt.transport.dt_max = 0.005;
    opt.init.kind = InitKind::Random;
    opt.init.seed = 3;
    opt.init.norm = 1.0;
    const SweepResult r = sweep(fam, BackgroundProfile(1.0, 0.05, 1.0, 0.5), opt);
    EXPECT_TRUE(r.null_family);
    ASSERT_EQ(r.records.size(), 4u);
    for (const auto& rec : r.records) {
        EXPECT_FALSE(rec.failed);
        EXPECT_LE(rec.sup_energy, 10.0 * std::max(r.null_tolerance, 1e-20));
        EXPECT_EQ(rec.K_diff, 0.0);
    }
}

TEST(Sweep, SupEnergyIsRunningMaximum)
{
    SweepOptions opt;
    opt.nx = 16;
    opt.target_dz = 0.04;
    opt.t_end = 0.1;
    opt.n_samples = 5;
    opt.transport.dt_max = 0.005;
    opt.init.kind = InitKind::Random;
    opt.init.seed = 3;
    opt.init.norm = 1.0;
    const SweepResult r = sweep(contrasted_family({0.08, 0.04}), BackgroundProfile(1.0, 0.05, 1.0, 0.5), opt);
    ASSERT_EQ(r.records.size(), 2u);
    for (const auto& rec : r.records) {
        ASSERT_EQ(rec.energy.size(), rec.times.size());
        double running = 0.0;
        for (double e : rec.energy) {
            running = std::max(running, e);
        }
        EXPECT_EQ(running, rec.sup_energy);
        EXPECT_GT(rec.sup_energy, 0.0);
    }
    EXPECT_GT(r.records[0].sup_energy, r.records[1].sup_energy);
}

TEST(Attractor, ZeroContrastCollapsesToZeroAndIsDeterministic)
{
    const LayerStack member(1.0, {0.0, -1.0}, {1.0}, {1.0});
    const auto ref = std::make_shared<const Grid>(build_grid(member, 8, 0.1));
    AttractorOptions opt;
    opt.nx = 8;
    opt.target_dz = 0.1;
    opt.n_init = 2;
    opt.window = 1.0;
    opt.cadence = 0.5;
    opt.radius = 1.0;
    opt.spin_pad = 15.0;
    opt.seed = 4;
    opt.transport.dt_max = 0.05;
    const BackgroundProfile prof(1.0, 0.1, 0.0, 0.0);
    const AttractorSample a = sample_attractor(member, 0.0, prof, ref, opt);
    const AttractorSample b = sample_attractor(member, 0.0, prof, ref, opt);
    ASSERT_EQ(a.snapshots.size(), 6u);
    for (const auto& s : a.snapshots) {
        EXPECT_LE(l2_norm(s), 1e-6);
    }
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        EXPECT_EQ(a.snapshots[k].values(), b.snapshots[k].values());
    }
    EXPECT_EQ(a.seeds, b.seeds);
}
