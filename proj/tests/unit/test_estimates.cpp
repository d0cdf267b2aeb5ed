#include "thinlayer/estimates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace thinlayer;

namespace {

LayerStack unit_stack(double L = 1.0) { return LayerStack(L, {0.0, -1.0}, {1.0}, {1.0}); }

std::vector<TrajectorySample> decaying_record(double a0, double rate, double t_end, std::size_t n)
{
    std::vector<TrajectorySample> out;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = t_end * static_cast<double>(k) / static_cast<double>(n);
        TrajectorySample s;
        s.t = t;
        s.psi_sq = a0 * std::exp(-rate * t);
        s.grad_D_sq = 0.5 * rate * s.psi_sq;
        s.L_sq = rate * s.grad_D_sq;
        s.dt = t_end / static_cast<double>(n);
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST(Constants, M1FromContrastWidthAndPeriod)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 1.0, 0.0));
    EXPECT_DOUBLE_EQ(r.M1, 80.0);
    EXPECT_DOUBLE_EQ(r.M2, 8.0 / 0.001);
    EXPECT_DOUBLE_EQ(r.M3, 8.0);
}

TEST(Constants, ZeroContrastZeroesTheForcingConstants)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 2.0, 2.0));
    EXPECT_EQ(r.M1, 0.0);
    EXPECT_EQ(r.M2, 0.0);
    EXPECT_EQ(r.M3, 0.0);
    EXPECT_DOUBLE_EQ(r.absorbing_bound(), 1.0);
}

TEST(Constants, MonotoneInWidthContrastAndPeriod)
{
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {0.01, 0.05, 0.1, 0.3}) {
        const double m1 = constants(unit_stack(), BackgroundProfile(1.0, delta, 1.0, 0.0)).M1;
        EXPECT_LT(m1, prev);
        prev = m1;
    }
    prev = 0.0;
    for (double c : {0.1, 0.5, 1.0, 4.0}) {
        const double m1 = constants(unit_stack(), BackgroundProfile(1.0, 0.1, c, 0.0)).M1;
        EXPECT_GT(m1, prev);
        prev = m1;
    }
    prev = 0.0;
    for (double L : {0.5, 1.0, 2.0, 8.0}) {
        const double m1 = constants(unit_stack(L), BackgroundProfile(1.0, 0.1, 1.0, 0.0)).M1;
        EXPECT_GT(m1, prev);
        prev = m1;
    }
}

TEST(Constants, ParametricConstantsFollowEmbedding)
{
    EmbeddingConstants e;
    e.C1 = 2.0;
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 1.0, 0.0), e);
    EXPECT_DOUBLE_EQ(r.M4, 13.5 * 16.0 * 16.0);
    EXPECT_TRUE(std::isinf(r.M5) || r.M5 > 0.0);
    EXPECT_GE(r.M6, r.M5);
    EXPECT_DOUBLE_EQ(r.M7(0.0), 0.0);
}

TEST(AbsorbingTime, Formula)
{
    EXPECT_NEAR(absorbing_time(std::exp(1.0), 1.0, 1.0), 2.0, 1e-15);
    EXPECT_EQ(absorbing_time(1.0, 1.0, 1.0), 0.0);
    EXPECT_EQ(absorbing_time(0.3, 1.0, 1.0), 0.0);
    EXPECT_NEAR(absorbing_time(std::exp(2.0), 2.0, 0.5), 32.0, 1e-13);
    EXPECT_NEAR(absorbing_time(std::exp(2.0), LayerStack(1.0, {0.0, -2.0}, {1.0}, {0.5})), 32.0, 1e-13);
}

TEST(Envelope, ZeroContrastIsPureDecay)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 0.0, 0.0), {}, 2.0);
    for (double t : {0.0, 0.5, 3.0}) {
        EXPECT_DOUBLE_EQ(r.envelope(t), 4.0 * std::exp(-t));
    }
}

TEST(AuditL2, NullTrajectoryPasses)
{
    std::vector<TrajectorySample> rec(11);
    for (std::size_t k = 0; k < rec.size(); ++k) {
        rec[k].t = 0.1 * static_cast<double>(k);
    }
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 0.0, 0.0));
    const AuditReport a = audit_l2(rec, r);
    EXPECT_TRUE(a.applicable);
    EXPECT_TRUE(a.pass());
    for (const auto& c : a.checks) {
        EXPECT_LE(c.worst_residual, 0.0) << c.name;
    }
    EXPECT_TRUE(audit_h1(rec, r).pass());
}

TEST(AuditL2, DecayFasterThanEnvelopePasses)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 0.0, 0.0), {}, 1.5);
    const auto rec = decaying_record(2.25, 2 * std::numbers::pi * std::numbers::pi, 2.0, 400);
    const AuditReport a = audit_l2(rec, r, {.tol_factor = 10, .max_dz = 0.01});
    EXPECT_TRUE(a.pass());
}

TEST(AuditL2, CorruptedEnvelopeFails)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 0.0, 0.0), {}, 1.5);
    auto rec = decaying_record(2.25, 2 * std::numbers::pi * std::numbers::pi, 2.0, 400);
    rec[200].psi_sq = 2.0;
    const AuditReport a = audit_l2(rec, r, {.tol_factor = 10, .max_dz = 0.01});
    EXPECT_FALSE(a.pass());
    const auto& env = a.checks[1];
    EXPECT_EQ(env.name, "envelope");
    EXPECT_FALSE(env.pass);
    EXPECT_DOUBLE_EQ(env.worst_t, 1.0);
}

TEST(AuditL2, InadmissibleWidthIsNotApplicable)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.3, 1.0, 0.0));
    ASSERT_FALSE(r.admissibility.admissible);
    const AuditReport a = audit_l2(decaying_record(1, 1, 1, 10), r);
    EXPECT_FALSE(a.applicable);
    EXPECT_NE(a.note.find("not applicable"), std::string::npos);
    EXPECT_FALSE(audit_h1(decaying_record(1, 1, 1, 10), r).applicable);
}

TEST(AuditH1, DetectsGrowthTrend)
{
    const EnergyReport r = constants(unit_stack(), BackgroundProfile(1.0, 0.1, 0.0, 0.0), {}, 1.0);
    std::vector<TrajectorySample> rec;
    for (int k = 0; k <= 100; ++k) {
        TrajectorySample s;
        s.t = 0.05 * k;
        s.grad_D_sq = 1.0 + s.t;
        s.dt = 0.05;
        rec.push_back(s);
    }
    const AuditReport a = audit_h1(rec, r, {.tol_factor = 10, .max_dz = 0.01});
    const auto& trend = a.checks[1];
    EXPECT_EQ(trend.name, "h1_trend");
    EXPECT_FALSE(trend.pass);
    EXPECT_NEAR(trend.worst_residual, 1.0, 1e-12);
}

TEST(AuditH1, IntegrableDecayHasFiniteIntegral)
{
    const double rate = 2 * std::numbers::pi * std::numbers::pi;
    const auto rec = decaying_record(1.0, rate, 4.0, 4000);
    const auto cum = cumulative_integral(rec, &TrajectorySample::L_sq);
    // int_0^inf (rate^2 / 2) e^{-rate t} dt = rate / 2.
    EXPECT_NEAR(cum.back(), rate / 2, 1e-4 * rate);
    EXPECT_LT(cum.back() - cum[2000], 1e-6 * cum.back());
}

TEST(CumulativeIntegral, TrapezoidExactForLinear)
{
    std::vector<TrajectorySample> rec(5);
    for (std::size_t k = 0; k < rec.size(); ++k) {
        rec[k].t = static_cast<double>(k * k);
        rec[k].grad_D_sq = 3.0 * rec[k].t + 1.0;
    }
    const auto cum = cumulative_integral(rec, &TrajectorySample::grad_D_sq);
    for (std::size_t k = 0; k < rec.size(); ++k) {
        const double t = rec[k].t;
        EXPECT_NEAR(cum[k], 1.5 * t * t + t, 1e-12);
    }
}
