#include "thinlayer/errors.hpp"
#include "thinlayer/geometry.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace thinlayer;

namespace {

LayerStack two_layer() { return LayerStack(1.0, {0.0, -0.5, -1.0}, {1.0, 2.0}, {1.0, 1.0}); }

bool has_face(const Grid& g, double z)
{
    const auto f = g.z_faces();
    return std::find(f.begin(), f.end(), z) != f.end();
}

}  // namespace

TEST(LayerStack, RejectsMalformedInput)
{
    EXPECT_THROW(LayerStack(1.0, {0.0, -0.5, -0.5}, {1, 1}, {1, 1}), GeometryError);
    EXPECT_THROW(LayerStack(1.0, {0.1, -1.0}, {1}, {1}), GeometryError);
    EXPECT_THROW(LayerStack(1.0, {0.0, -1.0}, {1, 2}, {1}), GeometryError);
    EXPECT_THROW(LayerStack(1.0, {0.0, -1.0}, {0.0}, {1}), GeometryError);
    EXPECT_THROW(LayerStack(0.0, {0.0, -1.0}, {1}, {1}), GeometryError);
}

TEST(LayerStack, LayerLookupOnInterfacesGoesBelow)
{
    const LayerStack s = two_layer();
    EXPECT_EQ(s.layer_at(-0.25), 0u);
    EXPECT_EQ(s.layer_at(-0.5), 1u);
    EXPECT_EQ(s.layer_at(-1.0), 1u);
    EXPECT_DOUBLE_EQ(s.K_at(-0.75), 2.0);
}

TEST(ThinFamily, ZeroThicknessIsTheBaseStack)
{
    const LayerStack base = two_layer();
    const ThinFamily fam = build_family(base, 2, {}, 5.0, 3.0);
    EXPECT_EQ(fam.instantiate(0.0), base);
}

TEST(ThinFamily, SplitsLayerAboveTheThinLayer)
{
    const LayerStack base(1.0, {0.0, -0.5, -1.0}, {1.0, 1.0}, {1.0, 1.0});
    const ThinFamily fam = build_family(base, 2, {0.1}, 0.5, 0.25);
    EXPECT_DOUBLE_EQ(fam.h(), 0.5);
    const LayerStack m = fam.instantiate(0.1);
    ASSERT_EQ(m.layer_count(), 3u);
    EXPECT_NEAR(m.thickness(0), 0.4, 1e-15);
    EXPECT_NEAR(m.thickness(1), 0.1, 1e-15);
    EXPECT_NEAR(m.interfaces()[1], m.interfaces()[0] - 0.4, 1e-15);
    EXPECT_DOUBLE_EQ(m.permeability()[1], 0.5);
    EXPECT_DOUBLE_EQ(m.diffusivity()[1], 0.25);
}

TEST(ThinFamily, ThicknessesSumToDepth)
{
    const LayerStack base(2.0, {0.0, -0.3, -0.9, -1.7}, {1, 2, 3}, {1, 1, 2});
    for (int j = 2; j <= 4; ++j) {
        const double h = base.thickness(static_cast<std::size_t>(j - 2));
        const ThinFamily fam = build_family(base, j, {h / 2, h / 4, h / 8}, 7.0, 0.1);
        for (double eps : fam.epsilons()) {
            const LayerStack m = fam.instantiate(eps);
            double total = 0.0;
            for (std::size_t i = 0; i < m.layer_count(); ++i) {
                total += m.thickness(i);
            }
            EXPECT_NEAR(total, 1.7, 1e-12 * 1.7);
        }
    }
}

TEST(ThinFamily, RejectsThickLayerAndBadIndex)
{
    const LayerStack base(1.0, {0.0, -0.1, -1.0}, {1, 1}, {1, 1});
    EXPECT_THROW(build_family(base, 2, {0.2, 0.1, 0.05}, 1, 1), GeometryError);
    EXPECT_THROW(build_family(base, 1, {0.05}, 1, 1), IndexError);
    EXPECT_THROW(build_family(base, 4, {0.05}, 1, 1), IndexError);
}

TEST(ThinFamily, NullWhenCoefficientsMatch)
{
    const LayerStack base = two_layer();
    EXPECT_TRUE(build_family(base, 2, {0.1}, 1.0, 1.0).is_null());
    EXPECT_FALSE(build_family(base, 2, {0.1}, 2.0, 1.0).is_null());
}

TEST(Grid, UniformSingleLayer)
{
    const Grid g = build_grid(LayerStack(1.0, {0.0, -1.0}, {1}, {1}), 8, 0.25);
    const std::vector<double> expect{0.0, -0.25, -0.5, -0.75, -1.0};
    ASSERT_EQ(g.nz(), 4u);
    for (std::size_t f = 0; f < expect.size(); ++f) {
        EXPECT_DOUBLE_EQ(g.z_faces()[f], expect[f]);
    }
}

TEST(Grid, InterfaceIsAFace)
{
    const Grid g = build_grid(LayerStack(1.0, {0.0, -0.3, -1.0}, {1, 2}, {1, 1}), 8, 0.25);
    EXPECT_TRUE(has_face(g, -0.3));
    EXPECT_NEAR(g.dz()[0], 0.15, 1e-15);
    EXPECT_NEAR(g.dz()[1], 0.15, 1e-15);
    EXPECT_EQ(g.cell_layer(1), 0u);
    EXPECT_EQ(g.cell_layer(2), 1u);
}

TEST(Grid, ThinLayerGetsTwoCells)
{
    const LayerStack base(1.0, {0.0, -0.5, -1.0}, {1, 1}, {1, 1});
    const LayerStack m = build_family(base, 2, {1e-4}, 2, 2).instantiate(1e-4);
    const Grid g = build_grid(m, 16, 0.01, 1'000'000);
    std::size_t inside = 0;
    for (std::size_t c = 0; c < g.nz(); ++c) {
        inside += g.cell_layer(c) == 1 ? 1 : 0;
    }
    EXPECT_EQ(inside, 2u);
}

TEST(Grid, CellBudgetEnforced)
{
    EXPECT_THROW(build_grid(LayerStack(1.0, {0.0, -1.0}, {1}, {1}), 64, 1e-3, 1000), GeometryError);
}

TEST(Grid, SingleValuedCoefficientsAndHarmonicFaces)
{
    const LayerStack s(1.0, {0.0, -0.4, -1.0}, {1.0, 4.0}, {2.0, 0.5});
    const Grid g = build_grid(s, 8, 0.1);
    for (std::size_t c = 0; c < g.nz(); ++c) {
        const double zc = g.z_centers()[c];
        EXPECT_DOUBLE_EQ(g.K_cell()[c], s.K_at(zc));
        EXPECT_DOUBLE_EQ(g.D_cell()[c], s.D_at(zc));
    }
    const auto f = static_cast<std::size_t>(std::find(g.z_faces().begin(), g.z_faces().end(), -0.4) -
                                            g.z_faces().begin());
    const double a = 0.5 * g.dz()[f - 1];
    const double b = 0.5 * g.dz()[f];
    EXPECT_NEAR(g.K_face()[f], (a + b) / (a / 1.0 + b / 4.0), 1e-14);
    EXPECT_NEAR(g.face_spacing()[f], a + b, 1e-15);
    EXPECT_DOUBLE_EQ(g.face_spacing()[0], 0.5 * g.dz()[0]);
}

TEST(Profile, ZeroContrastIsConstant)
{
    const BackgroundProfile p(1.0, 0.2, 1.0, 1.0);
    for (double z = 0.0; z >= -1.0; z -= 0.01) {
        EXPECT_DOUBLE_EQ(p.value(z), 1.0);
        EXPECT_DOUBLE_EQ(p.slope(z), 0.0);
        EXPECT_DOUBLE_EQ(p.curvature(z), 0.0);
    }
}

TEST(Profile, BoundaryValuesAndPeakSlope)
{
    const BackgroundProfile p(1.0, 0.1, 1.0, 0.0);
    EXPECT_DOUBLE_EQ(p.value(0.0), 1.0);
    EXPECT_DOUBLE_EQ(p.value(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(p.value(-0.5), 0.5);
    EXPECT_DOUBLE_EQ(p.c_delta(), 1.0);
    EXPECT_NEAR(std::abs(p.slope(-0.05)), 10.0, 1e-12);
    double peak = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        peak = std::max(peak, std::abs(p.slope(-k * 1e-4)));
    }
    EXPECT_NEAR(peak, 10.0, 1e-12);
}

TEST(Profile, SampledDerivativesRespectBounds)
{
    const LayerStack s(1.0, {0.0, -0.37, -1.0}, {1, 3}, {1, 1});
    const BackgroundProfile p = build_profile(s, 0.07, 2.0, -1.0);
    const Grid g = build_grid(s, 8, 0.003);
    const ProfileSamples ps = p.sample(g);
    const double c = p.c_delta();
    const double slack = 1 + 1e-12;
    for (double v : ps.dphi_c) {
        EXPECT_LE(std::abs(v), c / 0.07 * slack);
    }
    for (double v : ps.d2phi_c) {
        EXPECT_LE(std::abs(v), 2 * c / (0.07 * 0.07) * slack);
    }
    for (double v : ps.dphi_f) {
        EXPECT_LE(std::abs(v), c / 0.07 * slack);
    }
}

TEST(Profile, OverlappingBandsRejected)
{
    EXPECT_THROW(BackgroundProfile(1.0, 0.6, 1.0, 0.0), GeometryError);
    EXPECT_THROW(BackgroundProfile(1.0, 0.5, 1.0, 0.0), GeometryError);
}

TEST(CheckDelta, UnitCoefficients)
{
    const LayerStack s(1.0, {0.0, -1.0}, {1}, {1});
    const auto r = check_delta(s, BackgroundProfile(1.0, 0.1, 1.0, 0.0));
    EXPECT_DOUBLE_EQ(r.delta_max, 1.0 / 8.0);
    EXPECT_TRUE(r.admissible);
    EXPECT_FALSE(check_delta(s, BackgroundProfile(1.0, 0.2, 1.0, 0.0)).admissible);
}

TEST(CheckDelta, ZeroContrastAlwaysAdmissible)
{
    const LayerStack s(1.0, {0.0, -1.0}, {1}, {1});
    const auto r = check_delta(s, BackgroundProfile(1.0, 0.45, 3.0, 3.0));
    EXPECT_TRUE(r.admissible);
    EXPECT_EQ(r.delta_max, std::numeric_limits<double>::infinity());
}

TEST(CheckDelta, ContrastedCoefficients)
{
    const LayerStack s(1.0, {0.0, -0.5, -1.0}, {1, 4}, {2, 1});
    const auto r = check_delta(s, BackgroundProfile(1.0, 0.001, 2.0, 0.0));
    EXPECT_DOUBLE_EQ(r.delta_max, 1.0 / 256.0);
}
