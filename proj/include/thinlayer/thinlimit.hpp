#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/transport.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace thinlayer {

/// Worker count from THINLAYER_WORKERS, falling back to `fallback` (and to 1
/// when both are unset or invalid).
std::size_t worker_count(std::size_t fallback = 0);

/// Run body(0) .. body(n - 1) on up to `workers` threads. Each index runs
/// exactly once; results must be written to per-index slots, which keeps the
/// outcome independent of scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

/// Grid whose faces contain the interfaces of every family member, spacing
/// at most target_dz (at least two cells per segment). Its coefficients are
/// unit placeholders: only the geometry is used.
Grid build_reference_grid(const ThinFamily& family, std::size_t nx, double target_dz,
                          std::size_t cell_budget = kDefaultCellBudget);

/// Interpolate a field onto the reference grid's cell centers. Spectral in x
/// (zero padding when the reference is finer), linear in z. Dirichlet center
/// fields use their zero boundary values, other fields extrapolate linearly
/// beyond the outermost nodes. The result is a center field carrying the
/// source's Dirichlet tag.
ScalarField to_reference(const ScalarField& f, const GridPtr& ref);

/// Fields of one state restricted to the reference grid, in the pieces that
/// are continuous across interfaces.
struct ReferenceState {
    double t = 0.0;
    ScalarField psi;
    ScalarField px;  ///< d_x p
    ScalarField uz;
};

ReferenceState project_state(const SimState& s, const GridPtr& ref);

struct DifferenceNorms {
    double psi = 0.0;     ///< ||psi_eps - psi_0||
    double u = 0.0;       ///< ||u_eps - u_0||
    double grad_p = 0.0;  ///< ||grad p_eps - grad p_0||
    [[nodiscard]] double energy() const { return u * u + psi * psi + grad_p * grad_p; }
};

/// Difference of two projected states. u_x and d_z p are rebuilt from the
/// continuous pieces with each member's own permeability at the reference
/// centers, so the jump of K across interfaces is represented exactly.
DifferenceNorms difference_norms(const ReferenceState& a, const LayerStack& layers_a, const ReferenceState& b,
                                 const LayerStack& layers_b);

/// Exact ||c_eps - c_0|| over the strip for a piecewise-constant coefficient.
double coefficient_difference(const LayerStack& member, const LayerStack& limit, bool permeability);

struct ConvergenceRecord {
    double eps = 0.0;
    std::vector<double> times;
    std::vector<double> psi_l2;
    std::vector<double> u_l2;
    std::vector<double> grad_p_l2;
    std::vector<double> energy;  ///< E = ||u~||^2 + ||psi~||^2 + ||grad p~||^2
    double sup_energy = 0.0;
    double K_diff = 0.0;  ///< ||K~||
    double D_diff = 0.0;  ///< ||D~||
    bool failed = false;
    std::string failure;
};

struct RateFit {
    double rate = 0.0;
    double prefactor = 0.0;
    std::size_t used = 0;
    bool valid = false;
};

/// Least-squares fit of log y = log A + rho log x over the smallest `min_points`
/// (or more, when available) positive x values with positive y.
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_points = 4);

struct SweepOptions {
    std::size_t nx = 64;
    double target_dz = 0.01;
    std::size_t cell_budget = kDefaultCellBudget;
    double t_end = 1.0;
    std::size_t n_samples = 20;  ///< equally spaced sample times in (0, t_end]
    TransportOptions transport;
    InitSpec init;
    std::size_t workers = 1;
    std::size_t fit_points = 4;
};

struct SweepResult {
    std::vector<ConvergenceRecord> records;  ///< one per positive eps, in family order
    RateFit energy_fit;
    RateFit K_fit;
    RateFit D_fit;
    bool null_family = false;
    /// sup_t E between the limit model on its own grid and on a grid with the
    /// reference faces: the discretization floor of E.
    double null_tolerance = 0.0;
    /// E(eps) strictly decreases as eps decreases (failed members excluded).
    bool monotone = false;
    std::vector<std::string> warnings;
    std::vector<TrajectorySample> limit_samples;
};

SweepResult sweep(const ThinFamily& family, const BackgroundProfile& profile, const SweepOptions& options);

// ---------------------------------------------------------------------------

struct AttractorOptions {
    std::size_t nx = 32;
    double target_dz = 0.02;
    std::size_t cell_budget = kDefaultCellBudget;
    std::size_t n_init = 8;
    double window = 20.0;
    double cadence = 1.0;
    std::uint64_t seed = 0;
    double radius = 2.0;  ///< initial data have ||psi_0|| <= radius
    double spin_pad = 2.0;
    std::size_t min_snapshots = 1;
    TransportOptions transport;
    std::size_t workers = 1;
};

struct AttractorSample {
    double eps = 0.0;
    double spin_up = 0.0;
    double window = 0.0;
    double cadence = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> initial_norms;
    std::vector<double> times;      ///< per snapshot
    std::vector<double> psi_sq;     ///< per snapshot, on the member grid
    std::vector<ScalarField> snapshots;  ///< on the reference grid
    std::vector<std::string> warnings;
};

/// Integrate n_init seeded initial conditions of norm radius * (i + 1) / n_init
/// to T1(radius) + 1 + spin_pad and pool snapshots taken every `cadence` over
/// the following window. Throws Error if fewer than min_snapshots survive.
AttractorSample sample_attractor(const LayerStack& member, double eps, const BackgroundProfile& profile,
                                 const GridPtr& ref, const AttractorOptions& options);

/// Hausdorff semi-distance max_a min_b ||a - b|| with cell-weighted L^2 norms.
/// Throws std::invalid_argument on an empty set.
double semidistance(const std::vector<ScalarField>& A, const std::vector<ScalarField>& B);
double semidistance(const AttractorSample& A, const AttractorSample& B);

}  // namespace thinlayer
