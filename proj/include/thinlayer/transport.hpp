#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace thinlayer {

/// State of one trajectory. `p` and `u` are always the Darcy solution for
/// the current `psi`.
struct SimState {
    double t = 0.0;
    ScalarField psi;
    ScalarField p;
    VectorField u;
    long step = 0;
    double dt = 0.0;  ///< last step size taken
};

/// Build a consistent state from psi (solves for p and u).
SimState make_state(ScalarField psi, double t = 0.0);

struct TransportOptions {
    double dt_max = 1e-2;
    double safety = 0.5;
    /// First-order upwind advection instead of the energy-neutral centered form.
    bool upwind = false;
    /// Called with every velocity produced by a Darcy solve inside a step.
    std::function<void(const VectorField&)> on_darcy_update;
};

/// Advective time-step limit safety * min(dx / max|u_x|, min_c dz_c / max|u_z|
/// on the faces of c), capped at dt_max. Throws std::invalid_argument unless
/// 0 < safety <= 1.
double cfl_dt(const SimState& s, double safety, double dt_max);

/// Explicit part of the psi equation: -div(u psi) - phi_b' u_z + D phi_b''.
/// Advection uses centered face fluxes in z and the skew-symmetric split of
/// d_x(u_x psi) in x, so that (psi, advection) vanishes to rounding.
class ExplicitOperator {
public:
    ExplicitOperator(const GridPtr& grid, const BackgroundProfile& profile, bool upwind = false);

    [[nodiscard]] ScalarField advection(const ScalarField& psi, const VectorField& u) const;
    [[nodiscard]] ScalarField forcing(const VectorField& u) const;
    [[nodiscard]] ScalarField apply(const ScalarField& psi, const VectorField& u) const;

private:
    [[nodiscard]] ScalarField advection_centered(const ScalarField& psi, const VectorField& u) const;
    [[nodiscard]] ScalarField advection_upwind(const ScalarField& psi, const VectorField& u) const;

    GridPtr grid_;
    ProfileSamples profile_;
    bool upwind_;
};

/// Solve (I - a L) out = rhs for the Dirichlet diffusion operator
/// L psi = div(D grad psi), mode by mode. a >= 0.
ScalarField solve_implicit_diffusion(const ScalarField& rhs, double a);

/// Two-stage IMEX step: diffusion by the L-stable SDIRK(2) tableau,
/// advection, coupling and source by the matching explicit tableau
/// (Ascher-Ruuth-Spiteri (2,2,2)). Second order in time.
class Integrator {
public:
    Integrator(GridPtr grid, const BackgroundProfile& profile, TransportOptions options = {});

    [[nodiscard]] const TransportOptions& options() const noexcept { return options_; }
    [[nodiscard]] double cfl(const SimState& s) const { return cfl_dt(s, options_.safety, options_.dt_max); }

    /// Advance by dt. Throws CflError if dt exceeds the advective limit and
    /// DivergenceError if the new state is not finite.
    [[nodiscard]] SimState step(const SimState& s, double dt) const;

    /// Same as step() with the velocity frozen to zero (pure diffusion with
    /// source, no pressure solves).
    [[nodiscard]] SimState step_frozen(const SimState& s, double dt) const;

private:
    [[nodiscard]] VectorField darcy(const ScalarField& psi, ScalarField* p_out) const;

    GridPtr grid_;
    ExplicitOperator explicit_;
    TransportOptions options_;
};

/// Free-function form of Integrator::step.
SimState step(const SimState& s, const BackgroundProfile& profile, double dt, const TransportOptions& options = {});

// ---------------------------------------------------------------------------

enum class InitKind { Zero, Mode, Random, Snapshot };

/// Initial perturbation psi_0.
///   Mode:     amplitude * sin(2 pi m x / L) * sin(pi n z' / H), z' = -z
///   Random:   seeded series of low modes scaled to ||psi_0|| = norm
///   Snapshot: field read from a snapshot file
struct InitSpec {
    InitKind kind = InitKind::Zero;
    double amplitude = 0.0;
    int mode = 1;
    int vertical_mode = 1;
    std::uint64_t seed = 0;
    double norm = 1.0;
    int random_modes = 4;
    std::filesystem::path snapshot_path;
};

/// Evaluate psi_0 on a grid. Mode and Random data are analytic functions,
/// so evaluating them on any grid equals restricting one function.
ScalarField make_initial(const InitSpec& spec, const GridPtr& grid);

// ---------------------------------------------------------------------------

/// One row of a trajectory record.
struct TrajectorySample {
    double t = 0.0;
    double psi_sq = 0.0;     ///< ||psi||^2
    double grad_D_sq = 0.0;  ///< ||sqrt(D) grad psi||^2
    double L_sq = 0.0;       ///< ||L psi||^2
    double max_div = 0.0;    ///< max |div u|
    double dt = 0.0;
};

struct TrajectoryRecord {
    std::vector<TrajectorySample> samples;
    SimState final_state;
    bool completed = true;
    std::string failure;
    /// Largest max|div u| / (max|u| / min dz) seen after any Darcy update.
    double max_div_ratio = 0.0;
    /// Darcy updates where max|u| sat below the floor and the floor normalized.
    long div_floored = 0;
};

struct SimulateOptions {
    double t_end = 0.0;
    TransportOptions transport;
    /// Record a sample every this many steps (plus t = 0 and t_end).
    long observer_cadence = 1;
    /// Times the integrator must land on exactly; each is also sampled.
    std::vector<double> sample_times;
    /// Evaluate the divergence ratio after every Darcy update.
    bool check_divergence = false;
    /// The ratio normalizes by max(max|u|, floor): a flow decayed to rounding
    /// level is then held to an absolute bound instead of a relative one.
    double divergence_velocity_floor = 0.0;
    /// Called on every sampled state.
    std::vector<std::function<void(const SimState&)>> observers;
};

TrajectorySample sample_state(const SimState& s);

/// Integrate to t_end with dt = min(cfl, dt_max, time to the next required
/// sample). Non-finite values end the run with `completed = false` and the
/// partial record.
TrajectoryRecord simulate(ScalarField psi0, const BackgroundProfile& profile, const SimulateOptions& options);

/// Column text: header line then "t psi_sq grad_D_sq L_sq max_div dt" rows in
/// 17 significant digits.
void write_trajectory(const std::filesystem::path& path, const std::vector<TrajectorySample>& samples);
std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& path);

}  // namespace thinlayer
