#pragma once

#include "thinlayer/geometry.hpp"
#include "thinlayer/transport.hpp"

#include <string>
#include <vector>

namespace thinlayer {

/// Embedding and elliptic constants that the estimates depend on but that are
/// not available in closed form. Everything built from them is parametric.
struct EmbeddingConstants {
    double C1 = 1.0;
    double C2 = 1.0;
    double C_u = 1.0;
    double C_p = 1.0;
    /// Generic constant C of the convergence bound.
    double C = 1.0;

    bool operator==(const EmbeddingConstants&) const = default;
};

/// Explicit constants of the energy estimates for one layered medium and
/// initial datum.
struct EnergyReport {
    double H = 0.0;
    double L = 0.0;
    double K_min = 0.0, K_max = 0.0;
    double D_min = 0.0, D_max = 0.0;
    double c_delta = 0.0;
    double delta = 0.0;
    DeltaAdmissibility admissibility{};

    double psi0_norm = 0.0;  ///< ||psi_0||
    double grad0_sq = 0.0;   ///< ||sqrt(D) grad psi_0||^2
    EmbeddingConstants embed;

    double M1 = 0.0;
    double M2 = 0.0;
    double M3 = 0.0;
    // Parametric in `embed`; M5 and M6 may overflow to +inf.
    double M4 = 0.0;
    double M5 = 0.0;
    double M6 = 0.0;
    double T1 = 0.0;

    /// Decay rate min D / H^2 of the Gronwall envelope.
    [[nodiscard]] double decay_rate() const { return D_min / (H * H); }
    /// M1 H^2 / min D + 1, the L^2 radius (squared) of the absorbing ball.
    [[nodiscard]] double absorbing_bound() const { return M1 * H * H / D_min + 1.0; }
    /// ||psi_0||^2 e^{-at} + (M1 H^2 / min D)(1 - e^{-at}).
    [[nodiscard]] double envelope(double t) const;

    [[nodiscard]] double M5_prime(double t) const;
    [[nodiscard]] double M7(double t) const;
    [[nodiscard]] double M8(double t) const;
};

/// T1 = max(0, (2 H^2 / min D) ln ||psi_0||).
double absorbing_time(double psi0_norm, double depth, double D_min);
double absorbing_time(double psi0_norm, const LayerStack& layers);

EnergyReport constants(const LayerStack& layers, const BackgroundProfile& profile,
                       const EmbeddingConstants& embed = {}, double psi0_norm = 0.0, double grad0_sq = 0.0);

// ---------------------------------------------------------------------------

struct AuditOptions {
    /// Multiplier of the discretization allowance (dt^2 + max dz^2) * scale.
    double tol_factor = 10.0;
    double max_dz = 0.0;
    /// Relative growth per unit time tolerated for ||sqrt(D) grad psi||^2
    /// after T1 + 1.
    double slope_rel = 1e-2;
};

struct CheckResult {
    std::string name;
    bool applicable = true;
    bool pass = true;
    std::size_t checked = 0;
    double worst_residual = 0.0;  ///< max(lhs - rhs); <= tol for a pass
    double worst_t = 0.0;
    double tolerance = 0.0;
};

struct AuditReport {
    bool applicable = true;
    std::string note;
    std::vector<CheckResult> checks;
    /// Fitted quantities reported alongside the checks (name, value).
    std::vector<std::pair<std::string, double>> fitted;

    [[nodiscard]] bool pass() const;
};

/// L^2 checks along a sampled trajectory:
///   rate      (E(t+) - E(t-)) / (t+ - t-) + ||sqrt(D) grad psi||^2 <= M1 + tol
///   envelope  ||psi||^2 <= Gronwall envelope + tol
///   absorbing ||psi||^2 <= M1 H^2 / min D + 1 for t >= T1
///   window    int_t^{t+1} ||sqrt(D) grad psi||^2 <= M1 H^2 / min D + 1 for t >= T1
/// Not applicable when delta violates the admissibility bound.
AuditReport audit_l2(const std::vector<TrajectorySample>& samples, const EnergyReport& report,
                     const AuditOptions& options = {});

/// H^1 checks: sup of ||sqrt(D) grad psi||^2 after T1 + 1 against M5, no
/// growth trend after T1 + 1, and int_0^t ||L psi||^2 <= M7(t).
AuditReport audit_h1(const std::vector<TrajectorySample>& samples, const EnergyReport& report,
                     const AuditOptions& options = {});

/// Trapezoid integral of ||sqrt(D) grad psi||^2 (or any column) from the first
/// sample up to each sample.
std::vector<double> cumulative_integral(const std::vector<TrajectorySample>& samples,
                                        double TrajectorySample::*column);

}  // namespace thinlayer
