#pragma once

#include "thinlayer/estimates.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thinlayer {

inline constexpr int kSchemaVersion = 1;

struct LayersConfig {
    std::vector<double> interfaces{0.0, -1.0};
    std::vector<double> K{1.0};
    std::vector<double> D{1.0};
    double L = 1.0;
    bool operator==(const LayersConfig&) const = default;
};

struct ProfileConfig {
    double delta = 0.1;
    double c0 = 0.0;
    double c_mH = 0.0;
    bool operator==(const ProfileConfig&) const = default;
};

struct GridConfig {
    std::int64_t nx = 64;
    double target_dz = 0.02;
    std::int64_t cell_budget = static_cast<std::int64_t>(kDefaultCellBudget);
    bool operator==(const GridConfig&) const = default;
};

struct TimeConfig {
    double t_end = 1.0;
    double dt_max = 1e-2;
    double safety = 0.5;
    std::int64_t observer_cadence = 1;
    bool upwind = false;
    bool operator==(const TimeConfig&) const = default;
};

struct InitConfig {
    std::string kind = "zero";
    double amplitude = 0.0;
    std::int64_t mode = 1;
    std::int64_t vertical_mode = 1;
    std::uint64_t seed = 0;
    double norm = 1.0;
    std::string snapshot_path;
    bool operator==(const InitConfig&) const = default;
};

struct ThinConfig {
    bool present = false;
    std::int64_t j = 2;
    std::optional<double> h;  ///< must match layer j-1 of the base stack when given
    std::vector<double> epsilons;
    double K = 1.0;
    double D = 1.0;
    std::int64_t samples = 20;
    bool operator==(const ThinConfig&) const = default;
};

struct AttractorConfig {
    std::int64_t n_init = 8;
    double window = 20.0;
    double cadence = 1.0;
    std::uint64_t seed = 0;
    double radius = 2.0;
    double spin_pad = 2.0;
    std::int64_t min_snapshots = 1;
    std::int64_t nx = 0;      ///< 0: use grid.nx
    double target_dz = 0.0;   ///< 0: use grid.target_dz
    bool operator==(const AttractorConfig&) const = default;
};

struct AuditConfig {
    bool enabled = true;
    double tol_factor = 10.0;
    double rate_min = 0.25;
    double slope_rel = 1e-2;
    /// Allowed deviation of the coefficient-difference slope from 1/2.
    double coef_slope_tol = 1e-6;
    /// Null family passes when every E stays below null_factor * floor.
    double null_factor = 10.0;
    bool operator==(const AuditConfig&) const = default;
};

struct RunSection {
    std::int64_t schema = kSchemaVersion;
    std::int64_t workers = 0;  ///< 0: THINLAYER_WORKERS or 1
    bool operator==(const RunSection&) const = default;
};

struct RunConfig {
    LayersConfig layers;
    ProfileConfig profile;
    GridConfig grid;
    TimeConfig time;
    InitConfig init;
    ThinConfig thin;
    AttractorConfig attractor;
    EmbeddingConstants estimates;
    AuditConfig audit;
    RunSection run;
    bool operator==(const RunConfig&) const = default;
};

/// Parse and validate. Throws ConfigError listing every syntax error (with
/// line numbers) or, for well-formed text, every semantic error (with key
/// paths such as `profile.delta`).
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Text that parses back to an equal config; numbers use 17 significant
/// digits.
std::string serialize(const RunConfig& config);

LayerStack make_layers(const RunConfig& config);
BackgroundProfile make_profile(const RunConfig& config);
/// Throws ConfigError if the config has no [thin] section.
ThinFamily make_family(const RunConfig& config);
InitSpec make_init(const RunConfig& config);
TransportOptions make_transport(const RunConfig& config);

}  // namespace thinlayer
