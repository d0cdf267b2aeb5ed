#include "thinlayer/geometry.hpp"

#include "thinlayer/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace thinlayer {

LayerStack::LayerStack(double period, std::vector<double> interfaces, std::vector<double> permeability,
                       std::vector<double> diffusivity)
    : period_(period),
      interfaces_(std::move(interfaces)),
      K_(std::move(permeability)),
      D_(std::move(diffusivity))
{
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        throw GeometryError(fmt::format("horizontal period must be positive, got {}", period_));
    }
    if (interfaces_.size() < 2) {
        throw GeometryError("a layer stack needs at least the two boundary interfaces");
    }
    if (interfaces_.front() != 0.0) {
        throw GeometryError(fmt::format("first interface must be 0, got {}", interfaces_.front()));
    }
    for (std::size_t i = 1; i < interfaces_.size(); ++i) {
        if (!(interfaces_[i] < interfaces_[i - 1]) || !std::isfinite(interfaces_[i])) {
            throw GeometryError(fmt::format("interfaces must be strictly decreasing (z[{}] = {} after {})", i,
                                            interfaces_[i], interfaces_[i - 1]));
        }
    }
    const std::size_t l = interfaces_.size() - 1;
    if (K_.size() != l || D_.size() != l) {
        throw GeometryError(fmt::format("{} layers but {} permeabilities and {} diffusivities", l, K_.size(),
                                        D_.size()));
    }
    for (std::size_t i = 0; i < l; ++i) {
        if (!(K_[i] > 0.0) || !std::isfinite(K_[i])) {
            throw GeometryError(fmt::format("K[{}] = {} must be positive", i, K_[i]));
        }
        if (!(D_[i] > 0.0) || !std::isfinite(D_[i])) {
            throw GeometryError(fmt::format("D[{}] = {} must be positive", i, D_[i]));
        }
    }
}

std::size_t LayerStack::layer_at(double z) const
{
    const std::size_t l = layer_count();
    for (std::size_t i = 0; i + 1 < l; ++i) {
        if (z > interfaces_[i + 1]) {
            return i;
        }
    }
    return l - 1;
}

double LayerStack::K_min() const { return *std::min_element(K_.begin(), K_.end()); }
double LayerStack::K_max() const { return *std::max_element(K_.begin(), K_.end()); }
double LayerStack::D_min() const { return *std::min_element(D_.begin(), D_.end()); }
double LayerStack::D_max() const { return *std::max_element(D_.begin(), D_.end()); }

// ---------------------------------------------------------------------------

ThinFamily::ThinFamily(LayerStack base, int j, double thin_K, double thin_D, std::vector<double> epsilons)
    : base_(std::move(base)), j_(j), h_(0.0), thin_K_(thin_K), thin_D_(thin_D), epsilons_(std::move(epsilons))
{
    const int l_split = static_cast<int>(base_.layer_count()) + 1;
    if (j_ < 2 || j_ > l_split) {
        throw IndexError(fmt::format("thin layer index j = {} outside [2, {}]", j_, l_split));
    }
    if (!(thin_K_ > 0.0) || !(thin_D_ > 0.0)) {
        throw GeometryError("thin layer coefficients must be positive");
    }
    h_ = base_.thickness(static_cast<std::size_t>(j_ - 2));
    for (std::size_t k = 0; k < epsilons_.size(); ++k) {
        const double eps = epsilons_[k];
        if (!(eps > 0.0)) {
            throw GeometryError(fmt::format("epsilon {} must be positive", eps));
        }
        if (eps >= h_) {
            throw GeometryError(fmt::format("epsilon {} is not below the split layer thickness h = {}", eps, h_));
        }
        if (k > 0 && !(eps < epsilons_[k - 1])) {
            throw GeometryError("epsilons must be strictly decreasing");
        }
    }
}

LayerStack ThinFamily::instantiate(double eps) const
{
    if (eps == 0.0) {
        return base_;
    }
    if (!(eps > 0.0) || eps >= h_) {
        throw GeometryError(fmt::format("epsilon {} outside (0, {})", eps, h_));
    }
    const auto split = static_cast<std::size_t>(j_ - 2);  // 0-based index of layer j-1
    std::vector<double> z(base_.interfaces());
    std::vector<double> K(base_.permeability());
    std::vector<double> D(base_.diffusivity());
    const double bottom = base_.bottom(split);
    z.insert(z.begin() + static_cast<std::ptrdiff_t>(split) + 1, bottom + eps);
    K.insert(K.begin() + static_cast<std::ptrdiff_t>(split) + 1, thin_K_);
    D.insert(D.begin() + static_cast<std::ptrdiff_t>(split) + 1, thin_D_);
    return LayerStack(base_.period(), std::move(z), std::move(K), std::move(D));
}

bool ThinFamily::is_null() const
{
    const auto split = static_cast<std::size_t>(j_ - 2);
    return base_.permeability()[split] == thin_K_ && base_.diffusivity()[split] == thin_D_;
}

ThinFamily build_family(const LayerStack& base, int j, std::vector<double> epsilons, double thin_K,
                        double thin_D)
{
    return ThinFamily(base, j, thin_K, thin_D, std::move(epsilons));
}

// ---------------------------------------------------------------------------

Grid::Grid(LayerStack layers, std::size_t nx, std::vector<double> z_faces)
    : layers_(std::move(layers)), nx_(nx), z_faces_(std::move(z_faces))
{
    if (nx_ < 4 || nx_ % 2 != 0) {
        throw GeometryError(fmt::format("nx = {} must be even and at least 4", nx_));
    }
    if (z_faces_.size() < 2 || z_faces_.front() != 0.0 || z_faces_.back() != -layers_.depth()) {
        throw GeometryError("grid faces must run from 0 to -H");
    }
    for (std::size_t f = 1; f < z_faces_.size(); ++f) {
        if (!(z_faces_[f] < z_faces_[f - 1])) {
            throw GeometryError("grid faces must be strictly decreasing");
        }
    }
    for (double zi : layers_.interfaces()) {
        if (std::find(z_faces_.begin(), z_faces_.end(), zi) == z_faces_.end()) {
            throw GeometryError(fmt::format("interface {} is not a grid face", zi));
        }
    }

    const std::size_t nz = z_faces_.size() - 1;
    z_centers_.resize(nz);
    dz_.resize(nz);
    cell_layer_.resize(nz);
    K_c_.resize(nz);
    D_c_.resize(nz);
    for (std::size_t c = 0; c < nz; ++c) {
        dz_[c] = z_faces_[c] - z_faces_[c + 1];
        z_centers_[c] = 0.5 * (z_faces_[c] + z_faces_[c + 1]);
        const std::size_t layer = layers_.layer_at(z_centers_[c]);
        if (z_faces_[c] > layers_.top(layer) || z_faces_[c + 1] < layers_.bottom(layer)) {
            throw GeometryError(fmt::format("cell {} straddles an interface", c));
        }
        cell_layer_[c] = layer;
        K_c_[c] = layers_.permeability()[layer];
        D_c_[c] = layers_.diffusivity()[layer];
    }

    hf_.resize(nz + 1);
    K_f_.resize(nz + 1);
    D_f_.resize(nz + 1);
    hf_[0] = 0.5 * dz_[0];
    hf_[nz] = 0.5 * dz_[nz - 1];
    K_f_[0] = K_c_[0];
    D_f_[0] = D_c_[0];
    K_f_[nz] = K_c_[nz - 1];
    D_f_[nz] = D_c_[nz - 1];
    for (std::size_t f = 1; f < nz; ++f) {
        const double up = 0.5 * dz_[f - 1];
        const double dn = 0.5 * dz_[f];
        hf_[f] = up + dn;
        K_f_[f] = hf_[f] / (up / K_c_[f - 1] + dn / K_c_[f]);
        D_f_[f] = hf_[f] / (up / D_c_[f - 1] + dn / D_c_[f]);
    }
}

double Grid::min_dz() const { return *std::min_element(dz_.begin(), dz_.end()); }
double Grid::max_dz() const { return *std::max_element(dz_.begin(), dz_.end()); }

Grid build_grid(const LayerStack& layers, std::size_t nx, double target_dz, std::size_t cell_budget)
{
    if (!(target_dz > 0.0)) {
        throw GeometryError(fmt::format("target_dz = {} must be positive", target_dz));
    }
    std::vector<double> faces{0.0};
    for (std::size_t i = 0; i < layers.layer_count(); ++i) {
        const double top = layers.top(i);
        const double bottom = layers.bottom(i);
        const double thick = top - bottom;
        // Small slack so that an exact multiple of target_dz does not round up.
        auto n = static_cast<std::size_t>(std::ceil(thick / target_dz * (1.0 - 1e-12)));
        n = std::max<std::size_t>(n, 2);
        if (n * nx > cell_budget) {
            throw GeometryError(fmt::format("layer {} needs {} cells, exceeding the cell budget {}", i, n * nx,
                                            cell_budget));
        }
        const double h = thick / static_cast<double>(n);
        for (std::size_t k = 1; k < n; ++k) {
            faces.push_back(top - h * static_cast<double>(k));
        }
        faces.push_back(bottom);
    }
    const std::size_t total = (faces.size() - 1) * nx;
    if (total > cell_budget) {
        throw GeometryError(fmt::format("grid needs {} cells, exceeding the cell budget {}", total, cell_budget));
    }
    return Grid(layers, nx, std::move(faces));
}

// ---------------------------------------------------------------------------

namespace {

// Two-piece quadratic smoothstep on [0,1] and its derivatives.
double smoothstep(double t) { return t < 0.5 ? 2.0 * t * t : 1.0 - 2.0 * (1.0 - t) * (1.0 - t); }
double smoothstep_d1(double t) { return t < 0.5 ? 4.0 * t : 4.0 * (1.0 - t); }
double smoothstep_d2(double t) { return t < 0.5 ? 4.0 : -4.0; }

}  // namespace

BackgroundProfile::BackgroundProfile(double depth, double delta, double c0, double c_mH)
    : H_(depth), delta_(delta), c0_(c0), c_mH_(c_mH)
{
    if (!(delta_ > 0.0) || !(delta_ < 0.5 * H_)) {
        throw GeometryError(fmt::format("delta = {} must lie in (0, H/2) with H = {}", delta_, H_));
    }
    if (!std::isfinite(c0_) || !std::isfinite(c_mH_)) {
        throw GeometryError("boundary concentrations must be finite");
    }
}

double BackgroundProfile::c_delta() const noexcept { return std::abs(c0_ - c_mH_); }

// Top band: t = -z/delta runs 0 -> 1 from z = 0 down to z = -delta.
// Bottom band: t = (z + H)/delta runs 0 -> 1 from z = -H up to z = -H + delta.
double BackgroundProfile::value(double z) const
{
    const double mid = interior_value();
    if (z > -delta_) {
        return c0_ + (mid - c0_) * smoothstep(-z / delta_);
    }
    if (z < -H_ + delta_) {
        return c_mH_ + (mid - c_mH_) * smoothstep((z + H_) / delta_);
    }
    return mid;
}

double BackgroundProfile::slope(double z) const
{
    const double mid = interior_value();
    if (z > -delta_) {
        return -(mid - c0_) * smoothstep_d1(-z / delta_) / delta_;
    }
    if (z < -H_ + delta_) {
        return (mid - c_mH_) * smoothstep_d1((z + H_) / delta_) / delta_;
    }
    return 0.0;
}

double BackgroundProfile::curvature(double z) const
{
    const double mid = interior_value();
    if (z > -delta_) {
        return (mid - c0_) * smoothstep_d2(-z / delta_) / (delta_ * delta_);
    }
    if (z < -H_ + delta_) {
        return (mid - c_mH_) * smoothstep_d2((z + H_) / delta_) / (delta_ * delta_);
    }
    return 0.0;
}

ProfileSamples BackgroundProfile::sample(const Grid& grid) const
{
    if (std::abs(grid.depth() - H_) > 1e-12 * H_) {
        throw GeometryError("profile depth does not match the grid");
    }
    ProfileSamples s;
    for (double z : grid.z_centers()) {
        s.phi_c.push_back(value(z));
        s.dphi_c.push_back(slope(z));
        s.d2phi_c.push_back(curvature(z));
    }
    for (double z : grid.z_faces()) {
        s.phi_f.push_back(value(z));
        s.dphi_f.push_back(slope(z));
        s.d2phi_f.push_back(curvature(z));
    }
    return s;
}

BackgroundProfile build_profile(const LayerStack& layers, double delta, double c0, double c_mH)
{
    return BackgroundProfile(layers.depth(), delta, c0, c_mH);
}

DeltaAdmissibility check_delta(const LayerStack& layers, const BackgroundProfile& profile)
{
    const double c = profile.c_delta();
    if (c == 0.0) {
        return {profile.delta(), std::numeric_limits<double>::infinity(), true};
    }
    const double kmax = layers.K_max();
    const double dmax = layers.K_min() * layers.D_min() / (8.0 * kmax * kmax * c);
    return {profile.delta(), dmax, profile.delta() <= dmax};
}

}  // namespace thinlayer
