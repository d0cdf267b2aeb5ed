#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace thinlayer {

/// Horizontally periodic strip (0,L) x (-H,0) split into horizontal layers
/// with constant permeability K and diffusivity D. Porosity is normalized
/// to one and not stored.
///
/// Interfaces are listed top to bottom: 0 = z_0 > z_1 > ... > z_l = -H.
/// Layer i (0-based) occupies (z_{i+1}, z_i).
class LayerStack {
public:
    LayerStack(double period, std::vector<double> interfaces, std::vector<double> permeability,
               std::vector<double> diffusivity);

    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] double depth() const noexcept { return -interfaces_.back(); }
    [[nodiscard]] std::size_t layer_count() const noexcept { return K_.size(); }

    [[nodiscard]] const std::vector<double>& interfaces() const noexcept { return interfaces_; }
    [[nodiscard]] const std::vector<double>& permeability() const noexcept { return K_; }
    [[nodiscard]] const std::vector<double>& diffusivity() const noexcept { return D_; }

    [[nodiscard]] double top(std::size_t layer) const { return interfaces_.at(layer); }
    [[nodiscard]] double bottom(std::size_t layer) const { return interfaces_.at(layer + 1); }
    [[nodiscard]] double thickness(std::size_t layer) const { return top(layer) - bottom(layer); }

    /// Layer containing z. A point on an interface belongs to the layer below it,
    /// except z = -H which belongs to the last layer.
    [[nodiscard]] std::size_t layer_at(double z) const;

    [[nodiscard]] double K_at(double z) const { return K_[layer_at(z)]; }
    [[nodiscard]] double D_at(double z) const { return D_[layer_at(z)]; }

    [[nodiscard]] double K_min() const;
    [[nodiscard]] double K_max() const;
    [[nodiscard]] double D_min() const;
    [[nodiscard]] double D_max() const;

    bool operator==(const LayerStack&) const = default;

private:
    double period_;
    std::vector<double> interfaces_;
    std::vector<double> K_;
    std::vector<double> D_;
};

/// One-parameter family of stacks in which layer j-1 of the merged geometry
/// is split into a layer of thickness h - eps on top of a thin layer of
/// thickness eps carrying its own coefficients. `j` is the 1-based number of
/// the thin layer in the split geometry (2 <= j <= base.layer_count() + 1).
class ThinFamily {
public:
    ThinFamily(LayerStack base, int j, double thin_K, double thin_D, std::vector<double> epsilons);

    [[nodiscard]] const LayerStack& base() const noexcept { return base_; }
    [[nodiscard]] int j() const noexcept { return j_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] double thin_K() const noexcept { return thin_K_; }
    [[nodiscard]] double thin_D() const noexcept { return thin_D_; }
    [[nodiscard]] const std::vector<double>& epsilons() const noexcept { return epsilons_; }

    /// Stack for thickness eps. eps == 0 returns the merged base geometry,
    /// with the thin layer removed rather than degenerate.
    [[nodiscard]] LayerStack instantiate(double eps) const;

    /// True when the thin layer carries the same coefficients as layer j-1,
    /// so every member describes the same medium.
    [[nodiscard]] bool is_null() const;

private:
    LayerStack base_;
    int j_;
    double h_;
    double thin_K_;
    double thin_D_;
    std::vector<double> epsilons_;
};

ThinFamily build_family(const LayerStack& base, int j, std::vector<double> epsilons,
                        double thin_K, double thin_D);

/// Interface-conforming tensor grid. x is uniform and periodic with nx
/// nodes; z is split into cells whose faces include every interface. Cells
/// are numbered top to bottom, faces 0..nz with face c on top of cell c.
class Grid {
public:
    Grid(LayerStack layers, std::size_t nx, std::vector<double> z_faces);

    [[nodiscard]] const LayerStack& layers() const noexcept { return layers_; }
    [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
    [[nodiscard]] std::size_t nz() const noexcept { return dz_.size(); }
    [[nodiscard]] double period() const noexcept { return layers_.period(); }
    [[nodiscard]] double depth() const noexcept { return layers_.depth(); }
    [[nodiscard]] double dx() const noexcept { return period() / static_cast<double>(nx_); }
    [[nodiscard]] double x(std::size_t i) const noexcept { return dx() * static_cast<double>(i); }

    [[nodiscard]] std::span<const double> z_faces() const noexcept { return z_faces_; }
    [[nodiscard]] std::span<const double> z_centers() const noexcept { return z_centers_; }
    [[nodiscard]] std::span<const double> dz() const noexcept { return dz_; }
    /// Distance between the centers adjacent to each face; dz/2 on the two
    /// boundary faces. These are the dual-cell widths of the face unknowns.
    [[nodiscard]] std::span<const double> face_spacing() const noexcept { return hf_; }

    [[nodiscard]] std::size_t cell_layer(std::size_t c) const { return cell_layer_.at(c); }
    [[nodiscard]] std::span<const double> K_cell() const noexcept { return K_c_; }
    [[nodiscard]] std::span<const double> D_cell() const noexcept { return D_c_; }
    /// Distance-weighted harmonic means on interior faces, the adjacent cell
    /// value on boundary faces.
    [[nodiscard]] std::span<const double> K_face() const noexcept { return K_f_; }
    [[nodiscard]] std::span<const double> D_face() const noexcept { return D_f_; }

    [[nodiscard]] double min_dz() const;
    [[nodiscard]] double max_dz() const;

private:
    LayerStack layers_;
    std::size_t nx_;
    std::vector<double> z_faces_;
    std::vector<double> z_centers_;
    std::vector<double> dz_;
    std::vector<double> hf_;
    std::vector<std::size_t> cell_layer_;
    std::vector<double> K_c_, D_c_, K_f_, D_f_;
};

inline constexpr std::size_t kDefaultCellBudget = 1'000'000;

/// Uniform spacing <= target_dz inside every layer, at least two cells per
/// layer. Throws GeometryError if nx * nz would exceed cell_budget.
Grid build_grid(const LayerStack& layers, std::size_t nx, double target_dz,
                std::size_t cell_budget = kDefaultCellBudget);

/// Values of the profile and its first two z-derivatives on a grid.
struct ProfileSamples {
    std::vector<double> phi_c, dphi_c, d2phi_c;  // at cell centers
    std::vector<double> phi_f, dphi_f, d2phi_f;  // at faces
};

/// Boundary-layer background profile. Equal to c0 at the top, c_mH at the
/// bottom and to their mean outside two bands of width delta. Each band is a
/// piecewise-quadratic smoothstep, so |phi'| <= c_Delta/delta and
/// |phi''| <= 2 c_Delta/delta^2 with equality at the band centers.
class BackgroundProfile {
public:
    BackgroundProfile(double depth, double delta, double c0, double c_mH);

    [[nodiscard]] double depth() const noexcept { return H_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double c0() const noexcept { return c0_; }
    [[nodiscard]] double c_mH() const noexcept { return c_mH_; }
    [[nodiscard]] double c_delta() const noexcept;
    [[nodiscard]] double interior_value() const noexcept { return 0.5 * (c0_ + c_mH_); }

    [[nodiscard]] double value(double z) const;
    [[nodiscard]] double slope(double z) const;
    [[nodiscard]] double curvature(double z) const;

    [[nodiscard]] ProfileSamples sample(const Grid& grid) const;

    bool operator==(const BackgroundProfile&) const = default;

private:
    double H_;
    double delta_;
    double c0_;
    double c_mH_;
};

BackgroundProfile build_profile(const LayerStack& layers, double delta, double c0, double c_mH);

struct DeltaAdmissibility {
    double delta;
    double delta_max;  ///< +inf when c_Delta == 0
    bool admissible;
};

/// Largest boundary-layer width for which the coupling term is absorbed by
/// diffusion: min K * min D / (8 (max K)^2 c_Delta).
DeltaAdmissibility check_delta(const LayerStack& layers, const BackgroundProfile& profile);

}  // namespace thinlayer
