#include "thinlayer/fields.hpp"

#include "thinlayer/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace thinlayer {

namespace {

// One real-to-complex plan pair per transform length. FFTW planning is not
// thread-safe, execution on caller-provided arrays is.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n)
    {
        std::vector<double> in(n);
        std::vector<std::complex<double>> out(n / 2 + 1);
        const int len = static_cast<int>(n);
        forward_ = fftw_plan_dft_r2c_1d(len, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
        inverse_ = fftw_plan_dft_c2r_1d(len, reinterpret_cast<fftw_complex*>(out.data()), in.data(),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft()
    {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }

    void forward(const double* in, std::complex<double>* out) const
    {
        fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    }

    // c2r overwrites its input, so the caller passes scratch.
    void inverse(std::complex<double>* scratch, double* out) const
    {
        fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(scratch), out);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_;
    fftw_plan forward_;
    fftw_plan inverse_;
};

const RealFft& real_fft(std::size_t n)
{
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<RealFft>(n);
    }
    return *slot;
}

std::size_t rows_for(const Grid& g, Stagger s) { return s == Stagger::Center ? g.nz() : g.nz() + 1; }

void require_same(const ScalarField& a, const ScalarField& b)
{
    if (!a.same_layout(b)) {
        throw FieldError("field layouts differ");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid, Stagger stagger, bool dirichlet)
    : grid_(std::move(grid)), stagger_(stagger), dirichlet_(dirichlet)
{
    if (!grid_) {
        throw FieldError("field needs a grid");
    }
    nx_ = grid_->nx();
    rows_ = rows_for(*grid_, stagger_);
    data_.assign(nx_ * rows_, 0.0);
}

void ScalarField::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool ScalarField::same_layout(const ScalarField& other) const noexcept
{
    return grid_ && other.grid_ && (grid_ == other.grid_ || (grid_->nx() == other.grid_->nx() &&
                                                             grid_->nz() == other.grid_->nz())) &&
           stagger_ == other.stagger_;
}

ScalarField& ScalarField::operator+=(const ScalarField& other)
{
    require_same(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other)
{
    require_same(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= other.data_[k];
    }
    return *this;
}

ScalarField& ScalarField::operator*=(double a)
{
    for (double& v : data_) {
        v *= a;
    }
    return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& other)
{
    require_same(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += a * other.data_[k];
    }
    return *this;
}

double ScalarField::max_abs() const
{
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool ScalarField::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }

VectorField::VectorField(const GridPtr& grid) : ux(grid, Stagger::Center), uz(grid, Stagger::Face) {}

double VectorField::max_abs() const { return std::max(ux.max_abs(), uz.max_abs()); }

// ---------------------------------------------------------------------------

SpectralSlice::SpectralSlice(std::size_t nx, std::size_t rows, double period)
    : nx_(nx), rows_(rows), period_(period), data_(rows * (nx / 2 + 1))
{
}

double SpectralSlice::wavenumber(std::size_t m) const noexcept
{
    return 2.0 * std::numbers::pi * static_cast<double>(m) / period_;
}

double SpectralSlice::weight(std::size_t m) const noexcept { return (m == 0 || 2 * m == nx_) ? 1.0 : 2.0; }

double derivative_wavenumber(std::size_t m, std::size_t nx, double period) noexcept
{
    if (2 * m == nx) {
        return 0.0;
    }
    return 2.0 * std::numbers::pi * static_cast<double>(m) / period;
}

SpectralSlice ft_forward(const ScalarField& f)
{
    const std::size_t nx = f.nx();
    SpectralSlice s(nx, f.rows(), f.grid().period());
    const RealFft& fft = real_fft(nx);
    const double scale = 1.0 / static_cast<double>(nx);
    for (std::size_t r = 0; r < f.rows(); ++r) {
        auto out = s.row(r);
        fft.forward(f.row(r).data(), out.data());
        for (auto& c : out) {
            c *= scale;
        }
    }
    return s;
}

void ft_inverse_into(const SpectralSlice& s, ScalarField& out)
{
    if (s.nx() != out.nx() || s.rows() != out.rows()) {
        throw FieldError("spectral slice does not match the output layout");
    }
    const RealFft& fft = real_fft(s.nx());
    std::vector<std::complex<double>> scratch(s.modes());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        auto in = s.row(r);
        std::copy(in.begin(), in.end(), scratch.begin());
        // A real field has real m = 0 and Nyquist amplitudes.
        scratch.front().imag(0.0);
        scratch.back().imag(0.0);
        fft.inverse(scratch.data(), out.row(r).data());
    }
}

ScalarField ft_inverse(const SpectralSlice& s, const GridPtr& grid, Stagger stagger, bool dirichlet)
{
    ScalarField out(grid, stagger, dirichlet);
    ft_inverse_into(s, out);
    return out;
}

ScalarField ddx(const ScalarField& f)
{
    SpectralSlice s = ft_forward(f);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        auto row = s.row(r);
        for (std::size_t m = 0; m < s.modes(); ++m) {
            row[m] *= std::complex<double>(0.0, derivative_wavenumber(m, s.nx(), s.period()));
        }
    }
    return ft_inverse(s, f.grid_ptr(), f.stagger(), f.dirichlet());
}

ScalarField divergence(const VectorField& u)
{
    if (u.ux.stagger() != Stagger::Center || u.uz.stagger() != Stagger::Face) {
        throw FieldError("divergence expects u_x at centers and u_z at faces");
    }
    ScalarField div = ddx(u.ux);
    const Grid& g = u.ux.grid();
    const auto dz = g.dz();
    for (std::size_t c = 0; c < g.nz(); ++c) {
        auto out = div.row(c);
        auto top = u.uz.row(c);
        auto bottom = u.uz.row(c + 1);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out[i] += (top[i] - bottom[i]) / dz[c];
        }
    }
    return div;
}

ScalarField center_to_face(const ScalarField& f)
{
    if (f.stagger() != Stagger::Center) {
        throw FieldError("center_to_face expects a center field");
    }
    const Grid& g = f.grid();
    const std::size_t nz = g.nz();
    const auto dz = g.dz();
    const auto hf = g.face_spacing();
    ScalarField out(f.grid_ptr(), Stagger::Face, f.dirichlet());
    for (std::size_t face = 1; face < nz; ++face) {
        const double w_up = 0.5 * dz[face] / hf[face];  // weight of the cell above
        const double w_dn = 0.5 * dz[face - 1] / hf[face];
        auto up = f.row(face - 1);
        auto dn = f.row(face);
        auto o = out.row(face);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            o[i] = w_up * up[i] + w_dn * dn[i];
        }
    }
    if (!f.dirichlet()) {
        std::ranges::copy(f.row(0), out.row(0).begin());
        std::ranges::copy(f.row(nz - 1), out.row(nz).begin());
    }
    return out;
}

ScalarField face_to_center(const ScalarField& f)
{
    if (f.stagger() != Stagger::Face) {
        throw FieldError("face_to_center expects a face field");
    }
    const Grid& g = f.grid();
    ScalarField out(f.grid_ptr(), Stagger::Center, false);
    for (std::size_t c = 0; c < g.nz(); ++c) {
        auto top = f.row(c);
        auto bottom = f.row(c + 1);
        auto o = out.row(c);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            o[i] = 0.5 * (top[i] + bottom[i]);
        }
    }
    return out;
}

namespace {

// D dpsi/dz on every face of a Dirichlet center field, boundary faces
// included (psi = 0 on the boundary).
ScalarField diffusive_flux(const ScalarField& psi)
{
    const Grid& g = psi.grid();
    const std::size_t nz = g.nz();
    const auto hf = g.face_spacing();
    const auto Df = g.D_face();
    ScalarField flux(psi.grid_ptr(), Stagger::Face, false);
    for (std::size_t face = 0; face <= nz; ++face) {
        auto o = flux.row(face);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double up = face == 0 ? 0.0 : psi(static_cast<std::ptrdiff_t>(i), face - 1);
            const double dn = face == nz ? 0.0 : psi(static_cast<std::ptrdiff_t>(i), face);
            o[i] = Df[face] * (up - dn) / hf[face];
        }
    }
    return flux;
}

}  // namespace

ScalarField apply_diffusion_operator(const ScalarField& psi)
{
    if (psi.stagger() != Stagger::Center || !psi.dirichlet()) {
        throw FieldError("diffusion operator expects a Dirichlet center field");
    }
    const Grid& g = psi.grid();
    const auto Dc = g.D_cell();
    const auto dz = g.dz();

    SpectralSlice s = ft_forward(psi);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        auto row = s.row(r);
        for (std::size_t m = 0; m < s.modes(); ++m) {
            const double k = s.wavenumber(m);
            row[m] *= Dc[r] * k * k;
        }
    }
    ScalarField out = ft_inverse(s, psi.grid_ptr(), Stagger::Center, false);

    const ScalarField flux = diffusive_flux(psi);
    for (std::size_t c = 0; c < g.nz(); ++c) {
        auto o = out.row(c);
        auto top = flux.row(c);
        auto bottom = flux.row(c + 1);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            o[i] -= (top[i] - bottom[i]) / dz[c];
        }
    }
    return out;
}

double inner(const ScalarField& a, const ScalarField& b)
{
    require_same(a, b);
    const Grid& g = a.grid();
    const auto w = a.stagger() == Stagger::Center ? g.dz() : g.face_spacing();
    double total = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto ra = a.row(r);
        auto rb = b.row(r);
        double s = 0.0;
        for (std::size_t i = 0; i < a.nx(); ++i) {
            s += ra[i] * rb[i];
        }
        total += w[r] * s;
    }
    return total * g.dx();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

NormSet norms(const ScalarField& psi)
{
    if (psi.stagger() != Stagger::Center) {
        throw FieldError("norms expect a center field");
    }
    const Grid& g = psi.grid();
    const auto dz = g.dz();
    const auto Dc = g.D_cell();
    const auto hf = g.face_spacing();
    const auto Df = g.D_face();

    NormSet n;
    n.l2 = l2_norm(psi);

    // x-gradient via Parseval: sum_i dx |d_x psi|^2 = L sum_m w_m k_m^2 |psi_m|^2.
    const SpectralSlice s = ft_forward(psi);
    double gx = 0.0;
    double gx_D = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double row_sum = 0.0;
        for (std::size_t m = 0; m < s.modes(); ++m) {
            const double k = s.wavenumber(m);
            row_sum += s.weight(m) * k * k * std::norm(s(r, m));
        }
        gx += dz[r] * row_sum;
        gx_D += dz[r] * Dc[r] * row_sum;
    }
    gx *= g.period();
    gx_D *= g.period();

    double gz = 0.0;
    double gz_D = 0.0;
    const std::size_t nz = g.nz();
    for (std::size_t face = 0; face <= nz; ++face) {
        double row_sum = 0.0;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            const double up = face == 0 ? 0.0 : psi(ii, face - 1);
            const double dn = face == nz ? 0.0 : psi(ii, face);
            const double d = (up - dn) / hf[face];
            row_sum += d * d;
        }
        gz += hf[face] * row_sum;
        gz_D += hf[face] * Df[face] * row_sum;
    }
    gz *= g.dx();
    gz_D *= g.dx();

    n.grad = std::sqrt(gx + gz);
    n.grad_D = std::sqrt(gx_D + gz_D);
    if (psi.dirichlet()) {
        n.L_op = l2_norm(apply_diffusion_operator(psi));
    } else {
        ScalarField tagged(psi.grid_ptr(), Stagger::Center, true);
        tagged.values() = psi.values();
        n.L_op = l2_norm(apply_diffusion_operator(tagged));
    }
    return n;
}

double gradient_norm_neumann(const ScalarField& p)
{
    if (p.stagger() != Stagger::Center) {
        throw FieldError("pressure gradient norm expects a center field");
    }
    const Grid& g = p.grid();
    const ScalarField px = ddx(p);
    double total = inner(px, px);
    const auto hf = g.face_spacing();
    double gz = 0.0;
    for (std::size_t face = 1; face < g.nz(); ++face) {
        auto up = p.row(face - 1);
        auto dn = p.row(face);
        double row_sum = 0.0;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double d = (up[i] - dn[i]) / hf[face];
            row_sum += d * d;
        }
        gz += hf[face] * row_sum;
    }
    total += gz * g.dx();
    return std::sqrt(total);
}

double l2_norm(const VectorField& u) { return std::sqrt(inner(u.ux, u.ux) + inner(u.uz, u.uz)); }

}  // namespace thinlayer
