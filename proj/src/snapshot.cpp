#include "thinlayer/snapshot.hpp"

#include "thinlayer/errors.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace thinlayer {

namespace {

constexpr std::array<char, 8> kMagic{'T', 'L', 'S', 'N', 'A', 'P', '0', '1'};

template <typename T>
void put(std::ofstream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) {
        throw FormatError("truncated snapshot header");
    }
    return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& field, double time)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError(fmt::format("cannot open {} for writing", path.string()));
    }
    const Grid& g = field.grid();
    out.write(kMagic.data(), kMagic.size());
    put<std::uint64_t>(out, g.nx());
    put<std::uint64_t>(out, g.nz());
    put<double>(out, g.period());
    put<double>(out, g.depth());
    put<std::uint32_t>(out, field.stagger() == Stagger::Center ? 0U : 1U);
    put<std::uint32_t>(out, field.dirichlet() ? 1U : 0U);
    put<double>(out, time);
    const auto& v = field.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) {
        throw FormatError(fmt::format("failed writing {}", path.string()));
    }
}

Snapshot read_snapshot(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(fmt::format("cannot open {}", path.string()));
    }
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw FormatError(fmt::format("{} is not a field snapshot", path.string()));
    }
    Snapshot s;
    s.nx = get<std::uint64_t>(in);
    s.nz = get<std::uint64_t>(in);
    s.period = get<double>(in);
    s.depth = get<double>(in);
    const auto tag = get<std::uint32_t>(in);
    if (tag > 1) {
        throw FormatError(fmt::format("unknown staggering tag {}", tag));
    }
    s.stagger = tag == 0 ? Stagger::Center : Stagger::Face;
    s.dirichlet = (get<std::uint32_t>(in) & 1U) != 0;
    s.time = get<double>(in);
    const std::uint64_t rows = s.stagger == Stagger::Center ? s.nz : s.nz + 1;
    s.values.resize(rows * s.nx);
    in.read(reinterpret_cast<char*>(s.values.data()),
            static_cast<std::streamsize>(s.values.size() * sizeof(double)));
    if (!in) {
        throw FormatError(fmt::format("{}: truncated value block", path.string()));
    }
    return s;
}

ScalarField snapshot_to_field(const Snapshot& snap, const GridPtr& grid)
{
    if (snap.nx != grid->nx() || snap.nz != grid->nz()) {
        throw FormatError(fmt::format("snapshot is {}x{}, grid is {}x{}", snap.nx, snap.nz, grid->nx(), grid->nz()));
    }
    if (std::abs(snap.period - grid->period()) > 1e-12 * grid->period() ||
        std::abs(snap.depth - grid->depth()) > 1e-12 * grid->depth()) {
        throw FormatError("snapshot domain size does not match the grid");
    }
    ScalarField f(grid, snap.stagger, snap.dirichlet);
    f.values() = snap.values;
    return f;
}

void export_columns(const std::filesystem::path& path, const ScalarField& field)
{
    std::ofstream out(path);
    if (!out) {
        throw FormatError(fmt::format("cannot open {} for writing", path.string()));
    }
    const Grid& g = field.grid();
    const auto z = field.stagger() == Stagger::Center ? g.z_centers() : g.z_faces();
    for (std::size_t r = 0; r < field.rows(); ++r) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            out << fmt::format("{:.17g} {:.17g} {:.17g}\n", g.x(i), z[r], field(static_cast<std::ptrdiff_t>(i), r));
        }
        out << '\n';
    }
}

}  // namespace thinlayer
