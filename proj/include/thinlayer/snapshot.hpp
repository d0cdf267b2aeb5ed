#pragma once

#include "thinlayer/fields.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace thinlayer {

/// Binary field snapshot. Layout (native little-endian):
///
///   char[8]  magic "TLSNAP01"
///   uint64   nx
///   uint64   nz        number of cells; a face field stores nz + 1 rows
///   float64  L
///   float64  H
///   uint32   stagger   0 = center, 1 = face
///   uint32   flags     bit 0: Dirichlet
///   float64  time
///   float64  values[rows * nx], row-major, top row first
struct Snapshot {
    std::uint64_t nx = 0;
    std::uint64_t nz = 0;
    double period = 0.0;
    double depth = 0.0;
    Stagger stagger = Stagger::Center;
    bool dirichlet = false;
    double time = 0.0;
    std::vector<double> values;
};

void write_snapshot(const std::filesystem::path& path, const ScalarField& field, double time);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Load a snapshot onto `grid`; throws FormatError if the dimensions differ.
ScalarField snapshot_to_field(const Snapshot& snap, const GridPtr& grid);

/// Plain text "x z value" lines for plotting, blank line between rows.
void export_columns(const std::filesystem::path& path, const ScalarField& field);

}  // namespace thinlayer
