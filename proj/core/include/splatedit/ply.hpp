#pragma once

#include "splatedit/scene.hpp"

#include <filesystem>

namespace splatedit {

/// Reads a binary little-endian PLY in the layout written by the reference
/// Gaussian splatting exporter: x y z [nx ny nz] f_dc_0..2 f_rest_* opacity
/// scale_0..2 rot_0..3. Property order is free; unknown scalar properties
/// are skipped. The SH degree follows from the number of f_rest_* fields.
///
/// Throws FormatError on a malformed header (naming the missing field) and
/// DataError with the vertex index on non-finite values.
GaussianScene load_ply(const std::filesystem::path& path);

/// Writes the canonical layout (see docs/ply_format.md). Normals are written
/// as zeros. Throws IoError if the file cannot be written.
void save_ply(const GaussianScene& scene, const std::filesystem::path& path);

}  // namespace splatedit
