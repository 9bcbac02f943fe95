#pragma once

#include <string>

#include "splatkit/gaussian.hpp"
#include "splatkit/mesh.hpp"

namespace splatkit {

/// Gaussian PLY I/O in the community 3DGS attribute layout:
/// x, y, z, f_dc_0..2, opacity, scale_0..2, rot_0..3 (14 float properties).
/// Stored scales are log-space and opacities are logits; load activates them
/// (exp / sigmoid) and normalizes quaternions, save inverts that mapping.
/// Extra properties (nx, f_rest_*, ...) are ignored on load.
GaussianSet load_gaussians_ply(const std::string& path);

/// Binary little-endian output; round-trips through load_gaussians_ply
/// within 1e-6. Throws on an empty set.
void save_gaussians_ply(const GaussianSet& set, const std::string& path, bool binary = true);

/// Mesh I/O. Format picked by extension: .obj or .ply (ASCII or binary LE).
TriMesh load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path, bool binary_ply = true);

} // namespace splatkit
