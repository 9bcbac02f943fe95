#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatkit/remesh.hpp"

namespace splatkit {

/// Full pipeline configuration. Every field has a default; unknown keys in
/// the config file are hard errors.
struct PipelineConfig {
    // paths
    std::string mesh_path;
    std::string splat_path; // when set, remeshing uses it instead of the predicted avatar
    std::string image_path;
    std::string gt_mesh_path;
    std::string out_dir = "out";

    // fourier encoder
    int fourier_order = 4;
    uint64_t fourier_points = 65536;
    int fourier_size = 512;
    int encoder_channels = 8;
    std::string encoder_weights; // optional manifest; seeded init otherwise

    // cameras
    std::string rig = "front3";
    int camera_size = 512;
    double camera_extent = 0.0; // <= 0 -> auto from content bounds

    // texture encoder
    int texture_channels = 8;

    // dual reconstruction network
    std::string net_weights; // optional manifest; seeded init otherwise
    int unet_base_channels = 32;

    // remesh
    int remesh_views = 8;
    int remesh_size = 512;
    int remesh_iterations = 200;
    double remesh_step_size = 1.0;
    double lambda_normal = 1.0;
    double lambda_mask = 1.0;
    double lambda_lap = 1.0;
    int grid_res = 64;
    double iso_level = -1.0;
    double stop_tol = 0.0;
    double sigma_edge = 1.0;

    // metrics
    double metric_tau = 1.0;
    uint64_t metric_samples = 100000;

    std::string log_level = "info";
    int threads = 0;
    uint64_t seed = 0;
};

/// Parses the commented-JSON config file; unknown keys raise ConfigError
/// naming the key.
PipelineConfig load_pipeline_config(const std::string& path);

/// Runs the configured stages in dependency order, writing artifacts and
/// per-stage manifests under out_dir. Completed stages with unchanged
/// inputs are skipped. Returns 0 on success, a per-stage exit code
/// otherwise.
int run_pipeline(const PipelineConfig& config);

/// FNV-1a 64 content hash, as a hex string; used for stage cache keys.
std::string hash_file(const std::string& path);
std::string hash_string(const std::string& data);

} // namespace splatkit
