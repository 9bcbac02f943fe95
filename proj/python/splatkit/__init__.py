"""splatkit: gaussian-splat geometry tooling.

Fourier geometry encoding of body point clouds, software gaussian-splat and
mesh rendering, gaussian-enhanced remeshing, and the usual mesh/image
evaluation metrics, backed by the C++ core.
"""

import importlib

try:
    _core = importlib.import_module("._core", __name__)
except ImportError:
    # development layout: the extension lives in the build tree on PYTHONPATH
    _core = importlib.import_module("_core")

__all__ = [
    "OrthoCamera",
    "SplatkitError",
    "chamfer",
    "densify_surface",
    "f_score",
    "fourier_expand",
    "init_coarse_mesh",
    "load_gaussians_ply",
    "load_mesh",
    "load_png",
    "make_camera_rig",
    "make_look_camera",
    "normal_consistency",
    "plucker_map",
    "project_features",
    "psnr",
    "remesh",
    "render_gaussians",
    "render_mesh",
    "sample_surface",
    "save_gaussians_ply",
    "save_mesh",
    "save_png",
    "set_max_threads",
    "ssim",
]

for _name in __all__:
    globals()[_name] = getattr(_core, _name)

__version__ = "0.1.0"
