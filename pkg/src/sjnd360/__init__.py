"""Spherical JND threshold maps for equirectangular 360 images.

Computes per-coefficient visibility thresholds (planar model, latitude
sample-density lifting, foveation weighting), injects perceptually shaped
noise for model evaluation, and exports per-CU perceptual QP maps.
"""

from .assess import (CalibrationResult, InjectionConfig, calibrate_amplitude,
                     compare_models, inject, psnr, ssim)
from .config import RunConfig, dump_config, load_config, parse_config
from .errors import InputError, SjndError, ValidationError
from .fovea import (FoveaParams, SaliencyField, eccentricity_field,
                    equator_gaussian_prior, fovea_factor, fovea_map, load_saliency)
from .jnd2d import Jnd2dParams, block_entropy, classify_block, jnd2d_map
from .pipeline import SjndStages, compute_sjnd, stage_stats
from .qpexport import QpMap, QpMapConfig, build_qpmap, cu_means, export_qpmap, perceptual_qp
from .raster import (BlockGrid, LumaPlane, ThresholdMap, YuvSpec, load_float_map,
                     load_image, save_image, save_map, tile)
from .sphere import (CurveCoefficients, LatitudeProfile, ViewportSpec,
                     apply_latitude, curve_coefficients, extract_viewport,
                     jnd_lat, latitude_profile, viewport_to_erp)

__version__ = "0.1.0"
