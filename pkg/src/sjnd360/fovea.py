"""Saliency ingestion, retinal eccentricity, and foveation weighting.

Eccentricity of a pixel is the visual angle to the nearest salient pixel,
measured on the ERP analysis plane with a pixel-to-degree conversion derived
from the viewport geometry. Coefficients of blocks far from the salient
region get their thresholds raised by ln(eccentricity); DC coefficients and
everything inside / near the salient region keep weight 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InputError, ValidationError
from .raster import BlockGrid, LumaPlane, load_float_map, load_image
from .sphere import ViewportSpec, project_viewport_field_to_erp

EQUATOR_PRIOR = "equator-gaussian"


@dataclass(frozen=True)
class FoveaParams:
    chi: float = 0.106           # CSF eccentricity gain
    e1: float = 2.3              # CSF eccentricity half-saturation, degrees
    r_dir: float = 0.6           # obliqueness constant of the directional CSF
    s_thresh: float = 0.5        # salience threshold after max-normalization
    tau_knee: float = 2.7        # eccentricity (degrees) where ln weighting starts
    viewing_distance_ratio: float = 1.5
    fov_degrees: float = 120.0
    view_width: int = 0          # analysis-plane pixels spanned by the FOV; 0 = auto

    def validate(self) -> None:
        if not self.chi > 0 or not self.e1 > 0:
            raise ValidationError("fovea.chi and fovea.e1 must be positive")
        if not 0.0 < self.s_thresh < 1.0:
            raise ValidationError("fovea.s_thresh must be in (0, 1)")
        if not self.tau_knee > 1.0:
            raise ValidationError("fovea.tau_knee must exceed 1")
        if not 0.0 < self.fov_degrees < 180.0:
            raise ValidationError("fovea.fov_degrees must be in (0, 180)")


@dataclass
class SaliencyField:
    """Per-pixel salience in [0,1], its binary region, and eccentricity."""

    salience: np.ndarray                     # (H, W) float64 in [0, 1]
    mask: np.ndarray                         # (H, W) bool, salience >= threshold
    eccentricity_deg: np.ndarray | None = None


def view_distance_pixels(width: int, params: FoveaParams) -> float:
    """Projection distance in plane pixels implied by the FOV.

    With the default auto view width (the ERP span of the FOV), a pixel at
    the edge of the field sits at fov/2 visual degrees.
    """
    span = params.view_width if params.view_width > 0 else width * params.fov_degrees / 360.0
    return (span / 2.0) / math.tan(math.radians(params.fov_degrees) / 2.0)


def saliency_from_array(salience: np.ndarray, params: FoveaParams) -> SaliencyField:
    """Max-normalize a raw salience array and threshold the salient region."""
    s = np.asarray(salience, dtype=np.float64)
    if s.ndim != 2:
        raise ValidationError("saliency map must be 2-D")
    if not np.isfinite(s).all() or s.min() < 0:
        raise ValidationError("saliency map must be finite and non-negative")
    peak = s.max()
    if peak <= 0:
        raise ValidationError("all-zero saliency map: no salient region derivable")
    s = s / peak
    return SaliencyField(salience=s, mask=s >= params.s_thresh)


def load_saliency(path, plane_dims: tuple[int, int],
                  params: FoveaParams = FoveaParams()) -> SaliencyField:
    """Read a PGM/PNG/float-binary saliency map matching (height, width)."""
    from pathlib import Path

    suffix = Path(path).suffix.lower()
    if suffix in (".pgm", ".png"):
        arr = load_image(path).as_float()
    else:
        arr = np.asarray(load_float_map(path), dtype=np.float64)
    if arr.shape != tuple(plane_dims):
        raise ValidationError(
            f"saliency dimensions {arr.shape} do not match plane {tuple(plane_dims)}"
        )
    return saliency_from_array(arr, params)


def equator_gaussian_prior(width: int, height: int,
                           params: FoveaParams = FoveaParams(),
                           viewport: ViewportSpec | None = None) -> SaliencyField:
    """Analytic attention prior: vertical Gaussian on the equator.

    When a viewport is given, a horizontal Gaussian centered on its yaw
    multiplies in, localizing attention around the view direction.
    """
    rows = np.arange(height, dtype=np.float64)
    sigma_y = height / 6.0
    vert = np.exp(-((rows - (height - 1) / 2.0) ** 2) / (2.0 * sigma_y ** 2))
    sal = np.repeat(vert[:, None], width, axis=1)
    if viewport is not None:
        cols = np.arange(width, dtype=np.float64)
        center = (viewport.yaw + 180.0) / 360.0 * width - 0.5
        delta = np.abs(cols - center)
        delta = np.minimum(delta, width - delta)  # wrap-around distance
        sigma_x = width / 6.0
        sal = sal * np.exp(-(delta ** 2) / (2.0 * sigma_x ** 2))[None, :]
    return saliency_from_array(sal, params)


def saliency_from_viewport(vp_salience: np.ndarray, spec: ViewportSpec,
                           width: int, height: int,
                           params: FoveaParams = FoveaParams()) -> SaliencyField:
    """Project a viewport-space salience map back onto the ERP plane."""
    erp = project_viewport_field_to_erp(vp_salience, spec, width, height)
    return saliency_from_array(erp, params)


def resolve_saliency(source, width: int, height: int,
                     params: FoveaParams = FoveaParams(),
                     viewport: ViewportSpec | None = None) -> SaliencyField:
    """Accept a SaliencyField, a file path, or the equator prior name."""
    if isinstance(source, SaliencyField):
        return source
    if source is None or source == EQUATOR_PRIOR:
        return equator_gaussian_prior(width, height, params, viewport)
    return load_saliency(source, (height, width), params)


# ---------------------------------------------------------------------------
# eccentricity

def eccentricity_field(field: SaliencyField, params: FoveaParams) -> np.ndarray:
    """Degrees of visual angle to the nearest salient pixel, per pixel.

    Exact nearest-pixel Euclidean distances (via the distance transform's
    feature indices) feed arctan(dist / v); results are cached on the field.
    """
    mask = field.mask
    if not mask.any():
        raise ValidationError("empty salient mask: eccentricity undefined")
    h, w = mask.shape
    if mask.all():
        tau = np.zeros((h, w))
    else:
        idx = ndimage.distance_transform_edt(~mask, return_distances=False,
                                             return_indices=True)
        rows = np.arange(h, dtype=np.int64)[:, None]
        cols = np.arange(w, dtype=np.int64)[None, :]
        d2 = (idx[0] - rows) ** 2 + (idx[1] - cols) ** 2
        v = view_distance_pixels(w, params)
        tau = np.degrees(np.arctan(np.sqrt(d2.astype(np.float64)) / v))
    field.eccentricity_deg = tau
    return tau


# ---------------------------------------------------------------------------
# contrast sensitivity diagnostics

def csf_threshold(freq, tau, params: FoveaParams = FoveaParams()):
    """Contrast threshold (1/64) * exp(chi * f * (tau + e1) / e1)."""
    f = np.asarray(freq, dtype=np.float64)
    t = np.asarray(tau, dtype=np.float64)
    out = (1.0 / 64.0) * np.exp(params.chi * f * (t + params.e1) / params.e1)
    return float(out) if out.ndim == 0 else out


def csf_directional(i, j, tau, params: FoveaParams = FoveaParams(),
                    block_size: int = 8, width: int = 2048):
    """Orientation-corrected contrast threshold for DCT index (i, j)."""
    from .jnd2d import orientation_cos, spatial_frequency

    f = spatial_frequency(i, j, block_size, width, params.viewing_distance_ratio)
    cos2 = orientation_cos(i, j) ** 2
    t = np.asarray(tau, dtype=np.float64)
    out = ((1.0 / 64.0) / (params.r_dir + (1.0 - params.r_dir) * cos2)
           * np.exp(params.chi * f * (params.e1 + t) / params.e1))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# foveation weighting

def fovea_factor(tau, is_dc, params: FoveaParams = FoveaParams()):
    """ln(tau) beyond the knee for AC coefficients, otherwise 1."""
    t = np.asarray(tau, dtype=np.float64)
    dc = np.asarray(is_dc, dtype=bool)
    apply = (~dc) & (t >= params.tau_knee)
    logs = np.log(t, out=np.ones_like(t), where=t >= params.tau_knee)
    out = np.where(apply, logs, 1.0)
    return float(out) if out.ndim == 0 else out


def fovea_map(grid: BlockGrid, saliency: SaliencyField,
              params: FoveaParams = FoveaParams()) -> np.ndarray:
    """Per-coefficient foveation weights (by, bx, N, N); DC plane is all 1."""
    if saliency.eccentricity_deg is None:
        eccentricity_field(saliency, params)
    ecc = saliency.eccentricity_deg
    n = grid.block_size
    h, w = ecc.shape
    if grid.blocks_y * n > h or grid.blocks_x * n > w:
        raise ValidationError("saliency field does not cover the block grid")
    crows = np.minimum(np.arange(grid.blocks_y) * n + n // 2, h - 1)
    ccols = np.minimum(np.arange(grid.blocks_x) * n + n // 2, w - 1)
    tau_block = ecc[np.ix_(crows, ccols)]  # (by, bx)
    weight = fovea_factor(tau_block, False, params)
    out = np.repeat(np.repeat(weight[:, :, None, None], n, axis=2), n, axis=3)
    out[:, :, 0, 0] = 1.0
    return out
