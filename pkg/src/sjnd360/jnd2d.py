"""Planar per-coefficient JND thresholds.

Each DCT coefficient of each block gets the product of three factors:

  * a spatial-CSF base threshold (frequency- and orientation-dependent),
  * a luminance-adaptation factor from the block's mean luma,
  * a texture-masking factor driven by entropy-based block classification.

Blocks are classed plain / edge / texture by the Shannon entropy of their
gray-level histogram; low-frequency coefficients of plain and texture blocks
skip the coefficient-magnitude masking term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import xform
from .errors import ValidationError
from .raster import DEFAULT_BLOCK_SIZE, BlockGrid, LumaPlane, ThresholdMap, blocks_of, tile

PLAIN, EDGE, TEXTURE = 0, 1, 2
CLASS_NAMES = ("plain", "edge", "texture")

ENTROPY_MODES = ("histogram", "intensity")


@dataclass(frozen=True)
class Jnd2dParams:
    """Constants of the planar model; all overridable via config."""

    block_size: int = DEFAULT_BLOCK_SIZE
    # base-threshold CSF constants
    csf_a: float = 1.33
    csf_b: float = 0.11
    csf_c: float = 0.18
    csf_s: float = 0.25
    csf_r_dir: float = 0.6
    # luminance-adaptation piecewise curve (dark/bright breakpoints and slopes)
    la_dark_break: float = 60.0
    la_dark_scale: float = 150.0
    la_bright_break: float = 170.0
    la_bright_scale: float = 425.0
    # entropy classification thresholds (bits) and per-class masking gains
    t_plain: float = 2.0
    t_texture: float = 4.0
    eps_plain: float = 1.0
    eps_edge: float = 1.0
    eps_texture: float = 2.25
    # intra-band masking term
    masking_exponent: float = 0.36
    masking_cap: float = 4.0
    masking_floor: float = 1.0
    lowfreq_cutoff: float = 16.0  # bound on i^2 + j^2 for the protected band
    # viewing geometry: distance expressed as a multiple of image width
    viewing_distance_ratio: float = 1.5
    # "histogram" = gray-level histogram entropy; "intensity" = literal
    # intensity-mass variant, kept for auditing only
    entropy_mode: str = "histogram"

    def validate(self) -> None:
        if self.block_size < 2:
            raise ValidationError("jnd2d.block_size must be >= 2")
        if not self.t_plain <= self.t_texture:
            raise ValidationError("jnd2d.t_plain must not exceed jnd2d.t_texture")
        if self.masking_cap < self.masking_floor:
            raise ValidationError("jnd2d.masking_cap must be >= masking_floor")
        if self.entropy_mode not in ENTROPY_MODES:
            raise ValidationError(f"jnd2d.entropy_mode must be one of {ENTROPY_MODES}")
        for name in ("csf_a", "csf_b", "csf_c", "csf_s", "csf_r_dir",
                     "la_dark_scale", "la_bright_scale", "viewing_distance_ratio"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"jnd2d.{name} must be positive")


def pixel_angle_deg(width: int, distance_ratio: float) -> float:
    """Visual angle in degrees subtended by one pixel at the given geometry."""
    return math.degrees(math.atan(1.0 / (2.0 * distance_ratio))) / (width / 2.0)


def spatial_frequency(i, j, block_size: int, width: int, distance_ratio: float):
    """Cycles per degree of DCT index (i, j)."""
    omega = pixel_angle_deg(width, distance_ratio)
    return np.sqrt(np.asarray(i, dtype=np.float64) ** 2 + np.asarray(j, dtype=np.float64) ** 2) / (
        2.0 * block_size * omega
    )


def orientation_cos(i, j):
    """|i^2 - j^2| / (i^2 + j^2); 0 at DC by convention."""
    i = np.asarray(i, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    ssum = i * i + j * j
    return np.divide(np.abs(i * i - j * j), ssum, out=np.zeros_like(ssum), where=ssum > 0)


# ---------------------------------------------------------------------------
# entropy and classification

def block_entropy(pixels: np.ndarray, mode: str = "histogram") -> float:
    """Shannon entropy (bits) of one block's gray-level distribution."""
    grid = np.asarray(pixels)[None, None, :, :]
    return float(block_entropy_grid(grid, mode)[0, 0])


def block_entropy_grid(blocks: np.ndarray, mode: str = "histogram") -> np.ndarray:
    """Entropy in bits for a (by, bx, N, N) stack of integer-valued blocks."""
    by, bx, n, _ = blocks.shape
    flat = blocks.reshape(by * bx, n * n).astype(np.int64)
    if flat.size and (flat.min() < 0 or flat.max() > 255):
        raise ValidationError("entropy input must hold 8-bit gray levels")
    if mode == "histogram":
        offsets = np.arange(by * bx, dtype=np.int64)[:, None] * 256
        counts = np.bincount((flat + offsets).ravel(), minlength=by * bx * 256)
        p = counts.reshape(by * bx, 256) / float(n * n)
    elif mode == "intensity":
        totals = flat.sum(axis=1, keepdims=True).astype(np.float64)
        p = np.divide(flat, totals, out=np.zeros(flat.shape, dtype=np.float64),
                      where=totals > 0)
    else:
        raise ValidationError(f"unknown entropy mode: {mode}")
    logs = np.log2(p, out=np.zeros_like(p), where=p > 0)
    return -(p * logs).sum(axis=1).reshape(by, bx)


def classify_block(entropy_bits: float, params: Jnd2dParams) -> int:
    """PLAIN below t_plain, TEXTURE at or above t_texture, EDGE between."""
    if entropy_bits < params.t_plain:
        return PLAIN
    if entropy_bits >= params.t_texture:
        return TEXTURE
    return EDGE


def classify_grid(entropy_bits: np.ndarray, params: Jnd2dParams) -> np.ndarray:
    out = np.full(entropy_bits.shape, EDGE, dtype=np.int8)
    out[entropy_bits < params.t_plain] = PLAIN
    out[entropy_bits >= params.t_texture] = TEXTURE
    return out


# ---------------------------------------------------------------------------
# threshold factors

def base_threshold_table(params: Jnd2dParams, width: int) -> np.ndarray:
    """CSF base thresholds for every (i, j) of an N x N block."""
    n = params.block_size
    idx = np.arange(n, dtype=np.float64)
    i = idx[:, None] * np.ones(n)[None, :]
    j = np.ones(n)[:, None] * idx[None, :]
    f = spatial_frequency(i, j, n, width, params.viewing_distance_ratio)
    cos2 = orientation_cos(i, j) ** 2
    phi = xform.scale_factors(n)
    norm = phi[:, None] * phi[None, :]
    directional = params.csf_r_dir + (1.0 - params.csf_r_dir) * cos2
    return (
        (params.csf_s / norm)
        * np.exp(params.csf_c * f)
        / (params.csf_a + params.csf_b * f)
        / directional
    )


def base_threshold(i: int, j: int, params: Jnd2dParams, width: int) -> float:
    """Base threshold of one coefficient; needs the plane width for geometry."""
    n = params.block_size
    if not (0 <= i < n and 0 <= j < n):
        raise ValidationError(f"coefficient index ({i},{j}) outside block of size {n}")
    return float(base_threshold_table(params, width)[i, j])


def luminance_adaptation(mean_luma, params: Jnd2dParams = Jnd2dParams()):
    """Elevation factor >= 1 for dark/bright blocks, 1 on the mid plateau."""
    m = np.asarray(mean_luma, dtype=np.float64)
    dark = (params.la_dark_break - m) / params.la_dark_scale + 1.0
    bright = (m - params.la_bright_break) / params.la_bright_scale + 1.0
    out = np.where(m <= params.la_dark_break, dark,
                   np.where(m >= params.la_bright_break, bright, 1.0))
    return float(out) if out.ndim == 0 else out


def texture_masking(coeff: float, i: int, j: int, block_class: int,
                    jnd_base: float, alpha_la: float, params: Jnd2dParams) -> float:
    """Masking factor for one coefficient.

    Low-frequency coefficients (i^2+j^2 within the cutoff) of plain and
    texture blocks take the bare class gain; everything else multiplies the
    class gain by the clamped magnitude ratio |C| / (base * la), raised to
    the intra-band exponent.
    """
    eps = (params.eps_plain, params.eps_edge, params.eps_texture)[block_class]
    low_freq = (i * i + j * j) <= params.lowfreq_cutoff
    if low_freq and block_class in (PLAIN, TEXTURE):
        return eps
    ratio = abs(coeff) / (jnd_base * alpha_la)
    term = min(params.masking_cap, max(params.masking_floor,
                                       ratio ** params.masking_exponent))
    return eps * term


def _masking_grid(abs_coeffs: np.ndarray, base: np.ndarray, alpha_la: np.ndarray,
                  classes: np.ndarray, params: Jnd2dParams) -> np.ndarray:
    n = params.block_size
    idx = np.arange(n, dtype=np.float64)
    low_freq = (idx[:, None] ** 2 + idx[None, :] ** 2) <= params.lowfreq_cutoff
    eps_by_class = np.array([params.eps_plain, params.eps_edge, params.eps_texture])
    eps = eps_by_class[classes]  # (by, bx)

    ratio = abs_coeffs / (base[None, None] * alpha_la[:, :, None, None])
    term = np.clip(ratio ** params.masking_exponent,
                   params.masking_floor, params.masking_cap)
    protected = low_freq[None, None] & (classes != EDGE)[:, :, None, None]
    term = np.where(protected, 1.0, term)
    return eps[:, :, None, None] * term


def jnd2d_map(plane: LumaPlane, params: Jnd2dParams = Jnd2dParams(),
              threads: int = 1) -> tuple[ThresholdMap, BlockGrid]:
    """Planar threshold map plus the annotated block grid it was built from."""
    params.validate()
    grid = tile(plane, params.block_size)
    blocks = blocks_of(plane, params.block_size)
    grid.coefficients = xform.forward_dct_grid(blocks, threads)
    grid.entropy = block_entropy_grid(blocks, params.entropy_mode)
    grid.block_class = classify_grid(grid.entropy, params)

    base = base_threshold_table(params, plane.width)
    alpha_la = luminance_adaptation(grid.mean_luma, params)
    alpha_tm = _masking_grid(np.abs(grid.coefficients), base, alpha_la,
                             grid.block_class, params)
    values = base[None, None] * alpha_la[:, :, None, None] * alpha_tm
    return ThresholdMap(values, params.block_size), grid
