"""Threshold-shaped noise injection, PSNR/SSIM, and equal-quality calibration.

Noise of magnitude beta * threshold with a random +/-1 sign per coefficient is
added in the DCT domain and reconstructed. Model maps are compared at equal
perceived quality by calibrating beta until SSIM hits a target; a better map
then hides more noise, i.e. shows a lower PSNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import ndimage

from . import xform
from .errors import ValidationError
from .raster import LumaPlane, ThresholdMap, blocks_of, format_number

PSNR_CAP_DB = 99.0  # sentinel for identical images

# xorshift64* constants (Marsaglia shift-register generator, Vigna multiplier)
_XS_MULT = 0x2545F4914F6CDD1D
_XS_SEED_FILL = 0x9E3779B97F4B9B15  # substitute for the invalid all-zero state
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class InjectionConfig:
    beta: float = 1.0
    seed: int = 0
    clamp_output: bool = True

    def validate(self) -> None:
        if self.beta < 0:
            raise ValidationError("injection beta must be non-negative")


class XorShift64Star:
    """Seedable shift-register PRNG; sequence is platform-independent."""

    def __init__(self, seed: int):
        self.state = (int(seed) & _MASK64) or _XS_SEED_FILL

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * _XS_MULT) & _MASK64


def sign_field(shape: tuple[int, ...], seed: int) -> np.ndarray:
    """+/-1 per coefficient, drawn in raster order over (block, i, j)."""
    rng = XorShift64Star(seed)
    total = int(np.prod(shape))
    draws = np.empty(total, dtype=np.float64)
    for k in range(total):
        draws[k] = 1.0 if rng.next_u64() >> 63 else -1.0
    return draws.reshape(shape)


def _as_plane_array(img) -> np.ndarray:
    if isinstance(img, LumaPlane):
        return img.as_float()
    return np.asarray(img, dtype=np.float64)


# ---------------------------------------------------------------------------
# injection

def inject_float(plane: LumaPlane, tmap: ThresholdMap,
                 cfg: InjectionConfig = InjectionConfig(),
                 threads: int = 1,
                 signs: np.ndarray | None = None,
                 coeffs: np.ndarray | None = None) -> np.ndarray:
    """Unquantized reconstruction after DCT-domain noise injection.

    Edge remainders not covered by full blocks pass through unmodified.
    ``signs``/``coeffs`` allow reuse across repeated calls with the same seed
    and plane (the sign sequence is identical either way).
    """
    cfg.validate()
    n = tmap.block_size
    by, bx = tmap.blocks_y, tmap.blocks_x
    if by != plane.height // n or bx != plane.width // n:
        raise ValidationError("threshold map shape does not match the plane tiling")
    if coeffs is None:
        coeffs = xform.forward_dct_grid(blocks_of(plane, n), threads)
    if signs is None:
        signs = sign_field(coeffs.shape, cfg.seed)
    noisy = coeffs + signs * (cfg.beta * tmap.values)
    recon = xform.inverse_dct_grid(noisy, threads)
    out = plane.as_float()
    out[: by * n, : bx * n] = recon.transpose(0, 2, 1, 3).reshape(by * n, bx * n)
    return out


def quantize_plane(samples: np.ndarray, clamp: bool = True) -> LumaPlane:
    """Round to 8 bits; clamp to [0, 255] or reject out-of-range values."""
    rounded = np.rint(samples)
    if clamp:
        rounded = np.clip(rounded, 0, 255)
    elif rounded.min() < 0 or rounded.max() > 255:
        raise ValidationError("reconstruction exceeds 8-bit range and clamping is off")
    return LumaPlane.from_array(rounded.astype(np.uint8))


def inject(plane: LumaPlane, tmap: ThresholdMap,
           cfg: InjectionConfig = InjectionConfig(),
           threads: int = 1) -> LumaPlane:
    """Injected image as written to disk: rounded and (by default) clamped."""
    return quantize_plane(inject_float(plane, tmap, cfg, threads), cfg.clamp_output)


def clamped_fraction(samples: np.ndarray) -> float:
    """Share of samples outside [0, 255] before clamping."""
    return float(np.mean((samples < 0) | (samples > 255)))


# ---------------------------------------------------------------------------
# quality metrics

def mse(reference, test) -> float:
    a = _as_plane_array(reference)
    b = _as_plane_array(test)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(reference, test) -> float:
    """Peak SNR in dB over 8-bit range; identical images report the 99 dB cap."""
    err = mse(reference, test)
    if err == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(255.0 ** 2 / err)


_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_SSIM_L = 255.0


def _ssim_kernel() -> np.ndarray:
    half = (_SSIM_WINDOW - 1) / 2.0
    x = np.arange(_SSIM_WINDOW) - half
    g = np.exp(-(x ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable Gaussian; border margin is cropped so padding never leaks in
    half = (_SSIM_WINDOW - 1) // 2
    out = ndimage.correlate1d(img, kernel, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="nearest")
    return out[half:-half, half:-half]


def ssim(reference, test) -> float:
    """Single-scale luma SSIM, 11x11 Gaussian window sigma=1.5, K=(.01,.03)."""
    a = _as_plane_array(reference)
    b = _as_plane_array(test)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < _SSIM_WINDOW:
        raise ValidationError(f"images must be at least {_SSIM_WINDOW}x{_SSIM_WINDOW} for SSIM")
    k = _ssim_kernel()
    mu1 = _filter_valid(a, k)
    mu2 = _filter_valid(b, k)
    s11 = _filter_valid(a * a, k) - mu1 * mu1
    s22 = _filter_valid(b * b, k) - mu2 * mu2
    s12 = _filter_valid(a * b, k) - mu1 * mu2
    c1 = (_SSIM_K1 * _SSIM_L) ** 2
    c2 = (_SSIM_K2 * _SSIM_L) ** 2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


# ---------------------------------------------------------------------------
# equal-quality calibration

@dataclass(frozen=True)
class CalibrationResult:
    beta: float
    ssim: float
    psnr: float
    iterations: int
    converged: bool


def calibrate_amplitude(plane: LumaPlane, tmap: ThresholdMap,
                        target_ssim: float = 0.975, tol: float = 0.002,
                        seed: int = 0, max_steps: int = 40,
                        threads: int = 1) -> CalibrationResult:
    """Bisect the amplitude until injected SSIM hits the target.

    The +/-1 sign field is generated once from the seed and shared by every
    evaluation, so the result is bit-reproducible for (image, map, seed).
    """
    if not 0.0 < target_ssim <= 1.0:
        raise ValidationError("target SSIM must be in (0, 1]")
    if target_ssim >= 1.0:
        return CalibrationResult(0.0, 1.0, PSNR_CAP_DB, 0, True)
    if float(np.max(np.abs(tmap.values))) == 0.0:
        raise ValidationError("map has no noise capacity: cannot reach the target")

    n = tmap.block_size
    coeffs = xform.forward_dct_grid(blocks_of(plane, n), threads)
    signs = sign_field(coeffs.shape, seed)

    def evaluate(beta: float) -> tuple[float, float]:
        cfg = InjectionConfig(beta=beta, seed=seed)
        out = quantize_plane(
            inject_float(plane, tmap, cfg, threads, signs=signs, coeffs=coeffs)
        )
        return ssim(plane, out), psnr(plane, out)

    steps = 0
    hi = 1.0
    s_hi, p_hi = evaluate(hi)
    steps += 1
    while s_hi > target_ssim and steps < max_steps:
        hi *= 2.0
        s_hi, p_hi = evaluate(hi)
        steps += 1
    if s_hi > target_ssim:
        # even a huge amplitude stays above the target; report best effort
        return CalibrationResult(hi, s_hi, p_hi, steps, False)

    lo = 0.0
    best = (hi, s_hi, p_hi)
    while steps < max_steps:
        if abs(best[1] - target_ssim) <= tol:
            return CalibrationResult(best[0], best[1], best[2], steps, True)
        mid = 0.5 * (lo + hi)
        s_mid, p_mid = evaluate(mid)
        steps += 1
        if abs(s_mid - target_ssim) < abs(best[1] - target_ssim):
            best = (mid, s_mid, p_mid)
        if s_mid > target_ssim:
            lo = mid
        else:
            hi = mid
    converged = abs(best[1] - target_ssim) <= tol
    return CalibrationResult(best[0], best[1], best[2], steps, converged)


@dataclass(frozen=True)
class ModelReportRow:
    model: str
    beta: float
    ssim: float
    psnr: float


def compare_models(plane: LumaPlane, maps: Mapping[str, ThresholdMap],
                   target_ssim: float = 0.975, seed: int = 0,
                   threads: int = 1) -> list[ModelReportRow]:
    """One calibrated injection per named map, all sharing the same seed."""
    if not maps:
        raise ValidationError("compare_models needs at least one map")
    rows = []
    for name, tmap in maps.items():
        res = calibrate_amplitude(plane, tmap, target_ssim, seed=seed,
                                  threads=threads)
        rows.append(ModelReportRow(name, res.beta, res.ssim, res.psnr))
    return rows


def report_csv(rows: list[ModelReportRow]) -> str:
    lines = ["model,beta,ssim,psnr"]
    for r in rows:
        lines.append(f"{r.model},{format_number(r.beta)},"
                     f"{format_number(r.ssim)},{format_number(r.psnr)}")
    return "\n".join(lines) + "\n"
