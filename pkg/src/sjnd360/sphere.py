"""Equirectangular latitude geometry and viewport projection.

An ERP frame of width W maps a sphere whose perimeter equals W, so the sphere
radius is W / 2pi. Each pixel row h sits at ring angle
eta = (h - H/2 + 1/2) * pi / H; the ring holds round(W * cos(eta)) ideal
samples, and the oversampling ratio x = W / M grows from 1 at the equator
toward the poles (capped to keep the pole rows finite).

Planar thresholds are lifted to latitude-aware ones through a cluster of
power-law curves a*x^b + c whose coefficients are affine in the planar
threshold value; x = 1 recovers the planar threshold to within half a
percent over the working range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .raster import LumaPlane, ThresholdMap

CURVE_MODES = ("forward", "normalize")


@dataclass(frozen=True)
class SphereParams:
    x_max: float = 1024.0       # density-ratio cap near the poles
    curve_mode: str = "forward"
    lat_floor: float = 1e-6     # keeps lifted thresholds positive

    def validate(self) -> None:
        if self.x_max < 1.0:
            raise ValidationError("sphere.x_max must be >= 1")
        if self.curve_mode not in CURVE_MODES:
            raise ValidationError(f"sphere.curve_mode must be one of {CURVE_MODES}")


@dataclass(frozen=True)
class LatitudeProfile:
    """Per-row ring geometry of an ERP frame."""

    width: int
    height: int
    radius: float           # sphere radius in sample units, W / 2pi
    eta: np.ndarray         # (H,) ring angle, radians
    ring_radius: np.ndarray  # (H,) R = radius * cos(eta)
    samples: np.ndarray     # (H,) ideal ring sample count M, >= 1
    density: np.ndarray     # (H,) x = W / M, capped at x_max
    x_max: float

    def density_at(self, row):
        """Density ratio at a (possibly fractional) row coordinate."""
        return _density(self.width, self.height, np.asarray(row, dtype=np.float64),
                        self.x_max)


def _density(width: int, height: int, row, x_max: float):
    eta = (row - height / 2.0 + 0.5) * math.pi / height
    m = np.maximum(np.rint(width * np.cos(eta)), 1.0)
    return np.minimum(width / m, x_max)


def latitude_profile(width: int, height: int, x_max: float = 1024.0) -> LatitudeProfile:
    """Ring geometry for every pixel row; requires full-ERP 2:1 aspect."""
    if width != 2 * height:
        raise ValidationError(f"latitude profile needs W == 2H, got {width}x{height}")
    rows = np.arange(height, dtype=np.float64)
    eta = (rows - height / 2.0 + 0.5) * math.pi / height
    radius = width / (2.0 * math.pi)
    ring_radius = radius * np.cos(eta)
    samples = np.maximum(np.rint(2.0 * math.pi * ring_radius), 1.0)
    density = np.minimum(width / samples, x_max)
    return LatitudeProfile(width, height, radius, eta, ring_radius, samples,
                           density, x_max)


# ---------------------------------------------------------------------------
# latitude curve cluster

@dataclass(frozen=True)
class CurveCoefficients:
    a: float | np.ndarray
    b: float | np.ndarray
    c: float | np.ndarray


def curve_coefficients(jnd2d_value) -> CurveCoefficients:
    """Power-law curve coefficients, affine in the planar threshold."""
    j = np.asarray(jnd2d_value, dtype=np.float64)
    a = 0.13 * j - 0.11
    b = 0.034 * j + 0.27
    c = 0.86 * j + 0.21
    if j.ndim == 0:
        return CurveCoefficients(float(a), float(b), float(c))
    return CurveCoefficients(a, b, c)


def jnd_lat(jnd2d_value, x, mode: str = "forward"):
    """Latitude-adjusted threshold at density ratio x.

    "forward" evaluates the curve for the given planar threshold at x.
    "normalize" is the inverse reading: find the curve passing through
    (x, value) and report its height at x = 1.
    """
    if mode == "forward":
        cc = curve_coefficients(jnd2d_value)
        return cc.a * np.power(x, cc.b) + cc.c
    if mode == "normalize":
        return _normalize_to_equator(np.asarray(jnd2d_value, dtype=np.float64),
                                     np.asarray(x, dtype=np.float64))
    raise ValidationError(f"unknown curve mode: {mode}")


def _normalize_to_equator(value: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Solve g(t) = a(t) x^b(t) + c(t) - value = 0 for t, then evaluate at x=1.
    # g is increasing in t for x >= 1, so plain bisection converges.
    def g(t):
        return (0.13 * t - 0.11) * np.power(x, 0.034 * t + 0.27) + 0.86 * t + 0.21 - value

    lo = np.zeros(np.broadcast(value, x).shape)
    hi = np.maximum(np.broadcast_to(value, lo.shape).copy(), 1.0)
    for _ in range(64):
        bad = g(hi) < 0
        if not bad.any():
            break
        hi = np.where(bad, hi * 2.0, hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = g(mid) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t = 0.5 * (lo + hi)
    out = (0.13 * t - 0.11) + 0.86 * t + 0.21
    return out if out.ndim else float(out)


def apply_latitude(map2d: ThresholdMap, profile: LatitudeProfile,
                   mode: str = "forward", floor: float = 1e-6) -> ThresholdMap:
    """Lift a planar map row-band by row-band using each block's density ratio.

    Each block uses the density at its geometric center row, which keeps a
    vertically mirrored input exactly mirrored in the output.
    """
    n = map2d.block_size
    by = map2d.blocks_y
    if by * n > profile.height or map2d.blocks_x * n > profile.width:
        raise ValidationError("threshold map does not fit the latitude profile")
    centers = np.arange(by, dtype=np.float64) * n + (n - 1) / 2.0
    x = profile.density_at(centers)  # (by,)
    lifted = jnd_lat(map2d.values, x[:, None, None, None], mode)
    return ThresholdMap(np.maximum(lifted, floor), n)


# ---------------------------------------------------------------------------
# viewport projection

@dataclass(frozen=True)
class ViewportSpec:
    """Gnomonic view direction and raster size; angles in degrees."""

    yaw: float = 0.0     # [-180, 180]
    pitch: float = 0.0   # [-90, 90]
    roll: float = 0.0    # [-90, 90]
    fov: float = 120.0   # horizontal field of view, (0, 180)
    out_width: int = 960
    out_height: int = 960

    def validate(self) -> None:
        if not -180.0 <= self.yaw <= 180.0:
            raise ValidationError("viewport yaw must be in [-180, 180]")
        if not -90.0 <= self.pitch <= 90.0:
            raise ValidationError("viewport pitch must be in [-90, 90]")
        if not -90.0 <= self.roll <= 90.0:
            raise ValidationError("viewport roll must be in [-90, 90]")
        if not 0.0 < self.fov < 180.0:
            raise ValidationError("viewport fov must be in (0, 180)")
        if self.out_width < 1 or self.out_height < 1:
            raise ValidationError("viewport output size must be positive")

    def half_extents(self) -> tuple[float, float]:
        half_h = math.tan(math.radians(self.fov) / 2.0)
        return half_h, half_h * self.out_height / self.out_width


def rotation_matrix(spec: ViewportSpec) -> np.ndarray:
    """Camera-to-world rotation: roll about forward, then pitch up, then yaw."""
    y, p, r = (math.radians(spec.yaw), math.radians(spec.pitch),
               math.radians(spec.roll))
    ry = np.array([[math.cos(y), 0.0, math.sin(y)],
                   [0.0, 1.0, 0.0],
                   [-math.sin(y), 0.0, math.cos(y)]])
    rx = np.array([[1.0, 0.0, 0.0],
                   [0.0, math.cos(p), math.sin(p)],
                   [0.0, -math.sin(p), math.cos(p)]])
    rz = np.array([[math.cos(r), -math.sin(r), 0.0],
                   [math.sin(r), math.cos(r), 0.0],
                   [0.0, 0.0, 1.0]])
    return ry @ rx @ rz


def _lonlat_to_erp(lon, lat, width: int, height: int):
    col = (lon / (2.0 * math.pi) + 0.5) * width - 0.5
    row = (0.5 - lat / math.pi) * height - 0.5
    return col, row


def _erp_to_lonlat(col, row, width: int, height: int):
    lon = ((np.asarray(col, dtype=np.float64) + 0.5) / width - 0.5) * 2.0 * math.pi
    lat = (0.5 - (np.asarray(row, dtype=np.float64) + 0.5) / height) * math.pi
    return lon, lat


def extract_viewport(plane: LumaPlane, spec: ViewportSpec) -> LumaPlane:
    """Rectilinear view of an ERP frame, bilinear with longitudinal wrap."""
    spec.validate()
    if not plane.is_erp():
        raise ValidationError("viewport extraction needs a full ERP plane (W == 2H)")
    half_h, half_v = spec.half_extents()
    u = ((np.arange(spec.out_width) + 0.5) / spec.out_width * 2.0 - 1.0) * half_h
    v = -((np.arange(spec.out_height) + 0.5) / spec.out_height * 2.0 - 1.0) * half_v
    xc, yc = np.meshgrid(u, v)
    zc = np.ones_like(xc)
    m = rotation_matrix(spec)
    xw = m[0, 0] * xc + m[0, 1] * yc + m[0, 2] * zc
    yw = m[1, 0] * xc + m[1, 1] * yc + m[1, 2] * zc
    zw = m[2, 0] * xc + m[2, 1] * yc + m[2, 2] * zc
    lon = np.arctan2(xw, zw)
    lat = np.arctan2(yw, np.hypot(xw, zw))
    col, row = _lonlat_to_erp(lon, lat, plane.width, plane.height)
    samples = _bilinear_wrap(plane.as_float(), col, row)
    return LumaPlane.from_array(np.clip(np.rint(samples), 0, 255).astype(np.uint8))


def _bilinear_wrap(img: np.ndarray, col, row) -> np.ndarray:
    h, w = img.shape
    c0 = np.floor(col)
    r0 = np.floor(row)
    fc = col - c0
    fr = row - r0
    c0i = (c0.astype(np.int64)) % w
    c1i = (c0i + 1) % w
    r0i = np.clip(r0.astype(np.int64), 0, h - 1)
    r1i = np.clip(r0i + 1, 0, h - 1)
    top = img[r0i, c0i] * (1 - fc) + img[r0i, c1i] * fc
    bot = img[r1i, c0i] * (1 - fc) + img[r1i, c1i] * fc
    return top * (1 - fr) + bot * fr


def viewport_to_erp(u: float, v: float, spec: ViewportSpec,
                    width: int, height: int) -> tuple[float, float]:
    """Map a viewport pixel (u, v) to ERP (col, row) pixel coordinates."""
    spec.validate()
    if not (-0.5 <= u <= spec.out_width - 0.5 and -0.5 <= v <= spec.out_height - 0.5):
        raise ValidationError(f"point ({u},{v}) outside the viewport raster")
    half_h, half_v = spec.half_extents()
    xc = ((u + 0.5) / spec.out_width * 2.0 - 1.0) * half_h
    yc = -((v + 0.5) / spec.out_height * 2.0 - 1.0) * half_v
    d = rotation_matrix(spec) @ np.array([xc, yc, 1.0])
    lon = math.atan2(d[0], d[2])
    lat = math.atan2(d[1], math.hypot(d[0], d[2]))
    col, row = _lonlat_to_erp(lon, lat, width, height)
    return float(col), float(row)


def erp_to_viewport(col: float, row: float, spec: ViewportSpec,
                    width: int, height: int) -> tuple[float, float]:
    """Inverse of viewport_to_erp; raises for directions behind the camera."""
    spec.validate()
    lon, lat = _erp_to_lonlat(col, row, width, height)
    d = np.array([math.cos(lat) * math.sin(lon),
                  math.sin(lat),
                  math.cos(lat) * math.cos(lon)])
    dc = rotation_matrix(spec).T @ d
    if dc[2] <= 0:
        raise ValidationError("ERP point lies behind the viewport camera")
    half_h, half_v = spec.half_extents()
    nx = (dc[0] / dc[2]) / half_h
    ny = (dc[1] / dc[2]) / half_v
    u = (nx + 1.0) / 2.0 * spec.out_width - 0.5
    v = (-ny + 1.0) / 2.0 * spec.out_height - 0.5
    return float(u), float(v)


def project_viewport_field_to_erp(field: np.ndarray, spec: ViewportSpec,
                                  width: int, height: int) -> np.ndarray:
    """Pull a per-pixel viewport field back onto the ERP grid (0 outside)."""
    spec.validate()
    cols, rows = np.meshgrid(np.arange(width, dtype=np.float64),
                             np.arange(height, dtype=np.float64))
    lon, lat = _erp_to_lonlat(cols, rows, width, height)
    d = np.stack([np.cos(lat) * np.sin(lon), np.sin(lat), np.cos(lat) * np.cos(lon)])
    m = rotation_matrix(spec).T
    dx = m[0, 0] * d[0] + m[0, 1] * d[1] + m[0, 2] * d[2]
    dy = m[1, 0] * d[0] + m[1, 1] * d[1] + m[1, 2] * d[2]
    dz = m[2, 0] * d[0] + m[2, 1] * d[1] + m[2, 2] * d[2]
    half_h, half_v = spec.half_extents()
    with np.errstate(divide="ignore", invalid="ignore"):
        nx = (dx / dz) / half_h
        ny = (dy / dz) / half_v
    inside = (dz > 0) & (np.abs(nx) <= 1.0) & (np.abs(ny) <= 1.0)
    u = np.where(inside, (nx + 1.0) / 2.0 * spec.out_width - 0.5, 0.0)
    v = np.where(inside, (-ny + 1.0) / 2.0 * spec.out_height - 0.5, 0.0)
    vh, vw = field.shape
    u = np.clip(u, 0.0, vw - 1.0)
    v = np.clip(v, 0.0, vh - 1.0)
    c0 = np.floor(u).astype(np.int64)
    r0 = np.floor(v).astype(np.int64)
    c1 = np.minimum(c0 + 1, vw - 1)
    r1 = np.minimum(r0 + 1, vh - 1)
    fc = u - c0
    fr = v - r0
    f = np.asarray(field, dtype=np.float64)
    sampled = ((f[r0, c0] * (1 - fc) + f[r0, c1] * fc) * (1 - fr)
               + (f[r1, c0] * (1 - fc) + f[r1, c1] * fc) * fr)
    return np.where(inside, sampled, 0.0)
