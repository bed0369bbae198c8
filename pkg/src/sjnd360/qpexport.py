"""Per-CU perceptual quantization parameters from a threshold map.

A CU whose mean threshold exceeds the frame mean tolerates more distortion
and gets a larger QP through a bounded logistic factor; the constants are
constrained so a CU exactly at the frame mean keeps the base QP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, ValidationError
from .raster import ThresholdMap

NEUTRALITY_TOL = 1e-9


@dataclass(frozen=True)
class QpMapConfig:
    cu_size: int = 64
    base_qp: int = 32
    m: float = 0.7
    n: float = 0.6
    p: float = 1.0
    q: float = 4.0
    min_qp: int = 0
    max_qp: int = 63

    def validate(self) -> None:
        if self.cu_size < 2:
            raise ValidationError("qp.cu_size must be >= 2")
        if not 0 <= self.base_qp <= 63:
            raise ValidationError("qp.base_qp must be in [0, 63]")
        if not self.q > 0:
            raise ValidationError("qp.q must be positive")
        if not (0 <= self.min_qp <= self.max_qp <= 63):
            raise ValidationError("qp clamp range must satisfy 0 <= min <= max <= 63")
        neutral = self.m + self.n / (1.0 + self.p)
        if abs(neutral - 1.0) > NEUTRALITY_TOL:
            raise ValidationError(
                f"qp constants break neutrality: m + n/(1+p) = {neutral!r}, expected 1"
            )


@dataclass(frozen=True)
class QpMap:
    qp: np.ndarray         # (cy, cx) int32
    cu_means: np.ndarray   # (cy, cx) float64
    frame_mean: float
    base_qp: int


def cu_means(tmap: ThresholdMap, cu_size: int) -> tuple[np.ndarray, float]:
    """Mean threshold per CU (blocks binned by their top-left pixel) and frame mean."""
    n = tmap.block_size
    if cu_size < n:
        raise ValidationError(f"cu_size {cu_size} smaller than block size {n}")
    by, bx = tmap.blocks_y, tmap.blocks_x
    cy = (by * n + cu_size - 1) // cu_size
    cx = (bx * n + cu_size - 1) // cu_size
    block_sums = tmap.values.sum(axis=(2, 3))  # (by, bx)
    cu_row = (np.arange(by) * n) // cu_size
    cu_col = (np.arange(bx) * n) // cu_size
    sums = np.zeros((cy, cx))
    counts = np.zeros((cy, cx))
    np.add.at(sums, (cu_row[:, None], cu_col[None, :]), block_sums)
    np.add.at(counts, (cu_row[:, None], cu_col[None, :]),
              np.full((by, bx), float(n * n)))
    if (counts == 0).any():
        raise ValidationError("CU grid contains cells with no blocks")
    means = sums / counts
    frame_mean = float(block_sums.sum() / counts.sum())
    return means, frame_mean


def qp_factor(j_cu, j_frame: float, cfg: QpMapConfig = QpMapConfig()):
    """Bounded logistic scale on the base QP; 1 exactly at the frame mean."""
    if not j_frame > 0:
        raise ValidationError("frame mean threshold must be positive")
    rel = (np.asarray(j_cu, dtype=np.float64) - j_frame) / j_frame
    out = np.sqrt(cfg.m + cfg.n / (1.0 + cfg.p * np.exp(-cfg.q * rel)))
    return float(out) if out.ndim == 0 else out


def _round_half_away(x):
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def perceptual_qp(j_cu: float, j_frame: float,
                  cfg: QpMapConfig = QpMapConfig()) -> int:
    """Integer QP for one CU, rounded half away from zero and clamped."""
    cfg.validate()
    raw = cfg.base_qp * qp_factor(j_cu, j_frame, cfg)
    return int(np.clip(_round_half_away(np.asarray(raw)), cfg.min_qp, cfg.max_qp))


def build_qpmap(tmap: ThresholdMap, cfg: QpMapConfig = QpMapConfig()) -> QpMap:
    cfg.validate()
    means, frame_mean = cu_means(tmap, cfg.cu_size)
    raw = cfg.base_qp * qp_factor(means, frame_mean, cfg)
    qp = np.clip(_round_half_away(raw), cfg.min_qp, cfg.max_qp).astype(np.int32)
    return QpMap(qp=qp, cu_means=means, frame_mean=frame_mean, base_qp=cfg.base_qp)


def export_qpmap(qpmap: QpMap, path, fmt: str = "csv") -> None:
    """Write the CU grid as csv (absolute QP) or dqp-text (QP - base, one
    space-separated line per CU row)."""
    p = Path(path)
    try:
        if fmt == "csv":
            lines = [",".join(str(int(v)) for v in row) for row in qpmap.qp]
        elif fmt == "dqp-text":
            lines = [" ".join(str(int(v) - qpmap.base_qp) for v in row)
                     for row in qpmap.qp]
        else:
            raise ValidationError(f"unknown QP map format: {fmt}")
        p.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {p}: {exc}") from exc
