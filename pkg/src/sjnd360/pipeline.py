"""Full spherical threshold assembly and per-stage summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .fovea import FoveaParams, SaliencyField, fovea_map
from .jnd2d import Jnd2dParams, jnd2d_map
from .raster import BlockGrid, LumaPlane, ThresholdMap, format_number
from .sphere import SphereParams, apply_latitude, latitude_profile


@dataclass
class SjndStages:
    """All intermediate maps of one frame's computation.

    sjnd is always the elementwise product of map_lat and fovea_field, so the
    stages can be cached and recombined without recomputation.
    """

    map2d: ThresholdMap
    map_lat: ThresholdMap
    fovea_field: np.ndarray       # (by, bx, N, N) weights
    sjnd: ThresholdMap
    grid: BlockGrid
    saliency: SaliencyField | None = None


def compute_sjnd(plane: LumaPlane, saliency: SaliencyField | None,
                 jnd2d_params: Jnd2dParams = Jnd2dParams(),
                 sphere_params: SphereParams = SphereParams(),
                 fovea_params: FoveaParams = FoveaParams(),
                 fovea_enabled: bool = True,
                 threads: int = 1) -> SjndStages:
    """Run the three stages in order: planar, latitude, foveation.

    With fovea_enabled=False (the ablation configuration) the weighting field
    is all ones and sjnd reproduces map_lat exactly.
    """
    if not plane.is_erp():
        raise ValidationError(
            f"spherical thresholds need an ERP frame (W == 2H), got "
            f"{plane.width}x{plane.height}"
        )
    sphere_params.validate()
    fovea_params.validate()
    map2d, grid = jnd2d_map(plane, jnd2d_params, threads)
    profile = latitude_profile(plane.width, plane.height, sphere_params.x_max)
    map_lat = apply_latitude(map2d, profile, sphere_params.curve_mode,
                             sphere_params.lat_floor)
    if fovea_enabled:
        if saliency is None:
            raise ValidationError("foveation stage needs a saliency field")
        weights = fovea_map(grid, saliency, fovea_params)
    else:
        weights = np.ones_like(map_lat.values)
    sjnd = ThresholdMap(map_lat.values * weights, map2d.block_size)
    return SjndStages(map2d=map2d, map_lat=map_lat, fovea_field=weights,
                      sjnd=sjnd, grid=grid, saliency=saliency)


# ---------------------------------------------------------------------------
# summaries

STAGE_NAMES = ("map2d", "map_lat", "sjnd")


@dataclass
class StageStats:
    overall: dict[str, dict[str, float]]          # stage -> {mean,min,max}
    band_means: dict[str, list[float]]            # stage -> per-band mean, equator first
    bands: int
    salient_fovea_mean: float | None = None
    nonsalient_fovea_mean: float | None = None

    def csv_rows(self) -> list[str]:
        rows = ["record,stage,key,value"]
        for stage in STAGE_NAMES:
            for key in ("mean", "min", "max"):
                rows.append(f"overall,{stage},{key},{format_number(self.overall[stage][key])}")
        for stage in STAGE_NAMES:
            for k, v in enumerate(self.band_means[stage]):
                rows.append(f"band_mean,{stage},{k},{format_number(v)}")
        if self.salient_fovea_mean is not None:
            rows.append(f"fovea,alpha,salient_mean,{format_number(self.salient_fovea_mean)}")
        if self.nonsalient_fovea_mean is not None:
            rows.append(f"fovea,alpha,nonsalient_mean,{format_number(self.nonsalient_fovea_mean)}")
        return rows


def stage_stats(stages: SjndStages, bands: int = 10) -> StageStats:
    """Per-stage mean/min/max, absolute-latitude band means, salience split.

    Band 0 straddles the equator; the last band touches the poles. Bands
    aggregate whole blocks by the latitude of their center row.
    """
    if bands < 1:
        raise ValidationError("need at least one latitude band")
    n = stages.sjnd.block_size
    by = stages.sjnd.blocks_y
    height = stages.grid.blocks_y * n  # covered height; ERP guaranteed upstream

    centers = np.arange(by) * n + (n - 1) / 2.0
    lat_frac = np.abs((centers + 0.5) / height - 0.5) * 2.0  # 0 equator .. ~1 pole
    band_of_row = np.minimum((lat_frac * bands).astype(np.int64), bands - 1)

    arrays = {"map2d": stages.map2d.values, "map_lat": stages.map_lat.values,
              "sjnd": stages.sjnd.values}
    overall = {}
    band_means = {}
    for name, arr in arrays.items():
        overall[name] = {"mean": float(arr.mean()), "min": float(arr.min()),
                         "max": float(arr.max())}
        per_band = []
        for b in range(bands):
            sel = arr[band_of_row == b]
            per_band.append(float(sel.mean()) if sel.size else float("nan"))
        band_means[name] = per_band

    stats = StageStats(overall=overall, band_means=band_means, bands=bands)
    if stages.saliency is not None:
        mask = stages.saliency.mask
        crows = np.minimum(np.arange(by) * n + n // 2, mask.shape[0] - 1)
        ccols = np.minimum(np.arange(stages.sjnd.blocks_x) * n + n // 2,
                           mask.shape[1] - 1)
        block_salient = mask[np.ix_(crows, ccols)]
        fov = stages.fovea_field
        if block_salient.any():
            stats.salient_fovea_mean = float(fov[block_salient].mean())
        if (~block_salient).any():
            stats.nonsalient_fovea_mean = float(fov[~block_salient].mean())
    return stats
