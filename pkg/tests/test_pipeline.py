import numpy as np
import pytest

from sjnd360.errors import ValidationError
from sjnd360.fovea import FoveaParams, equator_gaussian_prior, saliency_from_array
from sjnd360.pipeline import compute_sjnd, stage_stats
from sjnd360.raster import LumaPlane, ThresholdMap

# regression pins from the first verified run (meadow + equator prior)
GOLDEN_STAGE_MEANS = {
    "map2d": 4.154467216775872,
    "map_lat": 4.497865920906866,
    "sjnd": 11.353990243293165,
}


def whole_frame_saliency(plane):
    return saliency_from_array(np.ones((plane.height, plane.width)), FoveaParams())


def test_requires_erp():
    plane = LumaPlane.from_array(np.zeros((64, 64), dtype=np.uint8))
    with pytest.raises(ValidationError):
        compute_sjnd(plane, None, fovea_enabled=False)


def test_whole_frame_saliency_neutralizes_fovea(meadow):
    stages = compute_sjnd(meadow, whole_frame_saliency(meadow))
    assert (stages.fovea_field == 1.0).all()
    assert (stages.sjnd.values == stages.map_lat.values).all()


def test_latitude_stage_matches_curve_oracle(meadow):
    from sjnd360.sphere import curve_coefficients, latitude_profile

    stages = compute_sjnd(meadow, whole_frame_saliency(meadow))
    prof = latitude_profile(meadow.width, meadow.height)
    n = stages.map2d.block_size
    centers = np.arange(stages.map2d.blocks_y) * n + (n - 1) / 2.0
    x = prof.density_at(centers)
    cc = curve_coefficients(stages.map2d.values)
    expected = cc.a * x[:, None, None, None] ** cc.b + cc.c
    assert np.allclose(stages.map_lat.values, expected, rtol=1e-12)


def test_dc_entries_equal_map_lat_exactly(meadow):
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    stages = compute_sjnd(meadow, sal)
    assert (stages.fovea_field[:, :, 0, 0] == 1.0).all()
    assert (stages.sjnd.values[:, :, 0, 0] == stages.map_lat.values[:, :, 0, 0]).all()


def test_stage_factorization_bit_exact(meadow):
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    stages = compute_sjnd(meadow, sal)
    recombined = stages.map_lat.values * stages.fovea_field
    assert (recombined == stages.sjnd.values).all()
    rel = np.abs(recombined - stages.sjnd.values) / stages.sjnd.values
    assert rel.max() <= 1e-9


def test_ablation_reproduces_map_lat(meadow):
    stages = compute_sjnd(meadow, None, fovea_enabled=False)
    assert (stages.fovea_field == 1.0).all()
    assert (stages.sjnd.values == stages.map_lat.values).all()
    # and it matches the foveated run's latitude stage
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    full = compute_sjnd(meadow, sal)
    assert (full.map_lat.values == stages.map_lat.values).all()


def test_fovea_enabled_needs_saliency(meadow):
    with pytest.raises(ValidationError):
        compute_sjnd(meadow, None, fovea_enabled=True)


def test_deterministic_and_thread_invariant(meadow):
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    a = compute_sjnd(meadow, sal, threads=1)
    b = compute_sjnd(meadow, sal, threads=3)
    assert (a.sjnd.values == b.sjnd.values).all()
    assert (a.map2d.values == b.map2d.values).all()


def test_golden_stage_means(meadow):
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    stages = compute_sjnd(meadow, sal)
    assert float(stages.map2d.values.mean()) == GOLDEN_STAGE_MEANS["map2d"]
    assert float(stages.map_lat.values.mean()) == GOLDEN_STAGE_MEANS["map_lat"]
    assert float(stages.sjnd.values.mean()) == GOLDEN_STAGE_MEANS["sjnd"]


# ---------------------------------------------------------------------------
# stats

def test_stats_constant_synthetic():
    # 32 block rows so all 10 absolute-latitude bands hold at least one block
    plane = LumaPlane.from_array(np.full((256, 512), 128, dtype=np.uint8))
    sal = equator_gaussian_prior(512, 256)
    stages = compute_sjnd(plane, sal)
    stats = stage_stats(stages, bands=10)
    band2d = np.array(stats.band_means["map2d"])
    assert np.allclose(band2d, band2d[0], rtol=1e-12)  # identical blocks
    bandlat = np.array(stats.band_means["map_lat"])
    assert (np.diff(bandlat) > 0).all()  # strictly increasing toward the pole
    assert stats.salient_fovea_mean == 1.0
    ecc_max = stages.saliency.eccentricity_deg.max()
    assert ecc_max > 2.7
    assert stats.nonsalient_fovea_mean > 1.0


def test_stats_csv_shape(meadow):
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    stages = compute_sjnd(meadow, sal)
    stats = stage_stats(stages, bands=10)
    rows = stats.csv_rows()
    assert rows[0] == "record,stage,key,value"
    assert len([r for r in rows if r.startswith("band_mean,")]) == 30
    assert any(r.startswith("fovea,alpha,salient_mean") for r in rows)


def test_stats_band_count_validation(meadow):
    sal = equator_gaussian_prior(meadow.width, meadow.height)
    stages = compute_sjnd(meadow, sal)
    with pytest.raises(ValidationError):
        stage_stats(stages, bands=0)
