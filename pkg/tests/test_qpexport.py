import math

import numpy as np
import pytest

from sjnd360.errors import ValidationError
from sjnd360.qpexport import (QpMap, QpMapConfig, build_qpmap, cu_means, export_qpmap,
                              perceptual_qp, qp_factor)
from sjnd360.raster import ThresholdMap

CFG = QpMapConfig()


def tmap_from(values, n=8):
    return ThresholdMap(np.asarray(values, dtype=np.float64), n)


def test_config_neutrality_enforced():
    CFG.validate()
    with pytest.raises(ValidationError):
        QpMapConfig(m=0.8, n=0.6, p=1.0).validate()  # 0.8 + 0.3 != 1
    QpMapConfig(m=0.5, n=1.0, p=1.0).validate()      # 0.5 + 0.5 == 1


def test_cu_means_constant():
    tmap = tmap_from(np.full((16, 32, 8, 8), 7.25))
    means, frame = cu_means(tmap, 64)
    assert means.shape == (2, 4)
    assert (means == frame).all()
    assert frame == 7.25


def test_cu_means_two_valued_split():
    vals = np.empty((8, 16, 8, 8))
    vals[:, :8] = 4.0
    vals[:, 8:] = 10.0
    means, frame = cu_means(tmap_from(vals), 64)
    assert means.min() == 4.0 and means.max() == 10.0
    assert 4.0 < frame < 10.0


def test_cu_means_weighted_recombination():
    rng = np.random.default_rng(60)
    vals = rng.uniform(1, 30, (10, 20, 8, 8))
    tmap = tmap_from(vals)
    means, frame = cu_means(tmap, 48)  # 48 = 6 blocks per CU side
    by, bx = 10, 20
    counts = np.zeros_like(means)
    cu_row = (np.arange(by) * 8) // 48
    cu_col = (np.arange(bx) * 8) // 48
    np.add.at(counts, (cu_row[:, None], cu_col[None, :]), 64.0)
    recombined = float((means * counts).sum() / counts.sum())
    assert recombined == pytest.approx(frame, rel=1e-9)
    assert frame == pytest.approx(vals.mean(), rel=1e-12)


def test_cu_size_below_block_rejected():
    with pytest.raises(ValidationError):
        cu_means(tmap_from(np.ones((2, 2, 8, 8))), 4)


def test_qp_neutral_point():
    assert perceptual_qp(15.0, 15.0, CFG) == 32
    assert qp_factor(15.0, 15.0, CFG) == pytest.approx(1.0, rel=1e-12)


def test_qp_saturation_limit():
    # far above the frame mean the factor tends to sqrt(m + n)
    assert qp_factor(1e9, 1.0, CFG) == pytest.approx(math.sqrt(1.3), rel=1e-9)
    assert perceptual_qp(1e9, 1.0, CFG) == 36  # 32 * 1.14018 -> 36.486 -> 36


def test_qp_monotone_in_cu_mean():
    rng = np.random.default_rng(61)
    for _ in range(50):
        frame = rng.uniform(1, 30)
        a, b = np.sort(rng.uniform(0.1, 100, 2))
        assert perceptual_qp(a, frame, CFG) <= perceptual_qp(b, frame, CFG)


def test_qp_factor_bounds_random_maps():
    rng = np.random.default_rng(62)
    lo = math.sqrt(CFG.m + CFG.n / (1 + CFG.p * math.exp(CFG.q)))
    hi = math.sqrt(CFG.m + CFG.n)
    for _ in range(10):
        vals = rng.uniform(5, 25, (8, 16, 8, 8))
        qpmap = build_qpmap(tmap_from(vals), CFG)
        factors = qpmap.qp / CFG.base_qp
        means, frame = cu_means(tmap_from(vals), CFG.cu_size)
        raw = qp_factor(means, frame, CFG)
        assert (raw >= lo - 1e-12).all() and (raw <= hi + 1e-12).all()
        assert raw.min() >= 0.843 and raw.max() <= 1.140
        assert factors.min() > 0.8 and factors.max() < 1.2


def test_qp_rounding_half_away():
    # base 32, engineered factor -> check .5 rounds away from zero
    cfg = QpMapConfig(base_qp=50)
    assert perceptual_qp(15.0, 15.0, cfg) == 50
    # neutral factor is exactly 1.0; plain int rounding elsewhere
    assert perceptual_qp(1e9, 1.0, cfg) == int(np.floor(50 * math.sqrt(1.3) + 0.5))


def test_qp_clamping():
    cfg = QpMapConfig(base_qp=60, min_qp=0, max_qp=63)
    assert perceptual_qp(1e9, 1.0, cfg) == 63  # 60 * 1.14 = 68.4 clamps
    cfg2 = QpMapConfig(base_qp=32, min_qp=30, max_qp=34)
    assert perceptual_qp(0.001, 15.0, cfg2) == 30


def test_build_qpmap_constant_neutral():
    tmap = tmap_from(np.full((16, 32, 8, 8), 9.0))
    qpmap = build_qpmap(tmap, CFG)
    assert (qpmap.qp == CFG.base_qp).all()
    assert qpmap.qp.shape == (2, 4)


def test_export_dqp_neutral_zeros(tmp_path):
    tmap = tmap_from(np.full((8, 16, 8, 8), 9.0))
    qpmap = build_qpmap(tmap, CFG)
    out = tmp_path / "q.dqp"
    export_qpmap(qpmap, out, "dqp-text")
    assert out.read_text() == "0 0\n"  # 1x2 CU grid of 64px CUs


def test_export_formats_and_roundtrip(tmp_path):
    qpmap = QpMap(qp=np.array([[32, 36]], dtype=np.int32),
                  cu_means=np.array([[10.0, 20.0]]), frame_mean=15.0, base_qp=32)
    csv_path = tmp_path / "q.csv"
    dqp_path = tmp_path / "q.dqp"
    export_qpmap(qpmap, csv_path, "csv")
    export_qpmap(qpmap, dqp_path, "dqp-text")
    assert csv_path.read_text() == "32,36\n"
    assert dqp_path.read_text() == "0 4\n"
    parsed_csv = [[int(v) for v in line.split(",")]
                  for line in csv_path.read_text().splitlines()]
    parsed_dqp = [[int(v) + qpmap.base_qp for v in line.split()]
                  for line in dqp_path.read_text().splitlines()]
    assert parsed_csv == parsed_dqp == [[32, 36]]
