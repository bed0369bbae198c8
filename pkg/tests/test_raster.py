import numpy as np
import pytest

from sjnd360.errors import InputError, ValidationError
from sjnd360.raster import (LumaPlane, ThresholdMap, YuvSpec, blocks_of,
                            load_float_map, load_image, save_image, save_map, tile)


def write_pgm(path, arr):
    h, w = arr.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + arr.astype(np.uint8).tobytes())


def test_pgm_constant_identity(tmp_path):
    arr = np.full((16, 16), 128, dtype=np.uint8)
    p = tmp_path / "c.pgm"
    write_pgm(p, arr)
    plane = load_image(p)
    assert plane.width == 16 and plane.height == 16
    assert (plane.samples == 128).all()


def test_pgm_header_comments_and_split_whitespace(tmp_path):
    arr = np.arange(12, dtype=np.uint8).reshape(3, 4)
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# a comment\n4\n 3 # trailing\n255\n" + arr.tobytes())
    # comment after the height token belongs to header whitespace handling
    plane = load_image(p)
    assert plane.samples.shape == (3, 4)


def test_pgm_roundtrip_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 256, (20, 34), dtype=np.uint8)
    p1 = tmp_path / "a.pgm"
    p2 = tmp_path / "b.pgm"
    write_pgm(p1, arr)
    plane = load_image(p1)
    save_image(plane, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert (load_image(p2).samples == arr).all()


def test_pgm_rejects_16bit(tmp_path):
    p = tmp_path / "deep.pgm"
    p.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
    with pytest.raises(InputError):
        load_image(p)


def test_pgm_truncated(tmp_path):
    p = tmp_path / "short.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
    with pytest.raises(InputError):
        load_image(p)


def test_png_bt601_luma(tmp_path):
    from PIL import Image

    rgb = np.zeros((4, 6, 3), dtype=np.uint8)
    rgb[..., 0] = 200  # pure red
    rgb[1, 1] = (10, 20, 30)
    p = tmp_path / "c.png"
    Image.fromarray(rgb, "RGB").save(p)
    plane = load_image(p)
    assert plane.samples[0, 0] == round(0.299 * 200)
    expected = round(0.299 * 10 + 0.587 * 20 + 0.114 * 30)
    assert plane.samples[1, 1] == expected


def test_png_gray_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    arr = rng.integers(0, 256, (12, 18), dtype=np.uint8)
    p = tmp_path / "g.png"
    save_image(LumaPlane.from_array(arr), p)
    assert (load_image(p).samples == arr).all()


def test_yuv_frame_extraction(tmp_path):
    w, h = 8, 4
    y0 = np.arange(w * h, dtype=np.uint8).reshape(h, w)
    y1 = y0[::-1].copy()
    chroma = np.full(w * h // 2, 128, dtype=np.uint8)
    p = tmp_path / "v.yuv"
    p.write_bytes(y0.tobytes() + chroma.tobytes() + y1.tobytes() + chroma.tobytes())
    assert (load_image(p, yuv_spec=YuvSpec(w, h, 0)).samples == y0).all()
    assert (load_image(p, yuv_spec=YuvSpec(w, h, 1)).samples == y1).all()
    with pytest.raises(InputError):
        load_image(p, yuv_spec=YuvSpec(w, h, 2))
    with pytest.raises(ValidationError):
        load_image(p)  # missing spec


def test_y4m_frame_extraction(tmp_path):
    w, h = 6, 4
    y0 = np.full((h, w), 10, dtype=np.uint8)
    y1 = np.full((h, w), 200, dtype=np.uint8)
    chroma = bytes(w * h // 2)
    p = tmp_path / "v.y4m"
    p.write_bytes(b"YUV4MPEG2 W6 H4 F25:1 Ip A1:1 C420\n"
                  + b"FRAME\n" + y0.tobytes() + chroma
                  + b"FRAME\n" + y1.tobytes() + chroma)
    assert (load_image(p).samples == y0).all()
    assert (load_image(p, frame=1).samples == y1).all()


def test_erp_dimension_passthrough(tmp_path):
    arr = np.zeros((32, 64), dtype=np.uint8)
    p = tmp_path / "erp.pgm"
    write_pgm(p, arr)
    plane = load_image(p)
    assert (plane.width, plane.height) == (64, 32)
    assert plane.is_erp()


def test_tile_grid_shapes():
    plane = LumaPlane.from_array(np.zeros((16, 16), dtype=np.uint8))
    grid = tile(plane, 8)
    assert (grid.blocks_y, grid.blocks_x) == (2, 2)
    small = LumaPlane.from_array(np.zeros((10, 10), dtype=np.uint8))
    assert tile(small, 8).blocks_y == 1  # floor(10/8)
    big = tile(LumaPlane.from_array(np.zeros((2048, 4096), dtype=np.uint8)), 8)
    assert (big.blocks_y, big.blocks_x) == (256, 512)


def test_tile_constant_means():
    plane = LumaPlane.from_array(np.full((24, 24), 128, dtype=np.uint8))
    grid = tile(plane, 8)
    assert (grid.mean_luma == 128.0).all()
    assert (grid.coefficients == 0).all()


def test_tile_mean_sum_exact():
    rng = np.random.default_rng(2)
    arr = rng.integers(0, 256, (19, 27), dtype=np.uint8)
    plane = LumaPlane.from_array(arr)
    grid = tile(plane, 8)
    covered = arr[:16, :24].astype(np.int64).sum()
    assert int(round(float(grid.mean_luma.sum() * 64))) == covered


def test_tile_too_large_block():
    plane = LumaPlane.from_array(np.zeros((6, 20), dtype=np.uint8))
    with pytest.raises(ValidationError):
        tile(plane, 8)


def test_save_map_csv_integers(tmp_path):
    p = tmp_path / "m.csv"
    save_map(np.array([[1.0, 2.0], [3.0, 4.0]]), p, "csv")
    assert p.read_text() == "1,2\n3,4\n"


def test_save_map_pgm_constant_degenerate(tmp_path):
    p = tmp_path / "m.pgm"
    save_map(np.full((4, 4), 7.5), p, "pgm-normalized")
    assert (load_image(p).samples == 0).all()


def test_float_binary_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    arr = rng.standard_normal((9, 13)).astype(np.float32)
    p = tmp_path / "m.bin"
    save_map(arr, p, "float-binary")
    back = load_float_map(p)
    assert back.dtype == np.float32
    assert (back == arr).all()
    p2 = tmp_path / "m2.bin"
    save_map(back, p2, "float-binary")
    assert p.read_bytes() == p2.read_bytes()


def test_float_binary_header(tmp_path):
    p = tmp_path / "m.bin"
    save_map(np.zeros((2, 5), dtype=np.float32), p, "float-binary")
    data = p.read_bytes()
    assert data[:8] == b"SJNDMAP1"
    assert int.from_bytes(data[8:12], "little") == 5   # width
    assert int.from_bytes(data[12:16], "little") == 2  # height
    assert len(data) == 16 + 4 * 10


def test_save_map_rejects_nan(tmp_path):
    with pytest.raises(ValidationError):
        save_map(np.array([[np.nan, 1.0]]), tmp_path / "x.bin", "float-binary")


def test_threshold_map_layout_roundtrip():
    rng = np.random.default_rng(4)
    vals = rng.standard_normal((3, 5, 8, 8))
    tmap = ThresholdMap(vals, 8)
    flat = tmap.to_plane_layout()
    assert flat.shape == (24, 40)
    assert flat[0, 0] == vals[0, 0, 0, 0]
    assert flat[9, 17] == vals[1, 2, 1, 1]
    back = ThresholdMap.from_plane_layout(flat, 8)
    assert (back.values == vals).all()


def test_save_map_accepts_saliency_field(tmp_path):
    from sjnd360.fovea import FoveaParams, saliency_from_array

    field = saliency_from_array(np.random.default_rng(5).uniform(0.1, 1, (6, 9)),
                                FoveaParams())
    p = tmp_path / "sal.bin"
    save_map(field, p, "float-binary")
    assert load_float_map(p).shape == (6, 9)


def test_blocks_of_layout():
    arr = np.arange(256, dtype=np.uint8).reshape(16, 16)
    b = blocks_of(LumaPlane.from_array(arr), 8)
    assert b.shape == (2, 2, 8, 8)
    assert b[0, 1, 0, 0] == arr[0, 8]
    assert b[1, 0, 3, 4] == arr[11, 4]
