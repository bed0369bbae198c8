import numpy as np
import pytest

from sjnd360.xform import (forward_dct, forward_dct_grid, forward_dct_reference,
                           inverse_dct, inverse_dct_grid, inverse_dct_reference,
                           scale_factors)


def test_constant_block_dc():
    block = np.full((8, 8), 128.0)
    c = forward_dct(block)
    assert c[0, 0] == pytest.approx(1024.0, abs=1e-9)  # N * mean
    assert np.abs(c.flat[1:]).max() < 1e-9


def test_dc_equals_n_times_mean():
    rng = np.random.default_rng(5)
    block = rng.uniform(0, 255, (8, 8))
    c = forward_dct(block)
    assert c[0, 0] == pytest.approx(8.0 * block.mean(), rel=1e-12)


def test_impulse_closed_form():
    block = np.zeros((8, 8))
    block[0, 0] = 1.0
    c = forward_dct(block)
    phi = scale_factors(8)
    i = np.arange(8)
    expected = np.outer(phi * np.cos(i * np.pi / 16), phi * np.cos(i * np.pi / 16))
    assert np.allclose(c, expected, atol=1e-12)
    assert c[0, 0] == pytest.approx(0.125, abs=1e-12)


def test_roundtrip_random_blocks():
    rng = np.random.default_rng(6)
    for _ in range(50):
        block = rng.uniform(0, 255, (8, 8))
        back = inverse_dct(forward_dct(block))
        assert np.abs(back - block).max() < 1e-6


def test_inverse_zero_and_dc_only():
    assert (inverse_dct(np.zeros((8, 8))) == 0).all()
    c = np.zeros((8, 8))
    c[0, 0] = 1024.0
    assert np.allclose(inverse_dct(c), 128.0, atol=1e-9)


def test_linearity():
    rng = np.random.default_rng(7)
    a = rng.uniform(-100, 100, (8, 8))
    b = rng.uniform(-100, 100, (8, 8))
    lhs = inverse_dct(a + b)
    rhs = inverse_dct(a) + inverse_dct(b)
    assert np.abs(lhs - rhs).max() < 1e-6


def test_parseval():
    rng = np.random.default_rng(8)
    for _ in range(20):
        block = rng.uniform(0, 255, (8, 8))
        c = forward_dct(block)
        pe = np.sum(block ** 2)
        ce = np.sum(c ** 2)
        assert abs(pe - ce) / pe < 1e-4


def test_fast_matches_reference():
    rng = np.random.default_rng(9)
    for _ in range(25):
        block = rng.uniform(0, 255, (8, 8))
        assert np.abs(forward_dct(block) - forward_dct_reference(block)).max() < 1e-9
        coeffs = rng.uniform(-500, 500, (8, 8))
        assert np.abs(inverse_dct(coeffs) - inverse_dct_reference(coeffs)).max() < 1e-9


def test_grid_matches_per_block_and_threads():
    rng = np.random.default_rng(10)
    blocks = rng.uniform(0, 255, (9, 7, 8, 8))
    grid1 = forward_dct_grid(blocks, threads=1)
    grid2 = forward_dct_grid(blocks, threads=3)
    assert (grid1 == grid2).all()
    assert np.allclose(grid1[4, 2], forward_dct(blocks[4, 2]), atol=1e-12)
    back = inverse_dct_grid(grid1, threads=2)
    assert np.abs(back - blocks).max() < 1e-6


def test_other_block_sizes():
    rng = np.random.default_rng(11)
    for n in (2, 4, 16):
        block = rng.uniform(0, 255, (n, n))
        c = forward_dct(block)
        assert c[0, 0] == pytest.approx(n * block.mean(), rel=1e-12)
        assert np.abs(inverse_dct(c) - block).max() < 1e-6
