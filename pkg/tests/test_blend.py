import numpy as np
import pytest

from tsb import blend as blend_mod
from tsb import errors
from tsb.blend import blend, poisson_blend, warp_patch


# ---------------------------------------------------------------------------
# warp_patch

def test_identity_resize():
    rng = np.random.default_rng(0)
    patch = rng.random((64, 128, 3)).astype(np.float32)
    out = warp_patch(patch, (0, 0, 128, 64))
    assert np.abs(out - patch).max() < 1e-6


def test_double_resize_preserves_corners():
    rng = np.random.default_rng(1)
    patch = rng.random((8, 8)).astype(np.float32)
    out = warp_patch(patch, (0, 0, 16, 16))
    assert out.shape == (16, 16)
    assert abs(out[0, 0] - patch[0, 0]) < 1e-6
    assert abs(out[-1, -1] - patch[-1, -1]) < 1e-6
    assert abs(out[0, -1] - patch[0, -1]) < 1e-6


def test_mask_stays_in_unit_interval():
    rng = np.random.default_rng(2)
    patch = rng.random((64, 64, 3))
    mask = rng.random((64, 64)) * 0.98 + 0.01
    _, wm = warp_patch(patch, (0, 0, 100, 40), mask)
    assert wm.min() > 0.0
    assert wm.max() < 1.0


def test_degenerate_box():
    with pytest.raises(errors.DegenerateBox):
        warp_patch(np.zeros((64, 64, 3)), (10, 10, 10, 40))


# ---------------------------------------------------------------------------
# poisson_blend oracles

def _dense_solve(scene, region, box, mask=None):
    """Direct dense solve of the same Poisson system."""
    x0, y0, x1, y1 = box
    ih, iw = y1 - y0 - 2, x1 - x0 - 2
    a = blend_mod._laplacian((ih, iw)).toarray()
    result = scene.astype(np.float64).copy()
    scene_box = scene[y0:y1, x0:x1].astype(np.float64)
    region = region.astype(np.float64)
    n_ch = scene.shape[2] if scene.ndim == 3 else 1
    for ch in range(n_ch):
        reg_c = region[..., ch] if region.ndim == 3 else region
        scn_c = scene_box[..., ch] if scene.ndim == 3 else scene_box
        b = blend_mod._guidance(reg_c, scn_c, mask)[1:-1, 1:-1].copy()
        b[0, :] += scn_c[0, 1:-1]
        b[-1, :] += scn_c[-1, 1:-1]
        b[:, 0] += scn_c[1:-1, 0]
        b[:, -1] += scn_c[1:-1, -1]
        x = np.linalg.solve(a, b.ravel())
        if scene.ndim == 3:
            result[y0 + 1:y1 - 1, x0 + 1:x1 - 1, ch] = x.reshape(ih, iw)
        else:
            result[y0 + 1:y1 - 1, x0 + 1:x1 - 1] = x.reshape(ih, iw)
    return result


def test_fixed_point_identity():
    rng = np.random.default_rng(3)
    scene = rng.random((48, 48, 3))
    box = (8, 8, 40, 40)
    region = scene[8:40, 8:40].copy()
    out = poisson_blend(scene, region, box)
    assert np.abs(out - scene).max() < 1e-6


def test_harmonic_constant_boundary():
    scene = np.full((32, 32), 0.7)
    region = np.full((16, 16), 0.2)  # constant region: zero guidance gradient
    out = poisson_blend(scene, region, (8, 8, 24, 24))
    assert np.abs(out - 0.7).max() < 1e-6


def test_dense_oracle_16x16():
    rng = np.random.default_rng(4)
    scene = rng.random((32, 32, 3))
    region = rng.random((16, 16, 3))
    box = (8, 8, 24, 24)
    ours = poisson_blend(scene, region, box)
    ref = _dense_solve(scene, region, box)
    assert np.abs(ours.astype(np.float64) - ref).max() <= 1e-4


def test_dense_oracle_with_mask():
    rng = np.random.default_rng(5)
    scene = rng.random((32, 32, 3))
    region = rng.random((16, 16, 3))
    mask = (rng.random((16, 16)) > 0.5).astype(np.float64)
    box = (8, 8, 24, 24)
    ours = poisson_blend(scene, region, box, mask=mask)
    ref = _dense_solve(scene, region, box, mask=mask)
    assert np.abs(ours.astype(np.float64) - ref).max() <= 1e-4


def test_out_of_box_bit_identical():
    rng = np.random.default_rng(6)
    scene = rng.random((40, 60, 3)).astype(np.float32)
    region = rng.random((16, 24, 3))
    box = (10, 12, 34, 28)
    out = poisson_blend(scene, region, box)
    outside = np.ones(scene.shape[:2], bool)
    outside[13:27, 11:33] = False  # interior unknowns only
    assert np.array_equal(out[outside], scene[outside])


def test_boundary_rows_match_scene():
    rng = np.random.default_rng(7)
    scene = rng.random((40, 40, 3)).astype(np.float32)
    region = rng.random((20, 20, 3))
    box = (10, 10, 30, 30)
    out = poisson_blend(scene, region, box)
    assert np.array_equal(out[10, 10:30], scene[10, 10:30])
    assert np.array_equal(out[29, 10:30], scene[29, 10:30])
    assert np.array_equal(out[10:30, 10], scene[10:30, 10])
    assert np.array_equal(out[10:30, 29], scene[10:30, 29])


def test_solver_deterministic():
    rng = np.random.default_rng(8)
    scene = rng.random((32, 32, 3))
    region = rng.random((16, 16, 3))
    a = poisson_blend(scene, region, (8, 8, 24, 24))
    b = poisson_blend(scene, region, (8, 8, 24, 24))
    assert np.array_equal(a, b)


def test_region_shape_mismatch():
    with pytest.raises(errors.BadShape):
        poisson_blend(np.zeros((32, 32, 3)), np.zeros((8, 8, 3)), (8, 8, 24, 24))


# ---------------------------------------------------------------------------
# blend() wrapper

def test_hard_mode():
    scene = np.zeros((32, 32, 3), np.float32)
    patch = np.ones((8, 8, 3), np.float32)
    out = blend(scene, patch, (4, 4, 12, 12), mode="hard")
    assert out[4:12, 4:12].min() == 1.0
    assert out[:4].max() == 0.0


def test_alpha_mode():
    scene = np.zeros((32, 32, 3), np.float32)
    patch = np.ones((8, 8, 3), np.float32)
    mask = np.full((8, 8), 0.25, np.float32)
    out = blend(scene, patch, (4, 4, 12, 12), mask=mask, mode="alpha")
    assert np.abs(out[4:12, 4:12] - 0.25).max() < 1e-6


def test_alpha_requires_mask():
    with pytest.raises(errors.BadShape):
        blend(np.zeros((32, 32, 3)), np.ones((8, 8, 3)), (4, 4, 12, 12),
              mode="alpha")


def test_box_out_of_bounds():
    with pytest.raises(errors.BoxOutOfBounds):
        blend(np.zeros((32, 32, 3)), np.ones((8, 8, 3)), (28, 28, 40, 40))


def test_unknown_mode():
    with pytest.raises(ValueError):
        blend(np.zeros((32, 32, 3)), np.ones((8, 8, 3)), (4, 4, 12, 12),
              mode="wat")


def test_blend_output_clipped():
    rng = np.random.default_rng(9)
    scene = rng.random((40, 40, 3)).astype(np.float32)
    patch = rng.random((16, 16, 3)).astype(np.float32) * 2  # out of range
    out = blend(scene, patch, (8, 8, 28, 28), mode="poisson")
    assert out.min() >= 0.0
    assert out.max() <= 1.0
