"""Stitch a generated word patch back into the source photo.

Geometric placement is a bilinear warp into the word box; compositing is
either a hard paste, an alpha (mask) composite, or gradient-domain
Poisson blending. The Poisson solve uses conjugate gradients on the
5-point Laplacian with a Jacobi preconditioner.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from . import errors


def warp_patch(patch: np.ndarray, box: tuple[int, int, int, int],
               mask: np.ndarray | None = None):
    """Bilinear resize of a 64xW patch (and optional mask) to box size.

    Corner pixels map to corner pixels (align-corners sampling).
    """
    x0, y0, x1, y1 = box
    bw, bh = x1 - x0, y1 - y0
    if bw <= 0 or bh <= 0:
        raise errors.DegenerateBox(f"box {box} has no area")
    warped = _resize(patch, bh, bw)
    if mask is None:
        return warped
    return warped, _resize(mask, bh, bw)


def _resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    in_h, in_w = img.shape[:2]
    ys = np.linspace(0, in_h - 1, out_h) if out_h > 1 else np.zeros(1)
    xs = np.linspace(0, in_w - 1, out_w) if out_w > 1 else np.zeros(1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    if img.ndim == 3:
        fy = fy[..., None]
        fx = fx[..., None]
    out = (img[np.ix_(y0, x0)] * (1 - fy) * (1 - fx)
           + img[np.ix_(y1, x0)] * fy * (1 - fx)
           + img[np.ix_(y0, x1)] * (1 - fy) * fx
           + img[np.ix_(y1, x1)] * fy * fx)
    return out.astype(np.float32)


def _laplacian(shape: tuple[int, int]) -> sp.csr_matrix:
    h, w = shape
    n = h * w
    main = np.full(n, 4.0)
    side = np.full(n - 1, -1.0)
    side[np.arange(1, n) % w == 0] = 0.0
    updown = np.full(n - w, -1.0)
    return sp.diags([main, side, side, updown, updown],
                    [0, 1, -1, w, -w], format="csr")


def _guidance(region: np.ndarray, scene_patch: np.ndarray,
              mask: np.ndarray | None) -> np.ndarray:
    """Divergence of the guidance gradient field for one channel."""
    if mask is None:
        gx_r = np.diff(region, axis=1)
        gy_r = np.diff(region, axis=0)
        gx, gy = gx_r, gy_r
    else:
        gx_r, gy_r = np.diff(region, axis=1), np.diff(region, axis=0)
        gx_s, gy_s = np.diff(scene_patch, axis=1), np.diff(scene_patch, axis=0)
        # edge is foreground if either endpoint is inside the mask
        fx = np.maximum(mask[:, 1:], mask[:, :-1]) > 0.5
        fy = np.maximum(mask[1:, :], mask[:-1, :]) > 0.5
        gx = np.where(fx, gx_r, np.where(np.abs(gx_r) >= np.abs(gx_s), gx_r, gx_s))
        gy = np.where(fy, gy_r, np.where(np.abs(gy_r) >= np.abs(gy_s), gy_r, gy_s))
    div = np.zeros_like(region)
    div[:, :-1] -= gx
    div[:, 1:] += gx
    div[:-1, :] -= gy
    div[1:, :] += gy
    return div   # equals the +4/-1 Laplacian applied to the guidance field


def poisson_blend(scene: np.ndarray, region: np.ndarray,
                  box: tuple[int, int, int, int],
                  mask: np.ndarray | None = None,
                  residual_tol: float = 1e-4) -> np.ndarray:
    """Solve Laplacian(result) = Laplacian(region) inside the box with the
    scene as Dirichlet boundary; pixels outside the box are untouched.

    ``mask`` switches on mask-guided mixed gradients: inside the soft
    foreground the patch gradients are used; elsewhere, the stronger of
    patch and scene gradients.
    """
    x0, y0, x1, y1 = box
    if region.shape[:2] != (y1 - y0, x1 - x0):
        raise errors.BadShape(
            f"region {region.shape[:2]} vs box {(y1 - y0, x1 - x0)}")
    ih, iw = y1 - y0 - 2, x1 - x0 - 2   # interior (unknown) grid
    result = scene.astype(np.float64).copy()
    if ih <= 0 or iw <= 0:
        return result.astype(np.float32)

    a = _laplacian((ih, iw))
    inv_diag = 1.0 / a.diagonal()
    precond = LinearOperator(a.shape, matvec=lambda v: inv_diag * v)
    maxiter = int(10 * math.sqrt(ih * iw) + 500)

    scene_box = scene[y0:y1, x0:x1].astype(np.float64)
    region = region.astype(np.float64)
    n_ch = scene.shape[2] if scene.ndim == 3 else 1
    for ch in range(n_ch):
        reg_c = region[..., ch] if region.ndim == 3 else region
        scn_c = scene_box[..., ch] if scene.ndim == 3 else scene_box
        b = _guidance(reg_c, scn_c, mask)[1:-1, 1:-1].copy()
        # Dirichlet boundary contributions from the fixed ring
        b[0, :] += scn_c[0, 1:-1]
        b[-1, :] += scn_c[-1, 1:-1]
        b[:, 0] += scn_c[1:-1, 0]
        b[:, -1] += scn_c[1:-1, -1]
        rhs = b.ravel()
        x, info = cg(a, rhs, rtol=1e-12, atol=1e-8, maxiter=maxiter, M=precond)
        resid = np.max(np.abs(a @ x - rhs))
        if info != 0 or resid > residual_tol:
            raise errors.SolverDivergence(
                f"CG residual {resid:.2e} after cap {maxiter} iterations")
        if scene.ndim == 3:
            result[y0 + 1:y1 - 1, x0 + 1:x1 - 1, ch] = x.reshape(ih, iw)
        else:
            result[y0 + 1:y1 - 1, x0 + 1:x1 - 1] = x.reshape(ih, iw)
    return result.astype(np.float32)


def blend(scene: np.ndarray, patch: np.ndarray,
          box: tuple[int, int, int, int],
          mask: np.ndarray | None = None,
          mode: str = "poisson") -> np.ndarray:
    """Warp ``patch`` into ``box`` and composite it into ``scene``."""
    x0, y0, x1, y1 = box
    h, w = scene.shape[:2]
    if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
        raise errors.BoxOutOfBounds(f"box {box} outside {w}x{h} scene")
    if mask is not None:
        region, wmask = warp_patch(patch, box, mask)
    else:
        region, wmask = warp_patch(patch, box), None
    out = scene.astype(np.float32).copy()
    if mode == "hard":
        out[y0:y1, x0:x1] = region
    elif mode == "alpha":
        if wmask is None:
            raise errors.BadShape("alpha mode requires a mask")
        m = wmask[..., None] if out.ndim == 3 else wmask
        out[y0:y1, x0:x1] = m * region + (1 - m) * out[y0:y1, x0:x1]
    elif mode == "poisson":
        out = poisson_blend(scene, region, box, mask=wmask)
    else:
        raise ValueError(f"unknown blend mode {mode!r}")
    return np.clip(out, 0.0, 1.0)
