"""Evaluation metrics: MSE / SSIM / PSNR, exact-match recognition
accuracy, and a Fréchet distance with a pluggable embedding network.

The Fréchet embedding defaults to the typeface classifier's penultimate
vector, so reported values are NOT comparable to Inception-based FID
numbers from the literature.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.ndimage import convolve

from . import errors

PSNR_CAP = 100.0


@dataclasses.dataclass
class MetricReport:
    n_samples: int
    mse: float | None = None
    ssim: float | None = None
    psnr: float | None = None
    rec_acc: float | None = None
    frechet: float | None = None

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise errors.BadShape(f"{a.shape} vs {b.shape}")


def mse(a: np.ndarray, b: np.ndarray) -> float:
    _check_pair(a, b)
    return float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    err = mse(a, b)
    if err < 1e-10:
        return PSNR_CAP
    return min(PSNR_CAP, float(10.0 * np.log10(1.0 / err)))


def _gaussian_kernel(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    r = np.arange(size) - size // 2
    k = np.exp(-(r ** 2) / (2 * sigma ** 2))
    k2 = np.outer(k, k)
    return k2 / k2.sum()


def ssim(a: np.ndarray, b: np.ndarray, k1: float = 0.01, k2: float = 0.03) -> float:
    """SSIM with an 11x11 Gaussian window (sigma 1.5), data range 1.

    Multichannel inputs are averaged over channels.
    """
    _check_pair(a, b)
    if a.ndim == 3:
        return float(np.mean([ssim(a[..., c], b[..., c]) for c in range(a.shape[2])]))
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    win = _gaussian_kernel()
    c1, c2 = k1 ** 2, k2 ** 2
    mu_a = convolve(a, win, mode="reflect")
    mu_b = convolve(b, win, mode="reflect")
    var_a = convolve(a * a, win, mode="reflect") - mu_a ** 2
    var_b = convolve(b * b, win, mode="reflect") - mu_b ** 2
    cov = convolve(a * b, win, mode="reflect") - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def recognition_accuracy(predictions: list[str], targets: list[str]) -> float:
    """Case-sensitive exact-match word accuracy."""
    if not targets:
        raise errors.EmptySet("no samples to score")
    if len(predictions) != len(targets):
        raise errors.BadShape("predictions/targets length mismatch")
    hits = sum(p == t for p, t in zip(predictions, targets))
    return hits / len(targets)


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Matrix square root via eigendecomposition of the symmetrized input;
    negative eigenvalues (round-off) are clamped at zero."""
    sym = (mat + mat.T) / 2
    vals, vecs = np.linalg.eigh(sym)
    vals = np.clip(vals, 0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(feats_a: np.ndarray, feats_b: np.ndarray,
                     shrinkage: bool = False) -> float:
    """Fréchet distance between Gaussian fits of two feature sets [N, D]."""
    feats_a = np.asarray(feats_a, dtype=np.float64)
    feats_b = np.asarray(feats_b, dtype=np.float64)
    d = feats_a.shape[1]
    for f in (feats_a, feats_b):
        if f.shape[0] < d + 1 and not shrinkage:
            raise errors.TooFewSamples(
                f"{f.shape[0]} samples for dim {d}; enable shrinkage")
    mu_a, mu_b = feats_a.mean(0), feats_b.mean(0)
    cov_a = np.cov(feats_a, rowvar=False)
    cov_b = np.cov(feats_b, rowvar=False)
    if shrinkage:
        lam = 0.1
        cov_a = (1 - lam) * cov_a + lam * np.eye(d) * np.trace(cov_a) / d
        cov_b = (1 - lam) * cov_b + lam * np.eye(d) * np.trace(cov_b) / d
    # Tr sqrt(A B) computed via the symmetric product sqrt(A) B sqrt(A)
    sqrt_a = _sqrtm_psd(cov_a)
    cross = _sqrtm_psd(sqrt_a @ cov_b @ sqrt_a)
    dist = float(np.sum((mu_a - mu_b) ** 2)
                 + np.trace(cov_a) + np.trace(cov_b) - 2 * np.trace(cross))
    return max(0.0, dist)
