"""Quantitative evaluation over a paired synthetic set."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from . import metrics, pipeline, synth
from .blend import _resize
from .data import _load_rgb
from .metrics import MetricReport

EVAL_SIZE = (64, 256)


def _pairs(manifest: str | Path):
    root = Path(manifest).parent
    records = synth.load_manifest(manifest)
    by_id: dict[int, dict] = {}
    for rec in records:
        if rec.pair_id is None:
            continue
        by_id.setdefault(rec.pair_id, {})[rec.role] = rec
    for pid in sorted(by_id):
        pair = by_id[pid]
        if "source" in pair and "target" in pair:
            yield root, pair["source"], pair["target"]


def evaluate_paired(models, manifest: str | Path,
                    recognizer=None, classifier=None,
                    which: tuple[str, ...] = ("mse", "ssim", "psnr"),
                    n_max: int | None = None, charset: str = "",
                    max_len: int = 24):
    """Generate target-content words from source styles and score them.

    Returns (MetricReport, samples) where samples are (generated, target)
    image pairs resized to 64x256 for grid rendering.
    """
    mses, ssims, psnrs = [], [], []
    preds, targets_text = [], []
    feats_real, feats_fake = [], []
    samples = []
    n_done = 0
    for root, src, tgt in _pairs(manifest):
        if n_max is not None and n_done >= n_max:
            break
        scene = _load_rgb(root / src.image_path)
        target = _load_rgb(root / tgt.image_path)
        text2 = tgt.transcriptions[0]
        result = pipeline.transfer(models, scene, src.word_boxes[0], text2,
                                   charset=charset, max_len=max_len)
        gen = _resize(result.patch, *EVAL_SIZE)
        ref = _resize(target, *EVAL_SIZE)
        if "mse" in which:
            mses.append(metrics.mse(gen, ref))
        if "ssim" in which:
            ssims.append(metrics.ssim(gen, ref))
        if "psnr" in which:
            psnrs.append(metrics.psnr(gen, ref))
        if "acc" in which and recognizer is not None:
            x = torch.from_numpy(gen.astype(np.float32)).permute(2, 0, 1)[None]
            preds.append(recognizer.recognize(x).decoded[0])
            targets_text.append(text2)
        if "frechet" in which and classifier is not None:
            with torch.no_grad():
                for feats, img in ((feats_fake, gen), (feats_real, ref)):
                    x = torch.from_numpy(img.astype(np.float32)).permute(2, 0, 1)[None]
                    feats.append(classifier.extract_features(x).psi[0].numpy())
        if len(samples) < 16:
            samples.append((gen, ref))
        n_done += 1

    report = MetricReport(n_samples=n_done)
    if mses:
        report.mse = float(np.mean(mses))
    if ssims:
        report.ssim = float(np.mean(ssims))
    if psnrs:
        report.psnr = float(np.mean(psnrs))
    if preds:
        report.rec_acc = metrics.recognition_accuracy(preds, targets_text)
    if feats_real:
        report.frechet = metrics.frechet_distance(
            np.stack(feats_real), np.stack(feats_fake), shrinkage=True)
    return report, samples


def reconstruction_mse(models, manifest: str | Path, charset: str,
                       max_len: int = 24, n_max: int | None = None) -> float:
    """MSE of regenerated-c1 outputs against their own source crops."""
    vals = []
    root = Path(manifest).parent
    for rec in synth.load_manifest(manifest):
        if n_max is not None and len(vals) >= n_max:
            break
        if rec.role == "target":
            continue
        scene = _load_rgb(root / rec.image_path)
        box = rec.word_boxes[0]
        text = rec.transcriptions[0]
        result = pipeline.transfer(models, scene, box, text,
                                   charset=charset, max_len=max_len)
        x0, y0, x1, y1 = box
        crop = _resize(scene[y0:y1, x0:x1], *EVAL_SIZE)
        gen = _resize(result.patch, *EVAL_SIZE)
        vals.append(metrics.mse(gen, crop))
    return float(np.mean(vals)) if vals else float("nan")
