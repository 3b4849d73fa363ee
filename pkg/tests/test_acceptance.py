"""Acceptance gate: one printed pass/fail line per criterion.

Run with ``pytest -v tests/test_acceptance.py -s`` to see the per-criterion
lines.  Criteria whose stated scale is infeasible on a single CPU core
(full-scale overfit, full desk-scale end-to-end) are covered by an
always-on shrunk counterpart here, and by the full-scale variant gated
behind TSB_RUN_SLOW / TSB_RUN_E2E respectively.
"""

import dataclasses
import time

import numpy as np
import pytest
import torch
from torch import nn

from tsb import blend as blend_mod
from tsb import errors, evaluate, losses, metrics, pretrain, synth
from tsb.blend import poisson_blend
from tsb.config import DEFAULT_CHARSET, LossWeights, TrainConfig
from tsb.content import render_content
from tsb.data import SelfSupDataset
from tsb.losses import LossReport
from tsb.networks.aux import Recognizer, TypefaceClassifier
from tsb.networks.encoders import ContentEncoder, StyleEncoder
from tsb.networks.generator import Discriminator, Generator, ModulatedConv2d
from tsb.networks.mapping import StyleMapper, pixel_norm
from tsb.trainer import Trainer

from conftest import env_gated


def _verdict(name: str, ok: bool, detail: str = "") -> None:
    line = f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# Shape conformance

STYLE_TABLE = {
    "conv0_1": (32, 256, 256), "conv0_2": (64, 256, 256),
    "pool1": (64, 128, 128), "resblock1": (128, 128, 128),
    "conv1": (128, 128, 128), "pool2": (128, 64, 64),
    "resblock2": (256, 64, 64), "conv2": (256, 64, 64),
    "pool3": (256, 32, 32), "resblock3": (512, 32, 32),
    "conv3": (512, 32, 32), "pool4": (512, 16, 16),
    "resblock4": (512, 16, 16), "conv4_1": (512, 16, 16),
}
CONTENT_TABLE = {
    "conv0_1": (32, 64, 256), "conv0_2": (64, 64, 256),
    "pool1": (64, 32, 128), "resblock1": (128, 32, 128),
    "conv1": (128, 32, 128), "pool2": (128, 16, 64),
    "resblock2": (256, 16, 64), "conv2": (256, 16, 64),
    "pool3": (256, 8, 32), "resblock3": (512, 8, 32),
    "conv3": (512, 8, 32), "pool4": (512, 4, 16),
    "resblock4": (512, 4, 16), "conv4_1": (512, 4, 16),
}
GEN_TAPS = [(4, 16), (8, 32), (16, 64), (32, 128), (64, 256)]


@torch.no_grad()
def test_shape_conformance():
    start = time.time()
    torch.manual_seed(0)
    mismatches = []

    style_enc = StyleEncoder().eval()
    taps = style_enc.forward_taps(torch.randn(1, 3, 256, 256))
    for name, want in STYLE_TABLE.items():
        got = tuple(taps[name].shape[1:])
        if got != want:
            mismatches.append(f"style {name}: {got} != {want}")
    e_s = style_enc(torch.randn(1, 3, 256, 256),
                    torch.tensor([[32.0, 96.0, 224.0, 160.0]]))
    if tuple(e_s.shape) != (1, 512):
        mismatches.append(f"style code {tuple(e_s.shape)} != (1, 512)")

    content_enc = ContentEncoder().eval()
    taps = content_enc.forward_taps(torch.randn(1, 1, 64, 256))
    for name, want in CONTENT_TABLE.items():
        got = tuple(taps[name].shape[1:])
        if got != want:
            mismatches.append(f"content {name}: {got} != {want}")

    mapper = StyleMapper().eval()
    w = mapper(torch.randn(1, 512))
    if tuple(w.shape) != (1, 15, 512):
        mismatches.append(f"mapper output {tuple(w.shape)} != (1, 15, 512)")

    gen = Generator().eval()
    out, gtaps = gen(torch.randn(1, 512, 4, 16), torch.randn(1, 15, 512),
                     return_taps=True)
    if gtaps != GEN_TAPS:
        mismatches.append(f"generator taps {gtaps} != {GEN_TAPS}")
    if tuple(out.image.shape) != (1, 3, 64, 256):
        mismatches.append(f"generator image {tuple(out.image.shape)}")
    if tuple(out.mask.shape) != (1, 1, 64, 256):
        mismatches.append(f"generator mask {tuple(out.mask.shape)}")

    elapsed = time.time() - start
    if elapsed >= 60.0:
        mismatches.append(f"runtime {elapsed:.1f}s >= 60s")
    _verdict("shape-conformance", not mismatches,
             "; ".join(mismatches) or f"all layer shapes exact, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# Normalization oracle

def test_norm_oracle():
    rng = np.random.default_rng(0)
    max_err = 0.0
    for _ in range(1000):
        e = rng.normal(0, 3, 512)
        ref = e / (np.sqrt(np.mean(e ** 2)) + 1e-8)
        ours = pixel_norm(torch.from_numpy(e)).numpy()
        max_err = max(max_err, float(np.abs(ours - ref).max()))
    _verdict("norm-oracle", max_err < 1e-6, f"max abs err {max_err:.2e} < 1e-6")


# ---------------------------------------------------------------------------
# Loss algebra

def test_loss_algebra():
    rng = np.random.default_rng(1)
    w = LossWeights()
    worst = 0.0
    for _ in range(100):
        terms = {k: float(rng.uniform(0, 10)) for k in
                 ("l_per", "l_tex", "l_emb", "l_R", "l_rec", "l_cyc", "l_D_g")}
        # independently written weighted sum (defaults 1/500/1/1/10/1)
        expect = (terms["l_D_g"] + 1.0 * terms["l_R"] + 1.0 * terms["l_per"]
                  + 500.0 * terms["l_tex"] + 1.0 * terms["l_emb"]
                  + 10.0 * terms["l_rec"] + 1.0 * terms["l_cyc"])
        rep = LossReport(**terms, combined=expect)
        rep.check_algebra(w, rel_tol=1e-5)
        rel = abs(rep.expected_combined(w) - expect) / max(1.0, abs(expect))
        worst = max(worst, rel)
    _verdict("loss-algebra", worst < 1e-5,
             f"100 random steps, worst rel err {worst:.2e} < 1e-5")


# ---------------------------------------------------------------------------
# Gradient checks (central finite differences on /8-scaled networks)

def _fd_rel_err(f, x: torch.Tensor, idx, eps: float = 1e-5) -> float:
    x = x.clone().detach().requires_grad_(True)
    f(x).backward()
    analytic = x.grad[idx].item()
    with torch.no_grad():
        xp = x.detach().clone()
        xp[idx] += eps
        xm = x.detach().clone()
        xm[idx] -= eps
        fd = (f(xp).item() - f(xm).item()) / (2 * eps)
    return abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-8)


def test_gradient_checks():
    torch.manual_seed(0)
    errs = {}
    idx = (0, 1, 7, 9)

    clf = TypefaceClassifier(n_fonts=4, shrink=8).double().eval()
    real = torch.rand(1, 3, 64, 64, dtype=torch.float64)
    fake0 = torch.rand(1, 3, 64, 64, dtype=torch.float64)
    for i, name in enumerate(("l_per", "l_tex", "l_emb")):
        errs[name] = _fd_rel_err(
            lambda x, i=i: losses.perceptual_losses(clf, real, x)[i], fake0, idx)

    rec = Recognizer(use_tps=False, shrink=8).double().eval()
    img = torch.rand(1, 3, 32, 96, dtype=torch.float64) * 0.8 + 0.1
    mask = torch.rand(1, 1, 32, 96, dtype=torch.float64) * 0.8 + 0.1
    from tsb.networks.generator import GenOutput
    errs["l_R"] = _fd_rel_err(
        lambda x: losses.content_loss(rec, [GenOutput(x, mask)], ["Hi"]), img, idx)

    target = torch.rand(1, 3, 16, 32, dtype=torch.float64)
    rimg = torch.rand(1, 3, 16, 32, dtype=torch.float64)
    rmask = torch.rand(1, 1, 16, 32, dtype=torch.float64) * 0.8 + 0.1
    errs["l_rec/image"] = _fd_rel_err(
        lambda x: losses.reconstruction_loss(GenOutput(x, rmask), target), rimg, idx)
    errs["l_rec/mask"] = _fd_rel_err(
        lambda x: losses.reconstruction_loss(GenOutput(rimg, x), target),
        rmask, (0, 0, 7, 9))

    torch.manual_seed(3)
    style_enc = StyleEncoder(shrink=16).double().eval()
    mapper = StyleMapper(dim=32).double().eval()
    gen = Generator(style_dim=32, shrink=16).double().eval()
    context = torch.rand(1, 3, 64, 64, dtype=torch.float64)
    boxes = torch.tensor([[8.0, 16.0, 56.0, 48.0]], dtype=torch.float64)
    e_c1 = torch.randn(1, 32, 4, 8, dtype=torch.float64)
    crop = torch.rand(1, 3, 64, 128, dtype=torch.float64)
    cimg = torch.rand(1, 3, 64, 128, dtype=torch.float64) * 0.8 + 0.1
    cmask = torch.rand(1, 1, 64, 128, dtype=torch.float64) * 0.8 + 0.1
    errs["l_cyc"] = _fd_rel_err(
        lambda x: losses.cyclic_loss(style_enc, mapper, gen, context, boxes,
                                     GenOutput(x, cmask), e_c1, crop), cimg, idx)

    disc = Discriminator(input_size=(8, 32), shrink=8).double().eval()
    dimg = torch.rand(2, 3, 8, 32, dtype=torch.float64)
    errs["l_D_g"] = _fd_rel_err(
        lambda x: losses.g_nonsaturating_loss(disc(x)), dimg, (1, 2, 3, 11))

    worst = max(errs.values())
    ok = worst < 1e-2

    # R1 of a linear discriminator is exactly the squared weight norm
    class _LinearD(nn.Module):
        def __init__(self):
            super().__init__()
            torch.manual_seed(4)
            self.w = nn.Parameter(torch.randn(3, 8, 8, dtype=torch.float64))

        def forward(self, x):
            return (x * self.w).sum(dim=(1, 2, 3))

    lin = _LinearD()
    r1 = losses.r1_penalty(lin, torch.rand(2, 3, 8, 8, dtype=torch.float64))
    r1_err = abs(r1.item() - lin.w.pow(2).sum().item())
    ok = ok and r1_err < 1e-6

    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
    _verdict("gradient-checks", ok,
             f"FD rel errs: {detail} (< 1e-2); R1 linear err {r1_err:.1e} < 1e-6")


# ---------------------------------------------------------------------------
# Modulation invariant

def test_modulation_invariant():
    torch.manual_seed(0)
    conv = ModulatedConv2d(512, 512, 3, style_dim=512)
    with torch.no_grad():
        scales = conv.affine(torch.ones(1, 512))
        w = conv.demodulated_weight(scales)
        norms = w.pow(2).sum(dim=(2, 3, 4)).sqrt()
    err = (norms - 1.0).abs().max().item()
    _verdict("modulation-invariant", err < 1e-5,
             f"max |per-channel norm - 1| = {err:.2e} < 1e-5")


# ---------------------------------------------------------------------------
# Variable-width contract
#
# The per-layer tables fix the spatial contract: a 64xW content image maps
# to a 4x(W/16) feature map and the five generator blocks upsample 16x, so
# the output width equals the content width (the tables' canonical probe
# 64x256 -> 64x256).  Widths {128, 256, 512} are exercised end to end.

@torch.no_grad()
def test_variable_width_contract(trained_ckpt):
    from tsb.trainer import load_models

    torch.manual_seed(0)
    bad = []
    # width contract at full scale with a fresh net (shapes only: a
    # freshly initialized net saturates the mask sigmoid past float
    # rounding, so the open interval is checked on a trained model below)
    content_enc = ContentEncoder().eval()
    mapper = StyleMapper().eval()
    gen = Generator().eval()
    styles = mapper(torch.randn(1, 512))
    for width in (128, 256, 512):
        e_c = content_enc(torch.rand(1, 1, 64, width))
        out = gen(e_c, styles)
        if tuple(out.image.shape) != (1, 3, 64, width):
            bad.append(f"width {width}: image {tuple(out.image.shape)}")
        if tuple(out.mask.shape) != (1, 1, 64, width):
            bad.append(f"width {width}: mask {tuple(out.mask.shape)}")
        if not torch.isfinite(out.mask).all() or out.mask.min() < 0 or out.mask.max() > 1:
            bad.append(f"width {width}: mask out of [0,1]")

    # open-interval mask on a trained desk-scale model at the same widths
    models = load_models(trained_ckpt)
    styles = models.mapper(torch.randn(1, models.generator.style_dim))
    for width in (128, 256, 512):
        e_c = models.content_enc(torch.rand(1, 1, 64, width))
        out = models.generator(e_c, styles)
        if tuple(out.mask.shape) != (1, 1, 64, width):
            bad.append(f"trained width {width}: mask {tuple(out.mask.shape)}")
        lo, hi = out.mask.min().item(), out.mask.max().item()
        if not (0.0 < lo and hi < 1.0):
            bad.append(f"trained width {width}: mask range [{lo:.3g}, {hi:.3g}]")
    _verdict("variable-width-contract", not bad,
             "; ".join(bad) or "widths 128/256/512 preserved, mask in (0,1)")


# ---------------------------------------------------------------------------
# Overfit smoke

def _single_sample_trainer(manifest, batch=1):
    torch.manual_seed(100)
    clf = TypefaceClassifier(n_fonts=4, shrink=8).eval()
    torch.manual_seed(101)
    rec = Recognizer(use_tps=False, shrink=8).eval()
    cfg = TrainConfig(batch=batch, seed=0, shrink=8, checkpoint_every=0)
    trainer = Trainer(cfg, clf, rec)
    ds = SelfSupDataset(manifest)
    trainer.lexicon = ds.lexicon()
    return trainer, ds


def test_overfit_smoke(selfsup_manifest, tmp_path):
    # shrunk counterpart of the 500-step criterion: 50 steps on one sample
    # at /8 scale must cut l_rec in half (full run: TSB_RUN_SLOW below)
    trainer, ds = _single_sample_trainer(selfsup_manifest)
    batch = ds.batch([0])
    recs = [trainer.train_step(batch).l_rec for _ in range(50)]
    drop = 1.0 - min(recs) / recs[0]
    ok = drop >= 0.5

    # resume-from-checkpoint reproduces the uninterrupted run within 1e-6
    t_full, _ = _single_sample_trainer(selfsup_manifest)
    full = [t_full.train_step(batch) for _ in range(3)][-1]
    t_part, _ = _single_sample_trainer(selfsup_manifest)
    for _ in range(2):
        t_part.train_step(batch)
    ckpt = tmp_path / "mid.ckpt"
    t_part.save(ckpt)
    resumed = Trainer.resume(ckpt, t_part.classifier, t_part.recognizer)
    cont = resumed.train_step(batch)
    a, b = dataclasses.asdict(full), dataclasses.asdict(cont)
    resume_err = max(abs(a[k] - b[k]) / max(1.0, abs(a[k])) for k in a)
    ok = ok and resume_err <= 1e-6
    _verdict("overfit-smoke", ok,
             f"l_rec {recs[0]:.4f} -> {min(recs):.4f} ({drop:.0%} >= 50%), "
             f"resume max rel diff {resume_err:.1e} <= 1e-6")


@env_gated("TSB_RUN_SLOW")
@pytest.mark.slow
def test_overfit_smoke_full_scale(selfsup_manifest, tmp_path):
    torch.manual_seed(100)
    clf = TypefaceClassifier(n_fonts=4).eval()
    torch.manual_seed(101)
    rec = Recognizer(use_tps=False).eval()
    trainer = Trainer(TrainConfig(batch=1, seed=0, checkpoint_every=0), clf, rec)
    ds = SelfSupDataset(selfsup_manifest)
    trainer.lexicon = ds.lexicon()
    batch = ds.batch([0])
    recs = [trainer.train_step(batch).l_rec for _ in range(500)]
    drop = 1.0 - min(recs) / recs[0]
    _verdict("overfit-smoke-full", drop >= 0.8,
             f"l_rec {recs[0]:.4f} -> {min(recs):.4f} ({drop:.0%} >= 80%)")


# ---------------------------------------------------------------------------
# Desk-scale end to end

LEXICON = ["STOP", "GO", "Hello", "World", "Seven",
           "Nine", "Blue", "Red", "Green", "Zebra"]


def _save_word_png(out_dir, name: str, arr: np.ndarray) -> None:
    from PIL import Image

    rgb = (np.repeat(arr[:, :, None], 3, axis=2) * 255).astype(np.uint8)
    Image.fromarray(rgb).save(out_dir / name)


def _clean_word_set(out_dir, n_copies: int):
    """Closed-lexicon recognizer set: clean rendered words, no scene clutter."""
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for word in LEXICON:
        name = f"{word}.png"
        _save_word_png(out_dir, name, render_content(word, 128))
        for _ in range(n_copies):
            records.append(synth.DatasetRecord(
                image_path=name, image_size=(128, 64),
                word_boxes=[(0, 0, 128, 64)], transcriptions=[word],
                font_label=0))
    manifest = out_dir / "manifest.jsonl"
    synth.save_manifest(records, manifest)
    return manifest


def _clean_font_set(out_dir, n_fonts: int, n_per_font: int, seed: int):
    """Font-labeled clean word renderings (no scene augmentation)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    lib = synth.FontLibrary()
    rng = np.random.default_rng(seed)
    records = []
    idx = 0
    for font_id in range(n_fonts):
        for _ in range(n_per_font):
            word = synth.random_word(rng)
            name = f"f{idx:05d}.png"
            _save_word_png(out_dir, name,
                           render_content(word, 128,
                                          font_path=str(lib.paths[font_id])))
            records.append(synth.DatasetRecord(
                image_path=name, image_size=(128, 64),
                word_boxes=[(0, 0, 128, 64)], transcriptions=[word],
                font_label=font_id))
            idx += 1
    manifest = out_dir / "manifest.jsonl"
    synth.save_manifest(records, manifest)
    return manifest


def test_e2e_classifier(tmp_path):
    # shrunk counterpart: 3 fonts x 60 clean crops at /8 scale, chance 0.33
    # (full 10-font scene-augmented criterion: TSB_RUN_E2E below)
    manifest = _clean_font_set(tmp_path, n_fonts=3, n_per_font=60, seed=7)
    _, acc = pretrain.pretrain_classifier(manifest, epochs=20, seed=0, shrink=8,
                                          batch=16, log=lambda *_: None)
    _verdict("e2e-classifier", acc >= 0.8,
             f"held-out accuracy {acc:.3f} >= 0.8 (3 fonts, chance 0.33)")


def test_e2e_recognizer(tmp_path):
    manifest = _clean_word_set(tmp_path, n_copies=30)
    net, acc = pretrain.pretrain_recognizer(manifest, epochs=60, seed=0,
                                            shrink=8, use_tps=False, batch=16,
                                            log=lambda *_: None)
    probe = render_content("STOP", 128)
    x = torch.from_numpy(np.repeat(probe[None, None], 3, axis=1).astype(np.float32))
    x = torch.nn.functional.interpolate(x, size=(32, 128), mode="bilinear",
                                        align_corners=False)
    decoded = net.recognize(x).decoded[0]
    ok = acc >= 0.9 and decoded == "STOP"
    _verdict("e2e-recognizer", ok,
             f"word accuracy {acc:.3f} >= 0.9, decode('STOP') = {decoded!r}")


def test_e2e_generation_mechanics(trained_ckpt, paired_manifest):
    # shrunk counterpart of the trained-quality criterion: the full
    # generate-and-score loop must run and produce finite metrics
    from tsb.trainer import load_models

    models = load_models(trained_ckpt)
    report, _ = evaluate.evaluate_paired(models, paired_manifest,
                                         charset=DEFAULT_CHARSET, n_max=3)
    rec_mse = evaluate.reconstruction_mse(models, paired_manifest,
                                          charset=DEFAULT_CHARSET, n_max=3)
    ok = (report.n_samples == 3 and np.isfinite(report.mse)
          and np.isfinite(report.ssim) and np.isfinite(rec_mse))
    _verdict("e2e-generation-mechanics", ok,
             f"paired mse {report.mse:.4f}, ssim {report.ssim:.4f}, "
             f"reconstruction mse {rec_mse:.4f} (finite; thresholds under "
             f"TSB_RUN_E2E)")


@env_gated("TSB_RUN_E2E")
@pytest.mark.slow
def test_e2e_full_scale(tmp_path):
    from tsb.trainer import load_models

    font_dir = tmp_path / "fonts"
    synth.build_font_set(10, 500, seed=31, out_dir=font_dir)
    clf, clf_acc = pretrain.pretrain_classifier(
        font_dir / "manifest.jsonl", epochs=20, seed=0, log=lambda *_: None)
    _verdict("e2e-full-classifier", clf_acc >= 0.95,
             f"held-out accuracy {clf_acc:.3f} >= 0.95 (10 fonts)")

    rec_manifest = _clean_word_set(tmp_path / "words", n_copies=50)
    rec, rec_acc = pretrain.pretrain_recognizer(
        rec_manifest, epochs=40, seed=0, log=lambda *_: None)
    _verdict("e2e-full-recognizer", rec_acc >= 0.90,
             f"word accuracy {rec_acc:.3f} >= 0.90")

    train_dir = tmp_path / "train"
    synth.build_selfsup_set(5000, seed=32, out_dir=train_dir)
    trainer = Trainer(TrainConfig(seed=0, checkpoint_every=0), clf, rec)
    trainer.fit(SelfSupDataset(train_dir / "manifest.jsonl"), steps=20000,
                log=lambda *_: None)
    ckpt = tmp_path / "final.ckpt"
    trainer.save(ckpt)
    models = load_models(ckpt)

    pair_dir = tmp_path / "pairs"
    synth.build_paired_set(200, seed=33, out_dir=pair_dir)
    report, _ = evaluate.evaluate_paired(models, pair_dir / "manifest.jsonl",
                                         recognizer=rec, which=("mse", "acc"),
                                         charset=DEFAULT_CHARSET)
    rec_mse = evaluate.reconstruction_mse(models, pair_dir / "manifest.jsonl",
                                          charset=DEFAULT_CHARSET)
    _verdict("e2e-full-quality",
             report.rec_acc >= 0.80 and rec_mse <= 0.02,
             f"novel-content recognition {report.rec_acc:.3f} >= 0.80, "
             f"reconstruction mse {rec_mse:.4f} <= 0.02")


# ---------------------------------------------------------------------------
# Metric oracles

def _dense_poisson(scene, region, box, mask=None):
    x0, y0, x1, y1 = box
    ih, iw = y1 - y0 - 2, x1 - x0 - 2
    a = blend_mod._laplacian((ih, iw)).toarray()
    result = scene.astype(np.float64).copy()
    scene_box = scene[y0:y1, x0:x1].astype(np.float64)
    for ch in range(scene.shape[2]):
        b = blend_mod._guidance(region[..., ch].astype(np.float64),
                                scene_box[..., ch], mask)[1:-1, 1:-1].copy()
        b[0, :] += scene_box[0, 1:-1, ch]
        b[-1, :] += scene_box[-1, 1:-1, ch]
        b[:, 0] += scene_box[1:-1, 0, ch]
        b[:, -1] += scene_box[1:-1, -1, ch]
        x = np.linalg.solve(a, b.ravel())
        result[y0 + 1:y1 - 1, x0 + 1:x1 - 1, ch] = x.reshape(ih, iw)
    return result


def test_metric_oracles():
    rng = np.random.default_rng(5)
    img = rng.random((32, 48, 3))
    checks = {}
    checks["mse-identity"] = metrics.mse(img, img) == 0.0
    checks["ssim-identity"] = abs(metrics.ssim(img, img) - 1.0) < 1e-12
    checks["psnr-cap"] = metrics.psnr(img, img) == 100.0

    feats = rng.normal(0, 1, (64, 8))
    checks["frechet-identity"] = metrics.frechet_distance(feats, feats) < 1e-6

    x = rng.normal(0, 1, (20000, 4))
    shift = np.zeros(4)
    shift[0] = 2.0
    d = metrics.frechet_distance(x, x + shift)
    checks["frechet-mean-shift-2"] = abs(d - 4.0) < 1e-5

    scene = rng.random((32, 32, 3))
    region = rng.random((16, 16, 3))
    box = (8, 8, 24, 24)
    ours = poisson_blend(scene, region, box)
    ref = _dense_poisson(scene, region, box)
    checks["poisson-vs-dense"] = np.abs(ours.astype(np.float64) - ref).max() <= 1e-4

    # residual of the interior linear system and exact boundary rows
    x0, y0, x1, y1 = box
    a = blend_mod._laplacian((y1 - y0 - 2, x1 - x0 - 2))
    resid = 0.0
    for ch in range(3):
        b = blend_mod._guidance(region[..., ch], scene[y0:y1, x0:x1, ch],
                                None)[1:-1, 1:-1].copy()
        sol = ours[y0:y1, x0:x1, ch].astype(np.float64)
        b[0, :] += sol[0, 1:-1]
        b[-1, :] += sol[-1, 1:-1]
        b[:, 0] += sol[1:-1, 0]
        b[:, -1] += sol[1:-1, -1]
        resid = max(resid, np.abs(a @ sol[1:-1, 1:-1].ravel() - b.ravel()).max())
    checks["poisson-residual"] = resid <= 1e-4
    scene32 = scene.astype(np.float32)  # blend returns float32
    checks["poisson-boundary-exact"] = (
        np.array_equal(ours[y0, x0:x1], scene32[y0, x0:x1])
        and np.array_equal(ours[y1 - 1, x0:x1], scene32[y1 - 1, x0:x1])
        and np.array_equal(ours[y0:y1, x0], scene32[y0:y1, x0])
        and np.array_equal(ours[y0:y1, x1 - 1], scene32[y0:y1, x1 - 1]))

    failed = [k for k, v in checks.items() if not v]
    _verdict("metric-oracles", not failed,
             "; ".join(failed) or f"all {len(checks)} oracle checks exact")
