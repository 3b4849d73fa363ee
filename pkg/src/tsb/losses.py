"""Training losses: typeface perceptual triple, content cross-entropy,
mask-split reconstruction, cyclic reconstruction, and adversarial terms.
"""

from __future__ import annotations

import dataclasses
import math

import torch
import torch.nn.functional as F

from . import errors
from .config import LossWeights
from .networks.generator import GenOutput

_EPS = 1e-8


@dataclasses.dataclass
class LossReport:
    l_per: float = 0.0
    l_tex: float = 0.0
    l_emb: float = 0.0
    l_R: float = 0.0
    l_rec: float = 0.0
    l_cyc: float = 0.0
    l_D_g: float = 0.0
    l_D_d: float = 0.0
    r1: float = 0.0
    path_len: float = 0.0
    combined: float = 0.0

    def expected_combined(self, w: LossWeights) -> float:
        return (self.l_D_g + w.rec_char * self.l_R
                + w.per * self.l_per + w.tex * self.l_tex + w.emb * self.l_emb
                + w.rec_img * self.l_rec + w.cyc * self.l_cyc)

    def check_algebra(self, w: LossWeights, rel_tol: float = 1e-5) -> None:
        expect = self.expected_combined(w)
        if abs(self.combined - expect) > rel_tol * max(1.0, abs(expect)):
            raise AssertionError(
                f"combined {self.combined} != weighted sum {expect}")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def finite(self) -> bool:
        return all(math.isfinite(v) for v in dataclasses.asdict(self).values())


# ---------------------------------------------------------------------------
# Perceptual triple

def gram_matrix(feat: torch.Tensor) -> torch.Tensor:
    """Channel Gram matrix normalized by the feature element count."""
    b, c, h, w = feat.shape
    flat = feat.reshape(b, c, h * w)
    return flat @ flat.transpose(1, 2) / (c * h * w)


def perceptual_losses(classifier, real: torch.Tensor, fake: torch.Tensor):
    """(l_per, l_tex, l_emb) from the frozen typeface classifier."""
    if real.shape != fake.shape:
        raise errors.BadShape(f"{tuple(real.shape)} vs {tuple(fake.shape)}")
    fr = classifier.extract_features(real)
    ff = classifier.extract_features(fake)
    l_per = sum((fr.maps[k] - ff.maps[k]).abs().sum(dim=(1, 2, 3))
                / fr.maps[k][0].numel()
                for k in fr.maps).mean()
    l_tex = torch.stack(
        [(gram_matrix(fr.maps[k]) - gram_matrix(ff.maps[k])).abs().mean(dim=(1, 2))
         for k in fr.maps]).mean()
    l_emb = (fr.psi - ff.psi).abs().mean()
    return l_per, l_tex, l_emb


# ---------------------------------------------------------------------------
# Content loss

def char_cross_entropy(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Per-character CE, masking steps after the end token.

    ``logits``: [B, T, K]; ``targets``: [B, T] index tensor, EOS-padded.
    The EOS step itself is supervised; later steps are ignored.
    """
    if logits.shape[:2] != targets.shape:
        raise errors.BadShape(f"{tuple(logits.shape)} vs {tuple(targets.shape)}")
    b, t, k = logits.shape
    ce = F.cross_entropy(logits.reshape(b * t, k), targets.reshape(b * t),
                         reduction="none").view(b, t)
    is_eos = targets == 1
    first_eos = torch.where(is_eos.any(dim=1), is_eos.float().argmax(dim=1),
                            torch.full_like(targets[:, 0], t - 1))
    steps = torch.arange(t, device=targets.device)[None]
    valid = (steps <= first_eos[:, None]).float()
    return (ce * valid).sum() / valid.sum().clamp_min(1.0)


def content_loss(recognizer, outputs: list[GenOutput], targets: list[str]) -> torch.Tensor:
    """Mean per-character CE over {image, mask} streams of each output."""
    if len(outputs) != len(targets):
        raise errors.BadShape("outputs/targets length mismatch")
    enc = recognizer.encode_text(targets)
    losses = []
    for i, out in enumerate(outputs):
        # one GenOutput per target string; batch dim inside each output
        t = enc[i][None].expand(out.image.shape[0], -1).to(out.image.device)
        for stream in (out.clamped(), out.mask.repeat(1, 3, 1, 1)):
            logits = recognizer(stream, targets=t)
            losses.append(char_cross_entropy(logits, t))
    return torch.stack(losses).mean()


def content_loss_batch(recognizer, outputs: list[GenOutput],
                       target_batches: list[list[str]]) -> torch.Tensor:
    """Like :func:`content_loss` but each output carries its own batch of strings."""
    losses = []
    for out, texts in zip(outputs, target_batches):
        t = recognizer.encode_text(texts).to(out.image.device)
        for stream in (out.clamped(), out.mask.repeat(1, 3, 1, 1)):
            logits = recognizer(stream, targets=t)
            losses.append(char_cross_entropy(logits, t))
    return torch.stack(losses).mean()


# ---------------------------------------------------------------------------
# Reconstruction

def reconstruction_loss(out: GenOutput, target: torch.Tensor,
                        alpha_fg: float = 1.0, alpha_bg: float = 1.0) -> torch.Tensor:
    """Mask-split L1: foreground and background terms, each normalized by
    its own mask mass."""
    img = out.image
    if img.shape != target.shape:
        raise errors.BadShape(f"{tuple(img.shape)} vs {tuple(target.shape)}")
    mask = out.mask
    c = img.shape[1]
    diff = (img - target).abs()
    fg = (mask * diff).sum() / (mask.sum() * c + _EPS)
    bg = ((1 - mask) * diff).sum() / ((1 - mask).sum() * c + _EPS)
    return alpha_fg * fg + alpha_bg * bg


def stitch_into_context(context: torch.Tensor, boxes: torch.Tensor,
                        out: GenOutput) -> torch.Tensor:
    """Mask-composited paste of generated patches into context images.

    Differentiable w.r.t. the generated image and mask; the context is
    treated as constant. ``boxes`` are integer pixel boxes [B, 4].
    """
    stitched = context.clone()
    for i in range(context.shape[0]):
        x0, y0, x1, y1 = (int(v) for v in boxes[i])
        patch = F.interpolate(out.image[i:i + 1].clamp(0, 1), size=(y1 - y0, x1 - x0),
                              mode="bilinear", align_corners=False)[0]
        m = F.interpolate(out.mask[i:i + 1], size=(y1 - y0, x1 - x0),
                          mode="bilinear", align_corners=False)[0]
        region = context[i, :, y0:y1, x0:x1]
        stitched[i, :, y0:y1, x0:x1] = m * patch + (1 - m) * region
    return stitched


def cyclic_loss(style_encoder, mapper, generator,
                context: torch.Tensor, boxes: torch.Tensor,
                out_c1: GenOutput, e_c1: torch.Tensor,
                target_crop: torch.Tensor) -> torch.Tensor:
    """Re-encode style from the stitched fake context, regenerate the
    original content, and score it against the source crop."""
    stitched = stitch_into_context(context, boxes, out_c1)
    e_s_fake = style_encoder(stitched, boxes)
    w = mapper(e_s_fake)
    out_cyc = generator(e_c1, w)
    return reconstruction_loss(out_cyc, target_crop)


# ---------------------------------------------------------------------------
# Adversarial terms

def g_nonsaturating_loss(fake_scores: torch.Tensor) -> torch.Tensor:
    return F.softplus(-fake_scores).mean()


def d_logistic_loss(real_scores: torch.Tensor, fake_scores: torch.Tensor) -> torch.Tensor:
    return F.softplus(-real_scores).mean() + F.softplus(fake_scores).mean()


def r1_penalty(discriminator, real: torch.Tensor) -> torch.Tensor:
    """Squared input-gradient norm of D at real samples."""
    real = real.detach().requires_grad_(True)
    scores = discriminator(real)
    grad, = torch.autograd.grad(scores.sum(), real, create_graph=True)
    return grad.pow(2).sum(dim=(1, 2, 3)).mean()


class PathLengthPenalty:
    """Lazy path-length regularizer with an EMA of the mean path length."""

    def __init__(self, decay: float = 0.01):
        self.decay = decay
        self.mean = 0.0

    def __call__(self, image: torch.Tensor, styles: torch.Tensor) -> torch.Tensor:
        noise = torch.randn_like(image) / math.sqrt(image.shape[2] * image.shape[3])
        grad, = torch.autograd.grad((image * noise).sum(), styles, create_graph=True)
        lengths = grad.pow(2).sum(dim=2).mean(dim=1).sqrt()
        penalty = (lengths - self.mean).pow(2).mean()
        self.mean += self.decay * (lengths.detach().mean().item() - self.mean)
        return penalty
