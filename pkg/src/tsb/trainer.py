"""Self-supervised training loop.

Each step: sample (style context, c1, c2), forward every network, run a
discriminator update on (real crop, fakes), then a generator update on
the combined loss. Per-step randomness (batch indices, c2 sampling) is
derived from (seed, step), so serial runs and checkpoint resumes agree
exactly; the only stateful RNG is torch's (path-length noise), which is
saved in the checkpoint.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from . import checkpoint, errors, losses, synth
from .config import TrainConfig
from .content import render_content
from .data import SelfSupBatch, SelfSupDataset
from .losses import LossReport, PathLengthPenalty
from .networks import (ContentEncoder, Discriminator, Generator, StyleEncoder,
                       StyleMapper)

PL_WEIGHT = 2.0
ADAM_BETAS = (0.0, 0.99)


class TSBModels(nn.Module):
    """All trainable networks of the transfer pipeline."""

    def __init__(self, cfg: TrainConfig):
        super().__init__()
        dim = max(4, 512 // cfg.shrink)
        self.style_enc = StyleEncoder(shrink=cfg.shrink)
        self.content_enc = ContentEncoder(shrink=cfg.shrink)
        self.mapper = StyleMapper(dim)
        self.generator = Generator(style_dim=dim, shrink=cfg.shrink)
        self.discriminator = Discriminator(shrink=cfg.shrink)

    def generator_parameters(self):
        for net in (self.style_enc, self.content_enc, self.mapper, self.generator):
            yield from net.parameters()


def arch_dict(cfg: TrainConfig) -> dict:
    return {"kind": "tsb", "shrink": cfg.shrink,
            "style_dim": max(4, 512 // cfg.shrink),
            "charset_len": len(cfg.charset), "max_len": cfg.max_content_len}


def content_tensor(texts: list[str], width: int = 256) -> torch.Tensor:
    imgs = [render_content(t, width) for t in texts]
    return torch.from_numpy(np.stack(imgs))[:, None]


class Trainer:
    def __init__(self, cfg: TrainConfig, classifier, recognizer,
                 lexicon: list[str] | None = None):
        self.cfg = cfg
        torch.manual_seed(cfg.seed)
        self.models = TSBModels(cfg)
        self.classifier = classifier
        self.recognizer = recognizer
        self.g_opt = torch.optim.Adam(list(self.models.generator_parameters()),
                                      lr=cfg.lr, betas=ADAM_BETAS)
        self.d_opt = torch.optim.Adam(self.models.discriminator.parameters(),
                                      lr=cfg.lr, betas=ADAM_BETAS)
        self.path_penalty = PathLengthPenalty()
        self.step = 0
        self.lexicon = lexicon

    # -- c2 sampling ------------------------------------------------------
    def _sample_c2(self, n: int) -> list[str]:
        rng = np.random.default_rng(
            np.random.SeedSequence([self.cfg.seed, 1, self.step]))
        if self.lexicon:
            return [self.lexicon[i] for i in rng.integers(0, len(self.lexicon), n)]
        return [synth.random_word(rng, self.cfg.charset) for _ in range(n)]

    # -- one optimization step -------------------------------------------
    def train_step(self, batch: SelfSupBatch) -> LossReport:
        m = self.models
        w_cfg = self.cfg.weights
        m.train()
        self.classifier.eval()
        self.recognizer.eval()

        c2_texts = self._sample_c2(len(batch.texts))
        c1_imgs = content_tensor(batch.texts)
        c2_imgs = content_tensor(c2_texts)
        real = batch.crop

        e_s = m.style_enc(batch.context, batch.boxes)
        w = m.mapper(e_s)
        e_c1 = m.content_enc(c1_imgs)
        e_c2 = m.content_enc(c2_imgs)
        out1 = m.generator(e_c1, w)
        out2 = m.generator(e_c2, w)

        # ---- discriminator update (both generations count as fake)
        d_real = m.discriminator(real)
        d_fake1 = m.discriminator(out1.clamped().detach())
        d_fake2 = m.discriminator(out2.clamped().detach())
        l_d = (F.softplus(-d_real).mean()
               + 0.5 * (F.softplus(d_fake1).mean() + F.softplus(d_fake2).mean()))
        d_loss = l_d
        r1_val = 0.0
        if self.cfg.r1_interval and self.step % self.cfg.r1_interval == 0:
            r1 = losses.r1_penalty(m.discriminator, real)
            r1_val = float(r1.detach())
            d_loss = d_loss + (self.cfg.r1_gamma / 2) * r1 * self.cfg.r1_interval
        self.d_opt.zero_grad(set_to_none=True)
        d_loss.backward()
        self.d_opt.step()

        # ---- generator update
        g_fake1 = m.discriminator(out1.clamped())
        g_fake2 = m.discriminator(out2.clamped())
        l_d_g = 0.5 * (F.softplus(-g_fake1).mean() + F.softplus(-g_fake2).mean())
        l_per, l_tex, l_emb = losses.perceptual_losses(
            self.classifier, real, out1.clamped())
        l_r = losses.content_loss_batch(
            self.recognizer, [out1, out2], [batch.texts, c2_texts])
        l_rec = losses.reconstruction_loss(out1, real)
        l_cyc = losses.cyclic_loss(m.style_enc, m.mapper, m.generator,
                                   batch.context, batch.boxes, out1, e_c1, real)
        combined = (l_d_g + w_cfg.rec_char * l_r
                    + w_cfg.per * l_per + w_cfg.tex * l_tex + w_cfg.emb * l_emb
                    + w_cfg.rec_img * l_rec + w_cfg.cyc * l_cyc)
        g_loss = combined
        pl_val = 0.0
        if self.cfg.path_interval and self.step % self.cfg.path_interval == 0:
            ppl = self.path_penalty(out1.image, w)
            pl_val = float(ppl.detach())
            g_loss = g_loss + PL_WEIGHT * ppl * self.cfg.path_interval
        self.g_opt.zero_grad(set_to_none=True)
        g_loss.backward()
        self.g_opt.step()

        report = LossReport(
            l_per=float(l_per.detach()), l_tex=float(l_tex.detach()),
            l_emb=float(l_emb.detach()), l_R=float(l_r.detach()),
            l_rec=float(l_rec.detach()), l_cyc=float(l_cyc.detach()),
            l_D_g=float(l_d_g.detach()), l_D_d=float(l_d.detach()),
            r1=r1_val, path_len=pl_val, combined=float(combined.detach()))
        if not report.finite():
            raise errors.NaNLoss(f"non-finite loss at step {self.step}: "
                                 f"{json.dumps(report.to_json())}")
        report.check_algebra(w_cfg)
        self.step += 1
        return report

    # -- training driver --------------------------------------------------
    def fit(self, dataset: SelfSupDataset, steps: int,
            log_path: str | Path | None = None,
            checkpoint_dir: str | Path | None = None,
            log=print) -> list[LossReport]:
        if self.lexicon is None:
            self.lexicon = dataset.lexicon()
        reports = []
        log_f = open(log_path, "a") if log_path else None
        try:
            for _ in range(steps):
                idx_rng = np.random.default_rng(
                    np.random.SeedSequence([self.cfg.seed, 2, self.step]))
                indices = idx_rng.integers(0, len(dataset), self.cfg.batch).tolist()
                report = self.train_step(dataset.batch(indices))
                reports.append(report)
                if log_f:
                    log_f.write(json.dumps({"step": self.step, **report.to_json()}) + "\n")
                if self.step % 50 == 0:
                    log(f"step {self.step}: combined {report.combined:.4f} "
                        f"l_rec {report.l_rec:.4f} l_R {report.l_R:.4f}")
                if (checkpoint_dir and self.cfg.checkpoint_every
                        and self.step % self.cfg.checkpoint_every == 0):
                    self.save(Path(checkpoint_dir) / f"step_{self.step:07d}.ckpt")
        finally:
            if log_f:
                log_f.close()
        return reports

    # -- persistence ------------------------------------------------------
    def save(self, path: str | Path) -> None:
        m = self.models
        checkpoint.save(
            path, arch=arch_dict(self.cfg), charset=self.cfg.charset,
            nets={"style_encoder": m.style_enc, "content_encoder": m.content_enc,
                  "mapper": m.mapper, "generator": m.generator,
                  "discriminator": m.discriminator},
            opts={"g": self.g_opt, "d": self.d_opt},
            step=self.step,
            extra={"pl_mean": self.path_penalty.mean,
                   "config": dataclasses.asdict(self.cfg),
                   "lexicon": self.lexicon},
            rng={"torch": torch.get_rng_state()})

    @classmethod
    def resume(cls, path: str | Path, classifier, recognizer) -> "Trainer":
        payload = checkpoint.load(path)
        cfg_d = payload["extra"]["config"]
        weights = cfg_d.pop("weights")
        from .config import LossWeights
        cfg = TrainConfig(weights=LossWeights(**weights), **cfg_d)
        trainer = cls(cfg, classifier, recognizer,
                      lexicon=payload["extra"]["lexicon"])
        trainer.load_state(payload)
        return trainer

    def load_state(self, payload: dict) -> None:
        m = self.models
        m.style_enc.load_state_dict(payload["nets"]["style_encoder"])
        m.content_enc.load_state_dict(payload["nets"]["content_encoder"])
        m.mapper.load_state_dict(payload["nets"]["mapper"])
        m.generator.load_state_dict(payload["nets"]["generator"])
        m.discriminator.load_state_dict(payload["nets"]["discriminator"])
        self.g_opt.load_state_dict(payload["opts"]["g"])
        self.d_opt.load_state_dict(payload["opts"]["d"])
        self.path_penalty.mean = payload["extra"]["pl_mean"]
        self.step = payload["step"]
        if "torch" in payload["rng"]:
            torch.set_rng_state(payload["rng"]["torch"])


def load_models(path: str | Path, cfg: TrainConfig | None = None) -> TSBModels:
    """Load the inference networks from a training checkpoint."""
    payload = checkpoint.load(path)
    arch = payload["arch"]
    if cfg is None:
        cfg = TrainConfig(shrink=arch["shrink"],
                          charset=payload["charset"],
                          max_content_len=arch["max_len"])
    if checkpoint.arch_hash(arch_dict(cfg)) != payload["arch_hash"]:
        raise errors.ArchMismatch("checkpoint architecture differs from config")
    models = TSBModels(cfg)
    models.style_enc.load_state_dict(payload["nets"]["style_encoder"])
    models.content_enc.load_state_dict(payload["nets"]["content_encoder"])
    models.mapper.load_state_dict(payload["nets"]["mapper"])
    models.generator.load_state_dict(payload["nets"]["generator"])
    models.discriminator.load_state_dict(payload["nets"]["discriminator"])
    models.eval()
    return models
