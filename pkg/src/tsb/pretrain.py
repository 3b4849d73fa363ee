"""Pretraining of the frozen auxiliary networks.

Both routines train on crops from a labeled manifest, report held-out
accuracy, freeze the weights, and can persist a standalone checkpoint
with embedded charset / class-count metadata.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from torch import nn

from . import checkpoint, config, errors, metrics
from .data import LabeledCropDataset
from .networks.aux import Recognizer, TypefaceClassifier


def _freeze(net: nn.Module) -> nn.Module:
    net.eval()
    for p in net.parameters():
        p.requires_grad_(False)
    return net


def _split(n: int, rng: np.random.Generator, holdout: float = 0.15):
    idx = rng.permutation(n)
    n_val = max(1, int(n * holdout))
    return idx[n_val:].tolist(), idx[:n_val].tolist()


def pretrain_classifier(manifest: str | Path, epochs: int = 5, seed: int = 0,
                        shrink: int = 1, batch: int = 16, lr: float = 1e-3,
                        log=print) -> tuple[TypefaceClassifier, float]:
    """Train the typeface classifier; returns (frozen net, held-out accuracy)."""
    ds = LabeledCropDataset(manifest)
    labels = [r.font_label for r in ds.records]
    if any(l is None for l in labels):
        raise errors.NoLabels("manifest has records without font labels")
    n_fonts = max(labels) + 1
    rng = np.random.default_rng(seed)
    torch.manual_seed(seed)
    train_idx, val_idx = _split(len(ds), rng)

    net = TypefaceClassifier(n_fonts=n_fonts, shrink=shrink)
    opt = torch.optim.Adam(net.parameters(), lr=lr)
    ce = nn.CrossEntropyLoss()
    for epoch in range(epochs):
        net.train()
        order = rng.permutation(train_idx)
        total = 0.0
        for i in range(0, len(order), batch):
            x, y, _ = ds.tensors(order[i:i + batch].tolist())
            opt.zero_grad()
            loss = ce(net(x), y)
            loss.backward()
            opt.step()
            total += loss.item()
        acc = _classifier_accuracy(net, ds, val_idx, batch)
        log(f"classifier epoch {epoch + 1}/{epochs}: "
            f"loss {total / max(1, len(order) // batch):.4f} val_acc {acc:.4f}")
    acc = _classifier_accuracy(net, ds, val_idx, batch)
    return _freeze(net), acc


@torch.no_grad()
def _classifier_accuracy(net, ds, indices, batch=16) -> float:
    net.eval()
    hits = total = 0
    for i in range(0, len(indices), batch):
        x, y, _ = ds.tensors(list(indices[i:i + batch]))
        hits += (net(x).argmax(1) == y).sum().item()
        total += len(y)
    return hits / max(1, total)


def pretrain_recognizer(manifest: str | Path, epochs: int = 10, seed: int = 0,
                        shrink: int = 1, batch: int = 16, lr: float = 1e-3,
                        charset: str = config.DEFAULT_CHARSET,
                        use_tps: bool = True, use_bilstm: bool = False,
                        log=print) -> tuple[Recognizer, float]:
    """Train the attention word recognizer; returns (frozen net, word accuracy)."""
    ds = LabeledCropDataset(manifest, size=(32, 128))
    if not all(r.transcriptions for r in ds.records):
        raise errors.NoLabels("manifest has records without transcriptions")
    rng = np.random.default_rng(seed)
    torch.manual_seed(seed)
    train_idx, val_idx = _split(len(ds), rng)

    net = Recognizer(charset=charset, use_tps=use_tps, use_bilstm=use_bilstm,
                     shrink=shrink)
    opt = torch.optim.Adam(net.parameters(), lr=lr)
    ce = nn.CrossEntropyLoss(ignore_index=-1)
    for epoch in range(epochs):
        net.train()
        order = rng.permutation(train_idx)
        total = 0.0
        for i in range(0, len(order), batch):
            x, _, texts = ds.tensors(order[i:i + batch].tolist())
            targets = net.encode_text(texts)
            opt.zero_grad()
            logits = net(x, targets=targets)
            # supervise through the first EOS, ignore padding afterwards
            t = targets.clone()
            first_eos = (t == net.EOS).float().argmax(dim=1)
            steps = torch.arange(t.shape[1])[None]
            t[steps > first_eos[:, None]] = -1
            loss = ce(logits.reshape(-1, net.n_classes), t.reshape(-1))
            loss.backward()
            opt.step()
            total += loss.item()
        acc = recognizer_accuracy(net, ds, val_idx, batch)
        log(f"recognizer epoch {epoch + 1}/{epochs}: "
            f"loss {total / max(1, len(order) // batch):.4f} word_acc {acc:.4f}")
    acc = recognizer_accuracy(net, ds, val_idx, batch)
    return _freeze(net), acc


@torch.no_grad()
def recognizer_accuracy(net: Recognizer, ds: LabeledCropDataset,
                        indices, batch: int = 16) -> float:
    net.eval()
    preds, targets = [], []
    for i in range(0, len(indices), batch):
        x, _, texts = ds.tensors(list(indices[i:i + batch]))
        preds += net.recognize(x).decoded
        targets += texts
    return metrics.recognition_accuracy(preds, targets)


def save_classifier(net: TypefaceClassifier, path: str | Path,
                    shrink: int = 1) -> None:
    checkpoint.save(path, arch={"kind": "classifier", "shrink": shrink,
                                "n_fonts": net.n_fonts},
                    charset="", nets={"classifier": net},
                    extra={"n_fonts": net.n_fonts, "shrink": shrink})


def load_classifier(path: str | Path) -> TypefaceClassifier:
    payload = checkpoint.load(path)
    extra = payload["extra"]
    net = TypefaceClassifier(n_fonts=extra["n_fonts"], shrink=extra["shrink"])
    net.load_state_dict(payload["nets"]["classifier"])
    return _freeze(net)


def save_recognizer(net: Recognizer, path: str | Path, shrink: int = 1) -> None:
    checkpoint.save(path, arch={"kind": "recognizer", "shrink": shrink,
                                "use_tps": net.use_tps, "use_bilstm": net.use_bilstm,
                                "max_len": net.max_len, "charset": net.charset},
                    charset=net.charset, nets={"recognizer": net},
                    extra={"shrink": shrink, "use_tps": net.use_tps,
                           "use_bilstm": net.use_bilstm, "max_len": net.max_len})


def load_recognizer(path: str | Path,
                    expect_charset: str | None = None) -> Recognizer:
    payload = checkpoint.load(path, expect_charset=expect_charset)
    extra = payload["extra"]
    net = Recognizer(charset=payload["charset"], max_len=extra["max_len"],
                     use_tps=extra["use_tps"], use_bilstm=extra["use_bilstm"],
                     shrink=extra["shrink"])
    net.load_state_dict(payload["nets"]["recognizer"])
    return _freeze(net)
