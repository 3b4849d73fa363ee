"""Batch assembly from dataset manifests.

The self-supervised batch type deliberately has no slot for a c2 target
image: the second content string is sampled per step and its rendering
in the source style is never available to the trainer.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from . import synth

TRAIN_CROP = (64, 256)


@dataclasses.dataclass
class SelfSupBatch:
    context: torch.Tensor    # [B, 3, 256, 256]
    boxes: torch.Tensor      # [B, 4]
    crop: torch.Tensor       # [B, 3, 64, 256] ground-truth crop for c1
    texts: list[str]         # c1 strings


def _load_rgb(path: Path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0


def _crop_resized(img: np.ndarray, box, size=TRAIN_CROP) -> np.ndarray:
    x0, y0, x1, y1 = box
    crop = Image.fromarray((img[y0:y1, x0:x1] * 255).astype(np.uint8))
    crop = crop.resize((size[1], size[0]), Image.BILINEAR)
    return np.asarray(crop, dtype=np.float32) / 255.0


class SelfSupDataset:
    """Scene images with word boxes + transcriptions, batched for training."""

    def __init__(self, manifest_path: str | Path):
        self.root = Path(manifest_path).parent
        self.records = synth.load_manifest(manifest_path)

    def __len__(self):
        return len(self.records)

    def lexicon(self) -> list[str]:
        return sorted({t for r in self.records for t in r.transcriptions})

    def get(self, index: int) -> tuple[np.ndarray, tuple, str]:
        rec = self.records[index % len(self.records)]
        img = _load_rgb(self.root / rec.image_path)
        return img, rec.word_boxes[0], rec.transcriptions[0]

    def batch(self, indices: list[int]) -> SelfSupBatch:
        ctx, boxes, crops, texts = [], [], [], []
        for i in indices:
            img, box, text = self.get(i)
            ctx.append(img)
            boxes.append(box)
            crops.append(_crop_resized(img, box))
            texts.append(text)
        return SelfSupBatch(
            context=torch.from_numpy(np.stack(ctx)).permute(0, 3, 1, 2),
            boxes=torch.tensor(boxes, dtype=torch.float32),
            crop=torch.from_numpy(np.stack(crops)).permute(0, 3, 1, 2),
            texts=texts)


class LabeledCropDataset:
    """Word crops with font labels and/or transcriptions (aux-net pretraining)."""

    def __init__(self, manifest_path: str | Path, size=TRAIN_CROP):
        self.root = Path(manifest_path).parent
        self.records = synth.load_manifest(manifest_path)
        self.size = size

    def __len__(self):
        return len(self.records)

    def item(self, index: int) -> tuple[np.ndarray, int | None, str]:
        rec = self.records[index]
        img = _load_rgb(self.root / rec.image_path)
        img = _crop_resized(img, rec.word_boxes[0], self.size)
        return img, rec.font_label, rec.transcriptions[0]

    def tensors(self, indices: list[int]):
        imgs, labels, texts = [], [], []
        for i in indices:
            img, label, text = self.item(i)
            imgs.append(img)
            labels.append(label)
            texts.append(text)
        x = torch.from_numpy(np.stack(imgs)).permute(0, 3, 1, 2)
        y = None if labels[0] is None else torch.tensor(labels, dtype=torch.long)
        return x, y, texts
