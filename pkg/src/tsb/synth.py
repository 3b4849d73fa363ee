"""Synthetic scene-text data generation and manifest I/O.

Three dataset kinds are produced:
  * ``selfsup``  — scene words with ground-truth transcription only (the
    self-supervised training corpus),
  * ``paired``   — same style rendered with two different strings, with
    the target crop kept as ground truth (evaluation only),
  * ``fonts``    — font-labeled word crops for classifier pretraining.

Manifests are JSON-lines with a schema-version header line. Each record
derives its own RNG stream from (seed, index) so parallel and serial
generation agree.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont

from . import config, errors
from .content import HEIGHT, WIDTH_STEP

SCHEMA_VERSION = 1
SCENE_SIZE = 256
_BASE_FONT_SIZE = 48


# ---------------------------------------------------------------------------
# Libraries

class FontLibrary:
    """Ordered collection of TTF files; index is the font id."""

    def __init__(self, paths: list[Path] | None = None):
        if paths is None:
            paths = sorted(config.FONT_DIR.glob("*.ttf"))
        self.paths = [Path(p) for p in paths]
        if not self.paths:
            raise errors.EmptyLibrary("no fonts found")

    def __len__(self):
        return len(self.paths)

    def load(self, font_id: int, size: int) -> ImageFont.FreeTypeFont:
        return ImageFont.truetype(str(self.paths[font_id]), size)


class BackgroundLibrary:
    """Deterministic procedural texture patches, 256x256 RGB in [0,1]."""

    def __init__(self, n_patches: int = 64, patches: list[np.ndarray] | None = None):
        if patches is not None:
            self.patches = patches
        else:
            self.patches = [_make_patch(i) for i in range(n_patches)]
        if not self.patches:
            raise errors.EmptyLibrary("no background patches")

    def __len__(self):
        return len(self.patches)

    def get(self, idx: int) -> np.ndarray:
        return self.patches[idx % len(self.patches)].copy()


def _make_patch(idx: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([7777, idx]))
    kind = idx % 4
    size = SCENE_SIZE
    if kind == 0:  # linear gradient between two colors
        c0, c1 = rng.random(3), rng.random(3)
        ang = rng.uniform(0, 2 * math.pi)
        y, x = np.mgrid[0:size, 0:size] / size
        t = (x * math.cos(ang) + y * math.sin(ang) + 1) / 2
        patch = c0[None, None] * (1 - t[..., None]) + c1[None, None] * t[..., None]
    elif kind == 1:  # smooth low-frequency noise
        low = rng.random((8, 8, 3))
        patch = np.asarray(
            Image.fromarray((low * 255).astype(np.uint8)).resize((size, size), Image.BICUBIC),
            dtype=np.float32) / 255.0
    elif kind == 2:  # stripes
        c0, c1 = rng.random(3), rng.random(3)
        period = rng.integers(8, 48)
        ang = rng.uniform(0, math.pi)
        y, x = np.mgrid[0:size, 0:size]
        t = ((x * math.cos(ang) + y * math.sin(ang)) // period) % 2
        patch = np.where(t[..., None] > 0, c1[None, None], c0[None, None])
    else:  # speckled flat color
        base = rng.random(3)
        patch = np.clip(base[None, None] + rng.normal(0, 0.05, (size, size, 3)), 0, 1)
    return np.clip(patch, 0, 1).astype(np.float32)


# ---------------------------------------------------------------------------
# Style specs and rendering

@dataclasses.dataclass
class StyleSpec:
    font_id: int
    fill_color: tuple[int, int, int]
    outline: tuple[tuple[int, int, int], int] | None  # (color, width px)
    rotation: float       # degrees, in [-25, 25]
    shear: float          # x-shear factor
    scale: float          # multiplies the base font size
    background_patch_id: int
    noise_level: float    # >= 0; drives blur sigma and additive noise

    def validate(self, n_fonts: int) -> None:
        if not -25 <= self.rotation <= 25:
            raise ValueError("rotation out of range")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not 0 <= self.font_id < n_fonts:
            raise ValueError("font_id out of range")
        if self.noise_level < 0:
            raise ValueError("noise_level must be >= 0")


@dataclasses.dataclass
class StyleSample:
    """Localized context image plus the word bounding box inside it."""

    context_image: np.ndarray   # 256x256x3 float in [0,1]
    word_box: tuple[int, int, int, int]  # x0, y0, x1, y1 (exclusive)

    def validate(self) -> None:
        x0, y0, x1, y1 = self.word_box
        h, w = self.context_image.shape[:2]
        if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
            raise errors.BoxOutOfBounds(f"box {self.word_box} not inside {w}x{h}")


def sample_style_spec(rng_seed, fonts: FontLibrary | None = None,
                      backgrounds: BackgroundLibrary | None = None) -> StyleSpec:
    fonts = fonts or _default_fonts()
    backgrounds = backgrounds or _default_backgrounds()
    rng = np.random.default_rng(rng_seed)
    outline = None
    if rng.random() < 0.3:
        outline = (tuple(int(v) for v in rng.integers(0, 256, 3)), int(rng.integers(1, 4)))
    return StyleSpec(
        font_id=int(rng.integers(0, len(fonts))),
        fill_color=tuple(int(v) for v in rng.integers(0, 256, 3)),
        outline=outline,
        rotation=float(rng.uniform(-25, 25)),
        shear=float(rng.uniform(-0.3, 0.3)),
        scale=float(rng.uniform(0.6, 1.2)),
        background_patch_id=int(rng.integers(0, len(backgrounds))),
        noise_level=float(rng.uniform(0, 1.0)),
    )


_defaults: dict = {}


def _default_fonts() -> FontLibrary:
    if "fonts" not in _defaults:
        _defaults["fonts"] = FontLibrary()
    return _defaults["fonts"]


def _default_backgrounds() -> BackgroundLibrary:
    if "bg" not in _defaults:
        _defaults["bg"] = BackgroundLibrary()
    return _defaults["bg"]


def _affine_layer(layer: Image.Image, rotation: float, shear: float) -> Image.Image:
    """Apply shear then rotation to an RGBA layer, expanding the canvas."""
    if abs(shear) > 1e-9:
        w, h = layer.size
        extra = int(abs(shear) * h) + 1
        # output->input mapping: x_in = x_out + shear*y_out + c
        c = -extra if shear < 0 else 0
        layer = layer.transform((w + extra, h), Image.AFFINE,
                                (1, shear, c, 0, 1, 0), Image.BILINEAR)
    if abs(rotation) > 1e-9:
        layer = layer.rotate(rotation, Image.BILINEAR, expand=True)
    return layer


def render_scene_word(text: str, spec: StyleSpec,
                      fonts: FontLibrary | None = None,
                      backgrounds: BackgroundLibrary | None = None,
                      ) -> tuple[StyleSample, np.ndarray]:
    """Render ``text`` with ``spec`` onto a background patch.

    Returns the localized style sample and the tight word crop resized to
    height 64 (width rounded up to a multiple of 16).
    """
    config.validate_text(text)
    fonts = fonts or _default_fonts()
    backgrounds = backgrounds or _default_backgrounds()
    spec.validate(len(fonts))

    font = fonts.load(spec.font_id, max(8, int(round(_BASE_FONT_SIZE * spec.scale))))
    stroke_w = spec.outline[1] if spec.outline else 0
    left, top, right, bottom = font.getbbox(text, stroke_width=stroke_w)
    tw, th = right - left, bottom - top
    pad = 4 + stroke_w
    layer = Image.new("RGBA", (tw + 2 * pad, th + 2 * pad), (0, 0, 0, 0))
    draw = ImageDraw.Draw(layer)
    draw.text((pad - left, pad - top), text, font=font, fill=spec.fill_color,
              stroke_width=stroke_w,
              stroke_fill=spec.outline[0] if spec.outline else None)
    layer = _affine_layer(layer, spec.rotation, spec.shear)

    if layer.width > SCENE_SIZE - 4 or layer.height > SCENE_SIZE - 4:
        raise errors.RenderOverflow(
            f"word layer {layer.size} exceeds {SCENE_SIZE}x{SCENE_SIZE} canvas")

    canvas = Image.fromarray(
        (backgrounds.get(spec.background_patch_id) * 255).astype(np.uint8))
    ox = (SCENE_SIZE - layer.width) // 2
    oy = (SCENE_SIZE - layer.height) // 2
    canvas.paste(layer, (ox, oy), layer)

    alpha = np.asarray(layer)[:, :, 3]
    ys, xs = np.nonzero(alpha > 127)
    if len(xs) == 0:
        raise errors.RenderOverflow("no ink rendered")
    box = (ox + int(xs.min()), oy + int(ys.min()),
           ox + int(xs.max()) + 1, oy + int(ys.max()) + 1)

    if spec.noise_level > 0:
        noise_rng = np.random.default_rng(
            np.random.SeedSequence([abs(hash((text, str(spec)))) % (2**32),
                                    spec.background_patch_id]))
        sigma = spec.noise_level * 1.5
        canvas = canvas.filter(ImageFilter.GaussianBlur(sigma))
        arr = np.asarray(canvas, dtype=np.float32) / 255.0
        arr = np.clip(arr + noise_rng.normal(0, 0.02 * spec.noise_level, arr.shape), 0, 1)
    else:
        arr = np.asarray(canvas, dtype=np.float32) / 255.0

    sample = StyleSample(context_image=arr.astype(np.float32), word_box=box)
    sample.validate()

    x0, y0, x1, y1 = box
    crop = Image.fromarray((arr[y0:y1, x0:x1] * 255).astype(np.uint8))
    w = max(WIDTH_STEP,
            int(math.ceil(crop.width * HEIGHT / crop.height / WIDTH_STEP)) * WIDTH_STEP)
    crop = crop.resize((w, HEIGHT), Image.BILINEAR)
    return sample, np.asarray(crop, dtype=np.float32) / 255.0


def random_word(rng: np.random.Generator, charset: str = config.DEFAULT_CHARSET,
                min_len: int = 3, max_len: int = 8) -> str:
    n = int(rng.integers(min_len, max_len + 1))
    return "".join(charset[i] for i in rng.integers(0, len(charset), n))


# ---------------------------------------------------------------------------
# Manifests

@dataclasses.dataclass
class DatasetRecord:
    image_path: str
    image_size: tuple[int, int]              # (width, height)
    word_boxes: list[tuple[int, int, int, int]]
    transcriptions: list[str]
    font_label: int | None = None
    pair_id: int | None = None
    role: str | None = None                  # "source" | "target" for paired sets
    target_path: str | None = None           # paired sets: ground-truth crop

    def validate(self) -> None:
        if len(self.word_boxes) != len(self.transcriptions):
            raise errors.ParseError(
                f"{len(self.word_boxes)} boxes vs {len(self.transcriptions)} transcriptions")
        w, h = self.image_size
        for box in self.word_boxes:
            x0, y0, x1, y1 = box
            if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
                raise errors.BoxOutOfBounds(f"box {box} outside {w}x{h} image")

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["image_size"] = list(self.image_size)
        d["word_boxes"] = [list(b) for b in self.word_boxes]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "DatasetRecord":
        rec = cls(
            image_path=d["image_path"],
            image_size=tuple(d["image_size"]),
            word_boxes=[tuple(b) for b in d["word_boxes"]],
            transcriptions=list(d["transcriptions"]),
            font_label=d.get("font_label"),
            pair_id=d.get("pair_id"),
            role=d.get("role"),
            target_path=d.get("target_path"),
        )
        rec.validate()
        return rec


def save_manifest(records: list[DatasetRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as f:
        f.write(json.dumps({"schema_version": SCHEMA_VERSION}) + "\n")
        for rec in records:
            f.write(json.dumps(rec.to_json()) + "\n")


def load_manifest(path: str | Path) -> list[DatasetRecord]:
    path = Path(path)
    records = []
    with path.open() as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as e:
                raise errors.ParseError(f"line {lineno}: invalid JSON ({e})") from e
            if lineno == 1 and "schema_version" in d and "image_path" not in d:
                if d["schema_version"] != SCHEMA_VERSION:
                    raise errors.VersionMismatch(
                        f"manifest schema {d['schema_version']} != {SCHEMA_VERSION}")
                continue
            try:
                records.append(DatasetRecord.from_json(d))
            except errors.TsbError as e:
                raise type(e)(f"line {lineno}: {e}") from e
            except (KeyError, TypeError) as e:
                raise errors.ParseError(f"line {lineno}: missing field ({e})") from e
    return records


# ---------------------------------------------------------------------------
# Dataset builders

def _save_png(arr: np.ndarray, path: Path) -> None:
    Image.fromarray((np.clip(arr, 0, 1) * 255).astype(np.uint8)).save(path)


def _spec_for(seed: int, index: int, fonts, backgrounds) -> tuple[StyleSpec, np.random.Generator]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    spec = sample_style_spec(rng, fonts, backgrounds)
    return spec, rng


def build_selfsup_set(n: int, seed: int, out_dir: str | Path,
                      fonts: FontLibrary | None = None,
                      backgrounds: BackgroundLibrary | None = None) -> Path:
    """Scene words with transcriptions only; no target-style ground truth."""
    fonts = fonts or _default_fonts()
    backgrounds = backgrounds or _default_backgrounds()
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(n):
        spec, rng = _spec_for(seed, i, fonts, backgrounds)
        text = random_word(rng)
        [(sample, _)], _spec = _render_retry([text], spec, fonts, backgrounds)
        img_path = out_dir / "images" / f"scene_{i:06d}.png"
        _save_png(sample.context_image, img_path)
        records.append(DatasetRecord(
            image_path=str(img_path.relative_to(out_dir)),
            image_size=(SCENE_SIZE, SCENE_SIZE),
            word_boxes=[sample.word_box],
            transcriptions=[text]))
    manifest = out_dir / "manifest.jsonl"
    save_manifest(records, manifest)
    return manifest


def _render_retry(texts, spec, fonts, backgrounds, tries: int = 8):
    """Render every word under one spec, shrinking it until all of them fit.

    Returns (list of (sample, crop) per word, final spec) so paired words
    share the exact style that was actually used.
    """
    for _ in range(tries):
        try:
            return ([render_scene_word(t, spec, fonts, backgrounds)
                     for t in texts], spec)
        except errors.RenderOverflow:
            spec = dataclasses.replace(spec, scale=spec.scale * 0.75)
    raise errors.RenderOverflow(f"could not fit {texts!r} after {tries} shrinks")


def build_paired_set(n: int, seed: int, out_dir: str | Path,
                     fonts: FontLibrary | None = None,
                     backgrounds: BackgroundLibrary | None = None) -> Path:
    """Pairs sharing one StyleSpec: source scene plus target crop ground truth."""
    fonts = fonts or _default_fonts()
    backgrounds = backgrounds or _default_backgrounds()
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(n):
        spec, rng = _spec_for(seed, i, fonts, backgrounds)
        text1, text2 = random_word(rng), random_word(rng)
        rendered, _spec = _render_retry([text1, text2], spec, fonts, backgrounds)
        (sample1, _), (_sample2, crop2) = rendered
        src_path = out_dir / "images" / f"pair_{i:06d}_src.png"
        tgt_path = out_dir / "images" / f"pair_{i:06d}_tgt.png"
        _save_png(sample1.context_image, src_path)
        _save_png(crop2, tgt_path)
        records.append(DatasetRecord(
            image_path=str(src_path.relative_to(out_dir)),
            image_size=(SCENE_SIZE, SCENE_SIZE),
            word_boxes=[sample1.word_box],
            transcriptions=[text1],
            pair_id=i, role="source",
            target_path=str(tgt_path.relative_to(out_dir))))
        records.append(DatasetRecord(
            image_path=str(tgt_path.relative_to(out_dir)),
            image_size=(crop2.shape[1], crop2.shape[0]),
            word_boxes=[(0, 0, crop2.shape[1], crop2.shape[0])],
            transcriptions=[text2],
            pair_id=i, role="target"))
    manifest = out_dir / "manifest.jsonl"
    save_manifest(records, manifest)
    return manifest


def build_font_set(n_fonts: int, n_per_font: int, seed: int, out_dir: str | Path,
                   fonts: FontLibrary | None = None,
                   backgrounds: BackgroundLibrary | None = None) -> Path:
    """Font-labeled word crops for typeface-classifier pretraining."""
    fonts = fonts or _default_fonts()
    backgrounds = backgrounds or _default_backgrounds()
    if n_fonts > len(fonts):
        raise errors.EmptyLibrary(f"asked for {n_fonts} fonts, library has {len(fonts)}")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    records = []
    idx = 0
    for font_id in range(n_fonts):
        for _ in range(n_per_font):
            spec, rng = _spec_for(seed, idx, fonts, backgrounds)
            spec = dataclasses.replace(spec, font_id=font_id)
            text = random_word(rng)
            [(_sample, crop)], _spec = _render_retry([text], spec, fonts,
                                                     backgrounds)
            img_path = out_dir / "images" / f"font_{idx:06d}.png"
            _save_png(crop, img_path)
            records.append(DatasetRecord(
                image_path=str(img_path.relative_to(out_dir)),
                image_size=(crop.shape[1], crop.shape[0]),
                word_boxes=[(0, 0, crop.shape[1], crop.shape[0])],
                transcriptions=[text],
                font_label=font_id))
            idx += 1
    manifest = out_dir / "manifest.jsonl"
    save_manifest(records, manifest)
    return manifest
