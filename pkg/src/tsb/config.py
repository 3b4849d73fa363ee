"""Global configuration: charset, font paths, training hyper-parameters."""

from __future__ import annotations

import dataclasses
import string
from pathlib import Path

ASSET_DIR = Path(__file__).parent / "assets"
FONT_DIR = ASSET_DIR / "fonts"

DEFAULT_CHARSET = string.ascii_uppercase + string.ascii_lowercase + string.digits
MAX_CONTENT_LEN = 24

# Fixed-advance font used for canonical content rendering.
CONTENT_FONT = FONT_DIR / "DejaVuSansMono.ttf"


@dataclasses.dataclass
class LossWeights:
    """Balance factors for the combined training objective."""

    per: float = 1.0
    tex: float = 500.0
    emb: float = 1.0
    rec_char: float = 1.0
    rec_img: float = 10.0
    cyc: float = 1.0


@dataclasses.dataclass
class TrainConfig:
    lr: float = 0.002
    batch: int = 8
    steps: int = 10_000
    seed: int = 0
    weights: LossWeights = dataclasses.field(default_factory=LossWeights)
    r1_interval: int = 16
    r1_gamma: float = 10.0
    path_interval: int = 8
    checkpoint_every: int = 1000
    charset: str = DEFAULT_CHARSET
    max_content_len: int = MAX_CONTENT_LEN
    # Uniform channel-width divisor for every trainable net; 1 = full scale.
    # Gradient-check and smoke tests use 8.
    shrink: int = 1

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


def validate_text(text: str, charset: str = DEFAULT_CHARSET,
                  max_len: int = MAX_CONTENT_LEN) -> None:
    """Raise if ``text`` violates the content-string contract."""
    from . import errors

    if not text:
        raise errors.EmptyContent("content string is empty")
    if len(text) > max_len:
        raise errors.LengthOverflow(f"content longer than {max_len} chars")
    for ch in text:
        if ch not in charset:
            raise errors.UnsupportedChar(f"character {ch!r} not in charset")
