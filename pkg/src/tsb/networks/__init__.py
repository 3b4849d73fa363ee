from .encoders import ContentEncoder, StyleEncoder
from .mapping import StyleMapper, pixel_norm
from .generator import Discriminator, Generator

__all__ = [
    "ContentEncoder",
    "StyleEncoder",
    "StyleMapper",
    "pixel_norm",
    "Generator",
    "Discriminator",
]
