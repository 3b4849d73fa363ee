"""Style mapping network: 512-d style code -> 15 layer-specific vectors."""

from __future__ import annotations

import torch
from torch import nn

from .. import errors

N_LAYER_STYLES = 15
EPS = 1e-8


def pixel_norm(e: torch.Tensor, eps: float = EPS) -> torch.Tensor:
    """e / (sqrt(mean(e^2)) + eps), applied over the last dimension."""
    rms = e.pow(2).mean(dim=-1, keepdim=True).sqrt()
    return e / (rms + eps)


class StyleMapper(nn.Module):
    def __init__(self, dim: int = 512):
        super().__init__()
        self.dim = dim
        self.fc1 = nn.Linear(dim, dim)
        self.act = nn.LeakyReLU(0.2)
        self.fc2 = nn.Linear(dim, N_LAYER_STYLES * dim)

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        """[B, dim] style code -> [B, 15, dim] layer styles."""
        if e.shape[-1] != self.dim:
            raise errors.BadShape(f"expected {self.dim}-d style code, got {tuple(e.shape)}")
        x = pixel_norm(e)
        x = self.act(self.fc1(x))
        x = self.fc2(x)
        return x.view(*e.shape[:-1], N_LAYER_STYLES, self.dim)
