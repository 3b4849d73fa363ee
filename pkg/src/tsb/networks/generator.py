"""Mask-emitting generator with per-layer weight modulation, plus the
residual discriminator.

The generator consumes a content feature map (512 x 4 x W) as its input
tensor and 15 layer-specific style vectors. Five blocks upsample 16x in
each dimension; RGB and linear mask maps are accumulated across blocks
(skip design), with a single sigmoid on the final mask. There are no
stochastic inputs, so eval-mode forwards are bit-deterministic.
"""

from __future__ import annotations

import dataclasses
import math

import torch
import torch.nn.functional as F
from torch import nn

from .. import errors

_BLUR_KERNEL = torch.tensor([1.0, 2.0, 1.0])


@dataclasses.dataclass
class GenOutput:
    image: torch.Tensor  # [B, 3, H, W], unbounded; clamp to [0,1] for export
    mask: torch.Tensor   # [B, 1, H, W], in (0, 1)

    def clamped(self) -> torch.Tensor:
        return self.image.clamp(0.0, 1.0)


def _blur(x: torch.Tensor) -> torch.Tensor:
    k = _BLUR_KERNEL.to(x.device, x.dtype)
    k2 = (k[:, None] * k[None, :]) / k.sum() ** 2
    k2 = k2.expand(x.shape[1], 1, 3, 3)
    return F.conv2d(x, k2, padding=1, groups=x.shape[1])


class ModulatedConv2d(nn.Module):
    """Convolution with per-sample weight modulation and optional demodulation."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int, style_dim: int,
                 demodulate: bool = True, up: bool = False):
        super().__init__()
        self.in_ch, self.out_ch, self.kernel = in_ch, out_ch, kernel
        self.demodulate = demodulate
        self.up = up
        fan_in = in_ch * kernel * kernel
        self.weight = nn.Parameter(torch.randn(out_ch, in_ch, kernel, kernel) / math.sqrt(fan_in))
        self.affine = nn.Linear(style_dim, in_ch)
        nn.init.zeros_(self.affine.bias)
        with torch.no_grad():
            self.affine.bias += 1.0

    def demodulated_weight(self, scales: torch.Tensor) -> torch.Tensor:
        """Per-sample weight given input-channel scales [B, in_ch]."""
        w = self.weight[None] * scales[:, None, :, None, None]
        if self.demodulate:
            d = (w.pow(2).sum(dim=(2, 3, 4)) + 1e-8).rsqrt()
            w = w * d[:, :, None, None, None]
        return w

    def forward(self, x: torch.Tensor, style_row: torch.Tensor) -> torch.Tensor:
        b = x.shape[0]
        if self.up:
            x = F.interpolate(x, scale_factor=2, mode="nearest")
            x = _blur(x)
        w = self.demodulated_weight(self.affine(style_row))
        x = x.reshape(1, b * self.in_ch, *x.shape[2:])
        w = w.reshape(b * self.out_ch, self.in_ch, self.kernel, self.kernel)
        out = F.conv2d(x, w, padding=self.kernel // 2, groups=b)
        return out.reshape(b, self.out_ch, *out.shape[2:])


class StyleConv(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, style_dim: int, up: bool = False):
        super().__init__()
        self.conv = ModulatedConv2d(in_ch, out_ch, 3, style_dim, up=up)
        self.bias = nn.Parameter(torch.zeros(out_ch))

    def forward(self, x, style_row):
        x = self.conv(x, style_row) + self.bias[None, :, None, None]
        return F.leaky_relu(x, 0.2) * math.sqrt(2)


class ToImage(nn.Module):
    """1x1 modulated conv (no demodulation) producing RGB or mask maps."""

    def __init__(self, in_ch: int, out_ch: int, style_dim: int):
        super().__init__()
        self.conv = ModulatedConv2d(in_ch, out_ch, 1, style_dim, demodulate=False)
        self.bias = nn.Parameter(torch.zeros(out_ch))

    def forward(self, x, style_row):
        return self.conv(x, style_row) + self.bias[None, :, None, None]


class _Block(nn.Module):
    """One generator block: optional upsampling StyleConv, StyleConv,
    RGB map, and mask map fed by the current RGB + previous mask."""

    def __init__(self, ch: int, style_dim: int, first: bool):
        super().__init__()
        self.first = first
        if not first:
            self.up_conv = StyleConv(ch, ch, style_dim, up=True)
        self.conv = StyleConv(ch, ch, style_dim)
        self.to_rgb = ToImage(ch, 3, style_dim)
        self.to_mask = ToImage(4, 1, style_dim)


# Style-row index (0-based) per layer, from the generator layer table.
_BLOCK_STYLES = [
    (None, 0, 1, 2),
    (2, 3, 4, 5),
    (5, 6, 7, 8),
    (8, 9, 10, 11),
    (11, 12, 13, 14),
]


class Generator(nn.Module):
    def __init__(self, style_dim: int = 512, shrink: int = 1):
        super().__init__()
        self.style_dim = style_dim
        self.ch = max(4, 512 // shrink)
        self.blocks = nn.ModuleList(
            [_Block(self.ch, style_dim, first=(i == 0)) for i in range(5)])

    def n_styles(self) -> int:
        return 15

    def forward(self, e_c: torch.Tensor, styles: torch.Tensor,
                return_taps: bool = False):
        if e_c.dim() != 4 or e_c.shape[1] != self.ch or e_c.shape[2] != 4:
            raise errors.BadShape(
                f"expected content feature [B,{self.ch},4,W], got {tuple(e_c.shape)}")
        if styles.dim() != 3 or styles.shape[1] != 15 or styles.shape[2] != self.style_dim:
            raise errors.RowCountMismatch(
                f"expected [B,15,{self.style_dim}] styles, got {tuple(styles.shape)}")

        x = e_c
        rgb = None
        mask = None
        taps = []
        for block, (i_up, i_conv, i_rgb, i_mask) in zip(self.blocks, _BLOCK_STYLES):
            if not block.first:
                x = block.up_conv(x, styles[:, i_up])
            x = block.conv(x, styles[:, i_conv])
            rgb_new = block.to_rgb(x, styles[:, i_rgb])
            if rgb is None:
                rgb = rgb_new
                mask_prev = torch.zeros_like(rgb_new[:, :1])
            else:
                rgb = F.interpolate(rgb, scale_factor=2, mode="bilinear",
                                    align_corners=False) + rgb_new
                mask_prev = F.interpolate(mask, scale_factor=2, mode="bilinear",
                                          align_corners=False)
            mask_new = block.to_mask(
                torch.cat([rgb, mask_prev], dim=1), styles[:, i_mask])
            mask = mask_prev + mask_new
            taps.append(tuple(x.shape[2:]))

        out = GenOutput(image=rgb, mask=torch.sigmoid(mask))
        if return_taps:
            return out, taps
        return out


class _DBlock(nn.Module):
    def __init__(self, cin: int, cout: int):
        super().__init__()
        self.conv1 = nn.Conv2d(cin, cin, 3, padding=1)
        self.conv2 = nn.Conv2d(cin, cout, 3, padding=1)
        self.skip = nn.Conv2d(cin, cout, 1, bias=False)

    def forward(self, x):
        y = F.leaky_relu(self.conv1(x), 0.2)
        y = F.leaky_relu(self.conv2(y), 0.2)
        y = F.avg_pool2d(y, 2)
        s = self.skip(F.avg_pool2d(x, 2))
        return (y + s) / math.sqrt(2)


def _minibatch_stddev(x: torch.Tensor) -> torch.Tensor:
    # sqrt(var + eps) keeps the gradient finite when the batch variance is
    # exactly zero (batch size 1)
    std = (x.var(dim=0, unbiased=False) + 1e-8).sqrt().mean()
    feat = std.expand(x.shape[0], 1, *x.shape[2:])
    return torch.cat([x, feat], dim=1)


class Discriminator(nn.Module):
    """Residual discriminator scoring real/fake word images."""

    def __init__(self, input_size: tuple[int, int] = (64, 256), shrink: int = 1):
        super().__init__()
        h, w = input_size
        if h & (h - 1) or w % h:
            raise ValueError("input height must be a power of two dividing the width")
        self.input_size = input_size
        n_blocks = int(math.log2(h))
        chans = [max(4, min(64 * 2 ** i, 512) // shrink) for i in range(n_blocks + 1)]
        self.from_rgb = nn.Conv2d(3, chans[0], 1)
        self.blocks = nn.ModuleList(
            [_DBlock(chans[i], chans[i + 1]) for i in range(n_blocks)])
        cfin = chans[-1]
        self.final_conv = nn.Conv2d(cfin + 1, cfin, 3, padding=1)
        final_w = w // 2 ** n_blocks
        self.fc1 = nn.Linear(cfin * final_w, cfin)
        self.fc2 = nn.Linear(cfin, 1)

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        squeeze = False
        if img.dim() == 3:
            img = img[None]
            squeeze = True
        if img.dim() != 4 or img.shape[1] != 3 or tuple(img.shape[2:]) != self.input_size:
            raise errors.BadShape(
                f"expected [B,3,{self.input_size[0]},{self.input_size[1]}], "
                f"got {tuple(img.shape)}")
        x = F.leaky_relu(self.from_rgb(img), 0.2)
        for block in self.blocks:
            x = block(x)
        x = _minibatch_stddev(x)
        x = F.leaky_relu(self.final_conv(x), 0.2)
        x = F.leaky_relu(self.fc1(x.flatten(1)), 0.2)
        score = self.fc2(x).squeeze(1)
        return score[0] if squeeze else score
