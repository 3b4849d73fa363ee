"""Style and content encoders.

Both share a ResNet-style backbone; they differ only in the first layer
(RGB vs grayscale input) and the head (RoI-align pooling vs raw spatial
feature). The backbone is fully convolutional, so the content encoder
handles any input width divisible by 16.
"""

from __future__ import annotations

from collections import OrderedDict

import torch
from torch import nn
from torchvision.ops import roi_align

from .. import errors


def _conv_bn_relu(cin: int, cout: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1, bias=False),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class ResBlock(nn.Module):
    def __init__(self, cin: int, cout: int):
        super().__init__()
        self.conv1 = nn.Conv2d(cin, cout, 3, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(cout)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(cout)
        self.proj = None
        if cin != cout:
            self.proj = nn.Sequential(
                nn.Conv2d(cin, cout, 1, bias=False), nn.BatchNorm2d(cout))
        self.relu = nn.ReLU(inplace=True)

    def forward(self, x):
        identity = self.proj(x) if self.proj is not None else x
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


def _backbone_stages(in_channels: int, shrink: int = 1) -> "OrderedDict[str, nn.Module]":
    c = [max(4, ch // shrink) for ch in (32, 64, 128, 256, 512)]
    stages: OrderedDict[str, nn.Module] = OrderedDict()
    stages["conv0_1"] = _conv_bn_relu(in_channels, c[0])
    stages["conv0_2"] = _conv_bn_relu(c[0], c[1])
    stages["pool1"] = nn.MaxPool2d(2, 2)
    stages["resblock1"] = nn.Sequential(ResBlock(c[1], c[2]))
    stages["conv1"] = _conv_bn_relu(c[2], c[2])
    stages["pool2"] = nn.MaxPool2d(2, 2)
    stages["resblock2"] = nn.Sequential(ResBlock(c[2], c[3]), ResBlock(c[3], c[3]))
    stages["conv2"] = _conv_bn_relu(c[3], c[3])
    stages["pool3"] = nn.MaxPool2d(2, 2)
    stages["resblock3"] = nn.Sequential(
        ResBlock(c[3], c[4]), *[ResBlock(c[4], c[4]) for _ in range(4)])
    stages["conv3"] = _conv_bn_relu(c[4], c[4])
    stages["pool4"] = nn.MaxPool2d(2, 2)
    stages["resblock4"] = nn.Sequential(*[ResBlock(c[4], c[4]) for _ in range(3)])
    stages["conv4_1"] = _conv_bn_relu(c[4], c[4])
    return stages


def _he_init(module: nn.Module) -> None:
    for m in module.modules():
        if isinstance(m, nn.Conv2d):
            nn.init.kaiming_normal_(m.weight, nonlinearity="relu")
            if m.bias is not None:
                nn.init.zeros_(m.bias)


class StyleEncoder(nn.Module):
    """256x256 RGB context image + word box -> 512-d style code."""

    def __init__(self, shrink: int = 1):
        super().__init__()
        self.stages = nn.ModuleDict(_backbone_stages(3, shrink))
        self.out_channels = max(4, 512 // shrink)
        _he_init(self)

    def forward_taps(self, img: torch.Tensor) -> "OrderedDict[str, torch.Tensor]":
        taps: OrderedDict[str, torch.Tensor] = OrderedDict()
        x = img
        for name, stage in self.stages.items():
            x = stage(x)
            taps[name] = x
        return taps

    def forward(self, img: torch.Tensor, boxes: torch.Tensor) -> torch.Tensor:
        """``img``: [B,3,256,256]; ``boxes``: [B,4] (x0,y0,x1,y1) in pixels."""
        if img.dim() != 4 or img.shape[1] != 3:
            raise errors.BadShape(f"expected [B,3,H,W] image, got {tuple(img.shape)}")
        if boxes.shape != (img.shape[0], 4):
            raise errors.BadShape(f"expected [B,4] boxes, got {tuple(boxes.shape)}")
        x = img
        for stage in self.stages.values():
            x = stage(x)
        idx = torch.arange(img.shape[0], dtype=x.dtype, device=x.device)[:, None]
        rois = torch.cat([idx, boxes.to(x.dtype)], dim=1)
        pooled = roi_align(x, rois, output_size=1, spatial_scale=1.0 / 16,
                           sampling_ratio=2, aligned=True)
        return pooled.flatten(1)


class ContentEncoder(nn.Module):
    """64xW grayscale content image -> [512, 4, W/16] feature."""

    def __init__(self, shrink: int = 1):
        super().__init__()
        self.stages = nn.ModuleDict(_backbone_stages(1, shrink))
        self.out_channels = max(4, 512 // shrink)
        _he_init(self)

    def forward_taps(self, img: torch.Tensor) -> "OrderedDict[str, torch.Tensor]":
        taps: OrderedDict[str, torch.Tensor] = OrderedDict()
        x = img
        for name, stage in self.stages.items():
            x = stage(x)
            taps[name] = x
        return taps

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        if img.dim() != 4 or img.shape[1] != 1:
            raise errors.BadShape(f"expected [B,1,64,W] image, got {tuple(img.shape)}")
        if img.shape[2] != 64 or img.shape[3] % 16 != 0:
            raise errors.BadShape(
                f"content image must be 64xW with W % 16 == 0, got {tuple(img.shape[2:])}")
        x = img
        for stage in self.stages.values():
            x = stage(x)
        return x
