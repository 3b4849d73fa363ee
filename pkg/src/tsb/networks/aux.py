"""Frozen auxiliary networks: typeface classifier and word recognizer.

The classifier is a VGG19-BN topology exposing the five early relu maps
and a penultimate embedding for perceptual losses. The recognizer is a
TPS-rectified convolutional feature extractor with an attention decoder;
it resizes any input to a fixed 32x128 internally, so generated images
and masks of any width divisible by 16 can be scored.
"""

from __future__ import annotations

import dataclasses

import torch
import torch.nn.functional as F
from torch import nn

from .. import config, errors

_VGG19 = [64, 64, "M", 128, 128, "M", 256, 256, 256, 256, "M",
          512, 512, 512, 512, "M", 512, 512, 512, 512, "M"]
FEATURE_LAYERS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1")


@dataclasses.dataclass
class FeatureBundle:
    maps: dict[str, torch.Tensor]   # the five tapped activation maps
    psi: torch.Tensor               # penultimate embedding, [B, emb_dim]


class TypefaceClassifier(nn.Module):
    def __init__(self, n_fonts: int, shrink: int = 1, emb_dim: int = 256):
        super().__init__()
        self.n_fonts = n_fonts
        layers = []
        taps = {}   # module index -> tap name
        cin, block = 3, 1
        first_of_block = True
        for v in _VGG19:
            if v == "M":
                layers.append(nn.MaxPool2d(2, 2))
                block += 1
                first_of_block = True
                continue
            cout = max(4, v // shrink)
            layers += [nn.Conv2d(cin, cout, 3, padding=1),
                       nn.BatchNorm2d(cout), nn.ReLU(inplace=True)]
            if first_of_block and block <= 5:
                taps[len(layers) - 1] = f"relu{block}_1"
                first_of_block = False
            cin = cout
        self.features = nn.Sequential(*layers)
        self._taps = taps
        self.emb_dim = max(4, emb_dim // shrink)
        self.head = nn.Linear(cin, self.emb_dim)
        self.classify = nn.Linear(self.emb_dim, n_fonts)

    def _run(self, img: torch.Tensor):
        if img.dim() != 4 or img.shape[1] != 3:
            raise errors.BadShape(f"expected [B,3,H,W], got {tuple(img.shape)}")
        maps = {}
        x = img
        for i, layer in enumerate(self.features):
            x = layer(x)
            if i in self._taps:
                maps[self._taps[i]] = x
        psi = F.relu(self.head(F.adaptive_avg_pool2d(x, 1).flatten(1)))
        return maps, psi

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        _, psi = self._run(img)
        return self.classify(psi)

    def extract_features(self, img: torch.Tensor) -> FeatureBundle:
        maps, psi = self._run(img)
        return FeatureBundle(maps=maps, psi=psi)


# ---------------------------------------------------------------------------
# Recognizer

class _TPS(nn.Module):
    """Thin-plate-spline rectification with a small localization network."""

    def __init__(self, n_fiducial: int = 20, out_size: tuple[int, int] = (32, 128),
                 shrink: int = 1):
        super().__init__()
        self.F = n_fiducial
        self.out_size = out_size
        c = [max(4, ch // shrink) for ch in (32, 64, 128, 256)]
        self.loc = nn.Sequential(
            nn.Conv2d(3, c[0], 3, padding=1), nn.BatchNorm2d(c[0]), nn.ReLU(True),
            nn.MaxPool2d(2, 2),
            nn.Conv2d(c[0], c[1], 3, padding=1), nn.BatchNorm2d(c[1]), nn.ReLU(True),
            nn.MaxPool2d(2, 2),
            nn.Conv2d(c[1], c[2], 3, padding=1), nn.BatchNorm2d(c[2]), nn.ReLU(True),
            nn.MaxPool2d(2, 2),
            nn.Conv2d(c[2], c[3], 3, padding=1), nn.BatchNorm2d(c[3]), nn.ReLU(True),
            nn.AdaptiveAvgPool2d(1),
        )
        self.fc1 = nn.Linear(c[3], 256)
        self.fc2 = nn.Linear(256, 2 * n_fiducial)
        nn.init.zeros_(self.fc2.weight)
        with torch.no_grad():
            self.fc2.bias.copy_(self._base_points().flatten())
        self.register_buffer("inv_delta", self._inv_delta(), persistent=False)
        self.register_buffer("p_hat", self._p_hat(), persistent=False)

    def _base_points(self) -> torch.Tensor:
        f2 = self.F // 2
        x = torch.linspace(-1.0, 1.0, f2)
        top = torch.stack([x, -torch.ones(f2)], dim=1)
        bot = torch.stack([x, torch.ones(f2)], dim=1)
        return torch.cat([top, bot], dim=0)   # [F, 2]

    def _inv_delta(self) -> torch.Tensor:
        c = self._base_points().double()
        n = self.F
        d2 = torch.cdist(c, c).pow(2)
        rbf = d2 * torch.log(d2 + torch.eye(n).double())
        delta = torch.zeros(n + 3, n + 3, dtype=torch.float64)
        delta[:n, :n] = rbf
        delta[:n, n] = 1
        delta[:n, n + 1:] = c
        delta[n, :n] = 1
        delta[n + 1:, :n] = c.t()
        return torch.linalg.inv(delta).float()

    def _p_hat(self) -> torch.Tensor:
        h, w = self.out_size
        ys = (torch.arange(h) + 0.5) / h * 2 - 1
        xs = (torch.arange(w) + 0.5) / w * 2 - 1
        grid = torch.stack(torch.meshgrid(ys, xs, indexing="ij"), dim=-1)
        p = grid.reshape(-1, 2).flip(-1)            # [(h*w), 2] as (x, y)
        c = self._base_points()
        d2 = torch.cdist(p, c).pow(2)
        rbf = d2 * torch.log(d2 + 1e-9)
        ones = torch.ones(p.shape[0], 1)
        return torch.cat([rbf, ones, p], dim=1)     # [(h*w), F+3]

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        b = img.shape[0]
        feat = self.loc(img).flatten(1)
        pts = self.fc2(F.relu(self.fc1(feat))).view(b, self.F, 2)
        pts = torch.cat([pts, pts.new_zeros(b, 3, 2)], dim=1)
        t = self.inv_delta[None] @ pts              # [B, F+3, 2]
        grid = (self.p_hat[None] @ t).view(b, *self.out_size, 2)
        return F.grid_sample(img, grid.clamp(-1, 1), align_corners=False)


class _AttentionCell(nn.Module):
    def __init__(self, enc_dim: int, hidden: int, n_classes: int):
        super().__init__()
        self.i2h = nn.Linear(enc_dim, hidden, bias=False)
        self.h2h = nn.Linear(hidden, hidden)
        self.score = nn.Linear(hidden, 1, bias=False)
        self.rnn = nn.GRUCell(enc_dim + n_classes, hidden)

    def forward(self, prev_hidden, enc, onehot):
        # enc: [B, T, enc_dim]
        e = self.score(torch.tanh(self.i2h(enc) + self.h2h(prev_hidden)[:, None]))
        alpha = F.softmax(e, dim=1)
        context = (alpha * enc).sum(dim=1)
        hidden = self.rnn(torch.cat([context, onehot], dim=1), prev_hidden)
        return hidden


@dataclasses.dataclass
class RecognizerOutput:
    per_step_logits: torch.Tensor   # [B, T, n_classes]
    decoded: list[str]


class Recognizer(nn.Module):
    """TPS + conv feature extractor + attention decoder word recognizer."""

    GO, EOS = 0, 1

    def __init__(self, charset: str = config.DEFAULT_CHARSET,
                 max_len: int = config.MAX_CONTENT_LEN,
                 use_tps: bool = True, use_bilstm: bool = False,
                 shrink: int = 1, hidden: int = 256):
        super().__init__()
        self.charset = charset
        self.max_len = max_len
        self.n_classes = len(charset) + 2
        self.use_tps = use_tps
        self.input_size = (32, 128)
        if use_tps:
            self.tps = _TPS(out_size=self.input_size, shrink=shrink)
        c = [max(4, ch // shrink) for ch in (64, 128, 256, 512)]
        self.backbone = nn.Sequential(
            nn.Conv2d(3, c[0], 3, padding=1), nn.BatchNorm2d(c[0]), nn.ReLU(True),
            nn.MaxPool2d(2, 2),                                    # 16 x 64
            nn.Conv2d(c[0], c[1], 3, padding=1), nn.BatchNorm2d(c[1]), nn.ReLU(True),
            nn.MaxPool2d(2, 2),                                    # 8 x 32
            nn.Conv2d(c[1], c[2], 3, padding=1), nn.BatchNorm2d(c[2]), nn.ReLU(True),
            nn.MaxPool2d((2, 1), (2, 1)),                          # 4 x 32
            nn.Conv2d(c[2], c[3], 3, padding=1), nn.BatchNorm2d(c[3]), nn.ReLU(True),
            nn.AdaptiveAvgPool2d((1, 32)),                         # 1 x 32
        )
        self.enc_dim = c[3]
        self.use_bilstm = use_bilstm
        if use_bilstm:
            self.bilstm = nn.LSTM(self.enc_dim, self.enc_dim // 2, batch_first=True,
                                  bidirectional=True)
        hidden = max(8, hidden // shrink)
        self.hidden = hidden
        self.cell = _AttentionCell(self.enc_dim, hidden, self.n_classes)
        self.out = nn.Linear(hidden, self.n_classes)

    # -- text codec -------------------------------------------------------
    def encode_text(self, texts: list[str]) -> torch.Tensor:
        """Target index tensor [B, max_len+1], EOS-padded."""
        t = torch.full((len(texts), self.max_len + 1), self.EOS, dtype=torch.long)
        for i, s in enumerate(texts):
            if len(s) > self.max_len:
                raise errors.LengthOverflow(f"{s!r} longer than {self.max_len}")
            for j, ch in enumerate(s):
                idx = self.charset.find(ch)
                if idx < 0:
                    raise errors.UnsupportedChar(f"{ch!r} not in charset")
                t[i, j] = idx + 2
        return t

    def decode_indices(self, idx: torch.Tensor) -> list[str]:
        texts = []
        for row in idx.tolist():
            s = []
            for v in row:
                if v == self.EOS:
                    break
                if v >= 2:
                    s.append(self.charset[v - 2])
            texts.append("".join(s))
        return texts

    # -- forward ----------------------------------------------------------
    def _prepare(self, img: torch.Tensor) -> torch.Tensor:
        if img.dim() == 3:
            img = img[None]
        if img.shape[1] == 1:
            img = img.repeat(1, 3, 1, 1)
        if img.shape[1] != 3:
            raise errors.BadShape(f"expected 1 or 3 channels, got {img.shape[1]}")
        if tuple(img.shape[2:]) != self.input_size:
            img = F.interpolate(img, size=self.input_size, mode="bilinear",
                                align_corners=False)
        return img

    def forward(self, img: torch.Tensor,
                targets: torch.Tensor | None = None) -> torch.Tensor:
        """Per-step logits [B, max_len+1, n_classes].

        With ``targets`` given, decoding is teacher-forced (training);
        otherwise the previous argmax feeds the next step.
        """
        img = self._prepare(img)
        if self.use_tps:
            img = self.tps(img)
        enc = self.backbone(img).squeeze(2).permute(0, 2, 1)   # [B, T, enc_dim]
        if self.use_bilstm:
            enc, _ = self.bilstm(enc)
        b = img.shape[0]
        hidden = enc.new_zeros(b, self.hidden)
        token = torch.full((b,), self.GO, dtype=torch.long, device=img.device)
        steps = []
        for t in range(self.max_len + 1):
            onehot = F.one_hot(token, self.n_classes).to(enc.dtype)
            hidden = self.cell(hidden, enc, onehot)
            logits = self.out(hidden)
            steps.append(logits)
            if targets is not None:
                token = targets[:, t]
            else:
                token = logits.argmax(dim=1)
        return torch.stack(steps, dim=1)

    @torch.no_grad()
    def recognize(self, img: torch.Tensor) -> RecognizerOutput:
        was_training = self.training
        self.eval()
        logits = self.forward(img)
        if was_training:
            self.train()
        return RecognizerOutput(per_step_logits=logits,
                                decoded=self.decode_indices(logits.argmax(dim=2)))
