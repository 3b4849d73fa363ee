"""Versioned checkpoint containers.

The main training checkpoint stores every network, both optimizers, the
path-length EMA, the step counter, and all RNG states, so training
resumes bit-for-bit. Loading validates schema version, charset, and an
architecture hash.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import torch

from . import errors

SCHEMA_VERSION = 1


def arch_hash(arch: dict) -> str:
    return hashlib.sha256(json.dumps(arch, sort_keys=True).encode()).hexdigest()[:16]


def save(path: str | Path, *, arch: dict, charset: str,
         nets: dict[str, torch.nn.Module],
         opts: dict[str, torch.optim.Optimizer] | None = None,
         step: int = 0, extra: dict | None = None,
         rng: dict | None = None) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "charset": charset,
        "arch": arch,
        "arch_hash": arch_hash(arch),
        "step": step,
        "nets": {k: v.state_dict() for k, v in nets.items()},
        "opts": {k: v.state_dict() for k, v in (opts or {}).items()},
        "extra": extra or {},
        "rng": rng or {},
    }
    torch.save(payload, str(path))


def load(path: str | Path, *, expect_arch: dict | None = None,
         expect_charset: str | None = None) -> dict:
    try:
        payload = torch.load(str(path), map_location="cpu", weights_only=False)
    except Exception as e:
        raise errors.ParseError(f"unreadable checkpoint {path}: {e}") from e
    if not isinstance(payload, dict) or "schema_version" not in payload:
        raise errors.ParseError(f"{path} is not a checkpoint container")
    if payload["schema_version"] != SCHEMA_VERSION:
        raise errors.VersionMismatch(
            f"checkpoint schema {payload['schema_version']} != {SCHEMA_VERSION}")
    if expect_charset is not None and payload["charset"] != expect_charset:
        raise errors.VersionMismatch("checkpoint charset differs from run charset")
    if expect_arch is not None and arch_hash(expect_arch) != payload["arch_hash"]:
        raise errors.ArchMismatch(
            f"architecture hash {payload['arch_hash']} != {arch_hash(expect_arch)}")
    return payload


def param_checksum(module: torch.nn.Module) -> str:
    """Stable digest of all parameters and buffers; used to assert frozen-ness."""
    h = hashlib.sha256()
    for name, t in sorted(module.state_dict().items()):
        h.update(name.encode())
        h.update(t.detach().cpu().numpy().tobytes())
    return h.hexdigest()
