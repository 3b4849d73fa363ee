"""Shared fixtures: tiny synthetic datasets and /8-scaled models.

Everything heavy is session-scoped; datasets are small enough that the
whole suite stays CPU-friendly. Environment switches:

  TSB_RUN_SLOW=1   run the full-scale overfit smoke (hours on CPU)
  TSB_RUN_E2E=1    run the full desk-scale end-to-end acceptance run
"""

from __future__ import annotations

import os

import pytest
import torch

from tsb import synth
from tsb.config import LossWeights, TrainConfig
from tsb.networks.aux import Recognizer, TypefaceClassifier
from tsb.trainer import Trainer

SHRINK = 8


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running, env-gated test")


@pytest.fixture(scope="session")
def data_root(tmp_path_factory):
    return tmp_path_factory.mktemp("data")


@pytest.fixture(scope="session")
def selfsup_manifest(data_root):
    return synth.build_selfsup_set(10, seed=11, out_dir=data_root / "selfsup")


@pytest.fixture(scope="session")
def paired_manifest(data_root):
    return synth.build_paired_set(5, seed=12, out_dir=data_root / "paired")


@pytest.fixture(scope="session")
def fonts_manifest(data_root):
    return synth.build_font_set(4, 8, seed=13, out_dir=data_root / "fonts")


@pytest.fixture()
def tiny_cfg():
    return TrainConfig(batch=2, seed=0, shrink=SHRINK, checkpoint_every=0,
                       weights=LossWeights())


@pytest.fixture()
def tiny_classifier():
    torch.manual_seed(100)
    net = TypefaceClassifier(n_fonts=4, shrink=SHRINK)
    net.eval()
    return net


@pytest.fixture()
def tiny_recognizer():
    torch.manual_seed(101)
    net = Recognizer(use_tps=False, shrink=SHRINK)
    net.eval()
    return net


@pytest.fixture()
def tiny_trainer(tiny_cfg, tiny_classifier, tiny_recognizer):
    return Trainer(tiny_cfg, tiny_classifier, tiny_recognizer)


@pytest.fixture(scope="session")
def trained_ckpt(tmp_path_factory, selfsup_manifest):
    """A 2-step checkpoint at shrink=8 for pipeline/service/CLI tests."""
    from tsb.data import SelfSupDataset

    torch.manual_seed(100)
    classifier = TypefaceClassifier(n_fonts=4, shrink=SHRINK).eval()
    torch.manual_seed(101)
    recognizer = Recognizer(use_tps=False, shrink=SHRINK).eval()
    cfg = TrainConfig(batch=2, seed=0, shrink=SHRINK, checkpoint_every=0)
    trainer = Trainer(cfg, classifier, recognizer)
    trainer.fit(SelfSupDataset(selfsup_manifest), steps=2, log=lambda *_: None)
    path = tmp_path_factory.mktemp("ckpt") / "final.ckpt"
    trainer.save(path)
    return path


def env_gated(var: str):
    return pytest.mark.skipif(
        not os.environ.get(var),
        reason=f"full-scale run; set {var}=1 to enable")
