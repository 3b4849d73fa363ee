"""Command-line interface."""

from __future__ import annotations

import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import click
import numpy as np
from PIL import Image

from . import evaluate, pretrain, report, synth
from .config import LossWeights, TrainConfig


def _save_image(arr: np.ndarray, path: str) -> None:
    arr = np.clip(arr, 0, 1)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray((arr * 255).astype(np.uint8), mode=mode).save(path)


def _load_image(path: str) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0


def _parse_box(text: str) -> tuple[int, int, int, int]:
    x, y, w, h = (int(v) for v in text.split(","))
    return (x, y, x + w, y + h)


@click.group()
def main():
    """One-shot text style transfer toolkit."""


@main.command("render-content")
@click.option("--text", required=True)
@click.option("--width", type=int, default=None, help="target width, multiple of 16")
@click.option("--out", required=True, type=click.Path())
def render_content_cmd(text, width, out):
    """Render a string in the canonical content font."""
    from .content import render_content

    _save_image(render_content(text, width), out)
    click.echo(f"wrote {out}")


@main.group()
def synth_cmd():
    """Synthetic dataset generation."""


main.add_command(synth_cmd, name="synth")


@synth_cmd.command("gen")
@click.option("--kind", type=click.Choice(["selfsup", "paired", "fonts"]),
              required=True)
@click.option("--n", type=int, default=1000)
@click.option("--n-fonts", type=int, default=10)
@click.option("--n-per-font", type=int, default=500)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", required=True, type=click.Path())
def synth_gen(kind, n, n_fonts, n_per_font, seed, out_dir):
    if kind == "selfsup":
        manifest = synth.build_selfsup_set(n, seed, out_dir)
    elif kind == "paired":
        manifest = synth.build_paired_set(n, seed, out_dir)
    else:
        manifest = synth.build_font_set(n_fonts, n_per_font, seed, out_dir)
    click.echo(f"wrote {manifest}")


@main.command("pretrain-classifier")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--epochs", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--shrink", type=int, default=1)
def pretrain_classifier_cmd(data, out, epochs, seed, shrink):
    net, acc = pretrain.pretrain_classifier(data, epochs=epochs, seed=seed,
                                            shrink=shrink, log=click.echo)
    pretrain.save_classifier(net, out, shrink=shrink)
    click.echo(f"held-out accuracy {acc:.4f}; wrote {out}")


@main.command("pretrain-recognizer")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--epochs", type=int, default=10)
@click.option("--seed", type=int, default=0)
@click.option("--shrink", type=int, default=1)
@click.option("--tps/--no-tps", default=True)
@click.option("--bilstm/--no-bilstm", default=False)
def pretrain_recognizer_cmd(data, out, epochs, seed, shrink, tps, bilstm):
    net, acc = pretrain.pretrain_recognizer(
        data, epochs=epochs, seed=seed, shrink=shrink,
        use_tps=tps, use_bilstm=bilstm, log=click.echo)
    pretrain.save_recognizer(net, out, shrink=shrink)
    click.echo(f"held-out word accuracy {acc:.4f}; wrote {out}")


def _config_from_toml(path: str | None, **overrides) -> TrainConfig:
    values = {}
    if path:
        with open(path, "rb") as f:
            values = tomllib.load(f)
    weights = LossWeights(**values.pop("weights", {}))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return TrainConfig(weights=weights, **values)


@main.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--classifier", "classifier_path", required=True,
              type=click.Path(exists=True))
@click.option("--recognizer", "recognizer_path", required=True,
              type=click.Path(exists=True))
@click.option("--steps", type=int, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--shrink", type=int, default=None)
@click.option("--resume", type=click.Path(exists=True), default=None)
def train_cmd(config_path, data, out_dir, classifier_path, recognizer_path,
              steps, batch, seed, shrink, resume):
    """Self-supervised training on a selfsup manifest."""
    from .data import SelfSupDataset
    from .trainer import Trainer

    cfg = _config_from_toml(config_path, batch=batch, seed=seed, shrink=shrink)
    classifier = pretrain.load_classifier(classifier_path)
    recognizer = pretrain.load_recognizer(recognizer_path,
                                          expect_charset=cfg.charset)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if resume:
        trainer = Trainer.resume(resume, classifier, recognizer)
    else:
        trainer = Trainer(cfg, classifier, recognizer)
    dataset = SelfSupDataset(data)
    n_steps = steps if steps is not None else cfg.steps
    log_path = out_dir / "train_log.jsonl"
    trainer.fit(dataset, n_steps, log_path=log_path,
                checkpoint_dir=out_dir, log=click.echo)
    final = out_dir / "final.ckpt"
    trainer.save(final)
    report.write_training_curves(log_path, out_dir / "loss_curves.png")
    click.echo(f"wrote {final}")


@main.command("eval")
@click.option("--ckpt", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True),
              help="paired manifest")
@click.option("--metrics", "which", default="mse,ssim,psnr")
@click.option("--classifier", "classifier_path", type=click.Path(exists=True))
@click.option("--recognizer", "recognizer_path", type=click.Path(exists=True))
@click.option("--n-max", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_cmd(ckpt, data, which, classifier_path, recognizer_path, n_max, out_dir):
    """Evaluate a checkpoint on a paired set; writes report + figures."""
    from .trainer import load_models

    models = load_models(ckpt)
    from . import checkpoint as ckpt_mod
    payload = ckpt_mod.load(ckpt)
    charset = payload["charset"]
    classifier = pretrain.load_classifier(classifier_path) if classifier_path else None
    recognizer = (pretrain.load_recognizer(recognizer_path, expect_charset=charset)
                  if recognizer_path else None)
    which_t = tuple(w.strip() for w in which.split(","))
    rep, samples = evaluate.evaluate_paired(
        models, data, recognizer=recognizer, classifier=classifier,
        which=which_t, n_max=n_max, charset=charset,
        max_len=payload["arch"]["max_len"])
    out = report.write_metric_report(rep, out_dir)
    report.write_sample_grid(samples, Path(out_dir) / "samples.png")
    click.echo(json.dumps(rep.to_json(), indent=2))
    click.echo(f"wrote {out}")


@main.command("blend")
@click.option("--scene", required=True, type=click.Path(exists=True))
@click.option("--box", required=True, help="x,y,w,h in pixels")
@click.option("--patch", required=True, type=click.Path(exists=True))
@click.option("--mask", type=click.Path(exists=True), default=None)
@click.option("--mode", type=click.Choice(["poisson", "alpha", "hard"]),
              default="poisson")
@click.option("--out", required=True, type=click.Path())
def blend_cmd(scene, box, patch, mask, mode, out):
    """Composite a patch into a scene photo."""
    from .blend import blend

    mask_arr = None
    if mask:
        mask_arr = np.asarray(Image.open(mask).convert("L"),
                              dtype=np.float32) / 255.0
    result = blend(_load_image(scene), _load_image(patch), _parse_box(box),
                   mask=mask_arr, mode=mode)
    _save_image(result, out)
    click.echo(f"wrote {out}")


@main.command("transfer")
@click.option("--ckpt", required=True, type=click.Path(exists=True))
@click.option("--scene", required=True, type=click.Path(exists=True))
@click.option("--box", required=True, help="x,y,w,h in pixels")
@click.option("--text", required=True)
@click.option("--blend", "do_blend", is_flag=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--mask-out", type=click.Path(), default=None)
def transfer_cmd(ckpt, scene, box, text, do_blend, out, mask_out):
    """One-shot style transfer for a single word box."""
    from . import checkpoint as ckpt_mod
    from . import pipeline
    from .trainer import load_models

    models = load_models(ckpt)
    payload = ckpt_mod.load(ckpt)
    result = pipeline.transfer(
        models, _load_image(scene), _parse_box(box), text,
        charset=payload["charset"], max_len=payload["arch"]["max_len"],
        return_mask=mask_out is not None, do_blend=do_blend)
    _save_image(result.blended_scene if do_blend else result.patch, out)
    if mask_out and result.mask is not None:
        _save_image(result.mask, mask_out)
    click.echo(f"wrote {out}")


@main.command("serve")
@click.option("--ckpt", required=True, type=click.Path(exists=True))
@click.option("--bind", default="127.0.0.1:8742")
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="serve a static frontend from this directory")
def serve_cmd(ckpt, bind, ui_dir):
    """Run the HTTP inference service."""
    import uvicorn

    from . import checkpoint as ckpt_mod
    from .service import create_app
    from .trainer import load_models

    models = load_models(ckpt)
    payload = ckpt_mod.load(ckpt)
    app = create_app(models, charset=payload["charset"],
                     max_len=payload["arch"]["max_len"], ui_dir=ui_dir)
    host, port = bind.rsplit(":", 1)
    uvicorn.run(app, host=host, port=int(port))


if __name__ == "__main__":
    main()
