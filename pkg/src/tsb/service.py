"""HTTP service exposing the transfer pipeline.

Images travel as base64 PNG inside JSON. Requests are pure functions of
(checkpoint, request); forwards run on read-only weights behind a
bounded admission semaphore (depth 32, overflow -> 503).
"""

from __future__ import annotations

import base64
import io
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel, ConfigDict

from . import checkpoint, errors, pipeline
from .trainer import TSBModels

MAX_PIXELS = 8_000_000
QUEUE_DEPTH = 32
SCHEMA_VERSION = 1


class TransferRequestBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    scene_png_b64: str
    box: list[int]            # x0, y0, x1, y1
    content: str
    return_mask: bool = False
    blend: bool = False
    blend_mode: str = "poisson"


def _decode_png(b64: str) -> np.ndarray:
    try:
        raw = base64.b64decode(b64, validate=True)
        img = Image.open(io.BytesIO(raw)).convert("RGB")
    except Exception as e:
        raise errors.ParseError(f"bad PNG payload: {e}") from e
    return np.asarray(img, dtype=np.float32) / 255.0


def _encode_png(arr: np.ndarray) -> str:
    arr = np.clip(arr, 0, 1)
    if arr.ndim == 2:
        img = Image.fromarray((arr * 255).astype(np.uint8), mode="L")
    else:
        img = Image.fromarray((arr * 255).astype(np.uint8))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()


def create_app(models: TSBModels, charset: str, max_len: int,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="text style transfer service")
    model_hash = checkpoint.param_checksum(models)[:16]
    slots = threading.BoundedSemaphore(QUEUE_DEPTH)

    @app.exception_handler(errors.TsbError)
    async def _tsb_error(_req: Request, exc: errors.TsbError):
        return JSONResponse(status_code=400,
                            content={"error": exc.code, "detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _schema_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "ParseError",
                                     "detail": str(exc.errors())})

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "model_hash": model_hash, "charset": charset}

    @app.get("/v1/limits")
    def limits():
        return {"max_content_length": max_len, "charset": charset,
                "max_pixels": MAX_PIXELS}

    @app.post("/v1/transfer")
    def do_transfer(body: TransferRequestBody):
        if body.schema_version != SCHEMA_VERSION:
            return JSONResponse(status_code=400, content={
                "error": "VersionMismatch",
                "detail": f"schema_version must be {SCHEMA_VERSION}"})
        if len(body.box) != 4:
            raise errors.BadShape("box must have 4 entries")
        scene = _decode_png(body.scene_png_b64)
        if scene.shape[0] * scene.shape[1] > MAX_PIXELS:
            return JSONResponse(status_code=413, content={
                "error": "TooLarge", "detail": "scene exceeds 8 MP"})
        if not slots.acquire(blocking=False):
            return JSONResponse(status_code=503, content={
                "error": "Busy", "detail": "work queue full"})
        try:
            result = pipeline.transfer(
                models, scene, tuple(body.box), body.content,
                charset=charset, max_len=max_len,
                return_mask=body.return_mask, do_blend=body.blend,
                blend_mode=body.blend_mode)
        finally:
            slots.release()
        resp = {"schema_version": SCHEMA_VERSION,
                "patch_png_b64": _encode_png(result.patch)}
        if result.mask is not None:
            resp["mask_png_b64"] = _encode_png(result.mask)
        if result.blended_scene is not None:
            resp["blended_png_b64"] = _encode_png(result.blended_scene)
        return resp

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
