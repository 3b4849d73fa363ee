import { ApiClient, ApiError } from "./api.js";
import { b64ToBytes, b64ToDataUrl, dataUrlToB64 } from "./b64.js";
import * as boxes from "./box.js";
import type { Handle } from "./box.js";
import { SingleFlight } from "./inflight.js";
import { EditSession } from "./session.js";
import type { Box, Limits } from "./types.js";
import { validateContent } from "./validation.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const api = new ApiClient(
  new URLSearchParams(location.search).get("api") ?? "",
);
const flight = new SingleFlight();

let limits: Limits | null = null;
let session: EditSession | null = null;
let sceneImg: HTMLImageElement | null = null;
let box: Box | null = null;
let previewB64: string | null = null;

const canvas = $<HTMLCanvasElement>("canvas");
const ctx = canvas.getContext("2d")!;

function toast(message: string, isError = false): void {
  const el = $("toast");
  el.textContent = message;
  el.className = isError ? "toast error" : "toast";
  el.style.opacity = "1";
  setTimeout(() => (el.style.opacity = "0"), 4000);
}

function setBusy(busy: boolean): void {
  for (const id of ["preview", "commit"]) {
    $<HTMLButtonElement>(id).disabled = busy || !session || !box;
  }
  $("spinner").style.visibility = busy ? "visible" : "hidden";
}

function updateControls(): void {
  const ready = !!session && !!box && !flight.busy;
  $<HTMLButtonElement>("preview").disabled = !ready;
  $<HTMLButtonElement>("commit").disabled = !ready;
  $<HTMLButtonElement>("undo").disabled = !session?.canUndo;
  $<HTMLButtonElement>("export").disabled = !session;
  $<HTMLButtonElement>("save-session").disabled = !session;
  const readout = $("box-readout");
  if (box) {
    const [x0, y0, x1, y1] = boxes.toTuple(box);
    readout.textContent = `box ${x0},${y0} → ${x1},${y1}  (${x1 - x0}×${y1 - y0})`;
  } else {
    readout.textContent = "drag on the image to mark a word";
  }
}

function draw(): void {
  if (!sceneImg) return;
  canvas.width = sceneImg.naturalWidth;
  canvas.height = sceneImg.naturalHeight;
  ctx.drawImage(sceneImg, 0, 0);
  if (box) {
    const n = boxes.round(boxes.normalize(box));
    if (previewB64) {
      const img = new Image();
      img.onload = () => {
        ctx.save();
        ctx.globalAlpha = 0.75;
        ctx.drawImage(img, n.x0, n.y0, n.x1 - n.x0, n.y1 - n.y0);
        ctx.restore();
        drawBoxOutline(n);
      };
      img.src = b64ToDataUrl(previewB64);
    }
    drawBoxOutline(n);
  }
  updateControls();
}

function drawBoxOutline(n: Box): void {
  ctx.strokeStyle = "#2d7ff9";
  ctx.lineWidth = 2;
  ctx.strokeRect(n.x0 + 0.5, n.y0 + 0.5, n.x1 - n.x0, n.y1 - n.y0);
  ctx.fillStyle = "#2d7ff9";
  const cx = (n.x0 + n.x1) / 2;
  const cy = (n.y0 + n.y1) / 2;
  for (const [hx, hy] of [
    [n.x0, n.y0], [cx, n.y0], [n.x1, n.y0], [n.x1, cy],
    [n.x1, n.y1], [cx, n.y1], [n.x0, n.y1], [n.x0, cy],
  ]) {
    ctx.fillRect(hx - 3, hy - 3, 6, 6);
  }
}

function setScene(b64: string): void {
  sceneImg = new Image();
  sceneImg.onload = draw;
  sceneImg.src = b64ToDataUrl(b64);
}

// ---------------------------------------------------------------------------
// Canvas interactions

interface DragState {
  handle: Handle | "new";
  startX: number;
  startY: number;
  startBox: Box | null;
}
let drag: DragState | null = null;

function canvasPoint(ev: MouseEvent): { x: number; y: number } {
  const r = canvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - r.left) / r.width) * canvas.width,
    y: ((ev.clientY - r.top) / r.height) * canvas.height,
  };
}

canvas.addEventListener("mousedown", (ev) => {
  if (!sceneImg) return;
  const { x, y } = canvasPoint(ev);
  const handle = box ? boxes.hitTest(box, x, y) : null;
  drag = handle
    ? { handle, startX: x, startY: y, startBox: { ...box! } }
    : { handle: "new", startX: x, startY: y, startBox: null };
  if (!handle) {
    previewB64 = null;
    box = { x0: x, y0: y, x1: x, y1: y };
  }
});

canvas.addEventListener("mousemove", (ev) => {
  if (!drag || !sceneImg) return;
  const { x, y } = canvasPoint(ev);
  if (drag.handle === "new") {
    box = boxes.clampToImage(
      { x0: drag.startX, y0: drag.startY, x1: x, y1: y },
      canvas.width, canvas.height,
    );
  } else {
    previewB64 = null;
    box = boxes.applyDrag(
      drag.startBox!, drag.handle, x - drag.startX, y - drag.startY,
      canvas.width, canvas.height,
    );
  }
  draw();
});

window.addEventListener("mouseup", () => {
  if (!drag) return;
  if (box && !boxes.isUsable(box)) {
    box = drag.handle === "new" ? null : drag.startBox;
    toast("Box too small — drag a larger region around the word.", true);
  }
  drag = null;
  draw();
});

// ---------------------------------------------------------------------------
// Actions

function contentOrToast(): string | null {
  const text = $<HTMLInputElement>("content").value;
  if (!limits) {
    toast("Service limits not loaded yet.", true);
    return null;
  }
  const err = validateContent(text, limits);
  if (err) {
    toast(err.message, true);
    return null;
  }
  return text;
}

async function runTransfer(blend: boolean): Promise<void> {
  if (!session || !box) return;
  const content = contentOrToast();
  if (content === null) return;
  setBusy(true);
  try {
    const result = await flight.run((signal) =>
      api.transfer(
        {
          scene_png_b64: session!.composite,
          box: boxes.toTuple(box!),
          content,
          blend,
          blend_mode: "poisson",
        },
        signal,
      ),
    );
    if (result === null) return; // superseded by a newer request
    if (blend) {
      session.commit(box, content, result.patch_png_b64, result.blended_png_b64!);
      previewB64 = null;
      box = null;
      setScene(session.composite);
      toast("Edit committed.");
    } else {
      previewB64 = result.patch_png_b64;
      draw();
    }
  } catch (err) {
    if (err instanceof ApiError) {
      toast(`${err.code}${err.status === 503 ? " — server busy, retry" : ""}`, true);
    } else if ((err as Error).name !== "AbortError") {
      toast(`Request failed: ${(err as Error).message}`, true);
    }
  } finally {
    setBusy(false);
    updateControls();
  }
}

$("preview").addEventListener("click", () => void runTransfer(false));
$("commit").addEventListener("click", () => void runTransfer(true));

$("undo").addEventListener("click", () => {
  if (!session?.undo()) return;
  previewB64 = null;
  box = null;
  setScene(session.composite);
  toast("Reverted to the previous composite.");
});

$("export").addEventListener("click", () => {
  if (!session) return;
  // the composite is the server's blended PNG verbatim: byte-identical export
  const bytes = b64ToBytes(session.composite);
  const blob = new Blob([bytes.buffer as ArrayBuffer], { type: "image/png" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "edited.png";
  a.click();
  URL.revokeObjectURL(a.href);
});

$("save-session").addEventListener("click", () => {
  if (!session) return;
  const blob = new Blob([session.serialize()], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "session.json";
  a.click();
  URL.revokeObjectURL(a.href);
});

$<HTMLInputElement>("load-session").addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  try {
    session = EditSession.restore(await file.text());
    previewB64 = null;
    box = null;
    setScene(session.composite);
    toast("Session restored.");
  } catch (err) {
    toast(`Could not restore session: ${(err as Error).message}`, true);
  }
});

$<HTMLInputElement>("load-image").addEventListener("change", (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  const reader = new FileReader();
  reader.onload = () => {
    const b64 = dataUrlToB64(reader.result as string);
    session = new EditSession(b64);
    previewB64 = null;
    box = null;
    setScene(b64);
  };
  reader.readAsDataURL(file);
});

// ---------------------------------------------------------------------------
// Startup

async function init(): Promise<void> {
  try {
    const [h, l] = await Promise.all([api.health(), api.limits()]);
    limits = l;
    $("service-info").textContent =
      `model ${h.model_hash} · charset ${l.charset.length} chars · ` +
      `max ${l.max_content_length} chars`;
    $<HTMLInputElement>("content").maxLength = l.max_content_length;
  } catch {
    toast("Cannot reach the inference service.", true);
  }
  updateControls();
}

void init();
