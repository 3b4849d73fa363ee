import type { Box } from "./types.js";

export const MIN_SIZE = 4; // pixels; smaller releases are treated as accidental

export type Handle =
  | "nw" | "n" | "ne" | "e" | "se" | "s" | "sw" | "w"
  | "move";

/** Normalize so x0 <= x1, y0 <= y1. */
export function normalize(b: Box): Box {
  return {
    x0: Math.min(b.x0, b.x1),
    y0: Math.min(b.y0, b.y1),
    x1: Math.max(b.x0, b.x1),
    y1: Math.max(b.y0, b.y1),
  };
}

/** Clamp a box to image bounds, preserving order. */
export function clampToImage(b: Box, width: number, height: number): Box {
  const n = normalize(b);
  return {
    x0: Math.min(Math.max(n.x0, 0), width),
    y0: Math.min(Math.max(n.y0, 0), height),
    x1: Math.min(Math.max(n.x1, 0), width),
    y1: Math.min(Math.max(n.y1, 0), height),
  };
}

export function area(b: Box): number {
  const n = normalize(b);
  return (n.x1 - n.x0) * (n.y1 - n.y0);
}

/** A drag release below MIN_SIZE in either dimension is rejected. */
export function isUsable(b: Box): boolean {
  const n = normalize(b);
  return n.x1 - n.x0 >= MIN_SIZE && n.y1 - n.y0 >= MIN_SIZE;
}

export function round(b: Box): Box {
  return {
    x0: Math.round(b.x0),
    y0: Math.round(b.y0),
    x1: Math.round(b.x1),
    y1: Math.round(b.y1),
  };
}

const HANDLE_RADIUS = 6;

/** Which resize/move handle a point grabs, if any. */
export function hitTest(b: Box, x: number, y: number): Handle | null {
  const n = normalize(b);
  const cx = (n.x0 + n.x1) / 2;
  const cy = (n.y0 + n.y1) / 2;
  const near = (px: number, py: number) =>
    Math.abs(x - px) <= HANDLE_RADIUS && Math.abs(y - py) <= HANDLE_RADIUS;
  if (near(n.x0, n.y0)) return "nw";
  if (near(n.x1, n.y0)) return "ne";
  if (near(n.x0, n.y1)) return "sw";
  if (near(n.x1, n.y1)) return "se";
  if (near(cx, n.y0)) return "n";
  if (near(cx, n.y1)) return "s";
  if (near(n.x0, cy)) return "w";
  if (near(n.x1, cy)) return "e";
  if (x > n.x0 && x < n.x1 && y > n.y0 && y < n.y1) return "move";
  return null;
}

/**
 * Apply a drag of (dx, dy) through a handle. The result is clamped to the
 * image; a "move" drag never changes the box size (it stops at the edge).
 */
export function applyDrag(
  b: Box,
  handle: Handle,
  dx: number,
  dy: number,
  width: number,
  height: number,
): Box {
  const n = normalize(b);
  if (handle === "move") {
    const w = n.x1 - n.x0;
    const h = n.y1 - n.y0;
    const x0 = Math.min(Math.max(n.x0 + dx, 0), width - w);
    const y0 = Math.min(Math.max(n.y0 + dy, 0), height - h);
    return { x0, y0, x1: x0 + w, y1: y0 + h };
  }
  const out = { ...n };
  if (handle.includes("w")) out.x0 += dx;
  if (handle.includes("e")) out.x1 += dx;
  if (handle.includes("n")) out.y0 += dy;
  if (handle.includes("s")) out.y1 += dy;
  return clampToImage(out, width, height);
}

export function toTuple(b: Box): [number, number, number, number] {
  const n = round(normalize(b));
  return [n.x0, n.y0, n.x1, n.y1];
}
