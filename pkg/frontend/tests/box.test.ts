import { describe, expect, it } from "vitest";

import {
  applyDrag, area, clampToImage, hitTest, isUsable, normalize, round, toTuple,
} from "../src/box.js";

describe("normalize", () => {
  it("orders corners", () => {
    expect(normalize({ x0: 10, y0: 20, x1: 2, y1: 4 }))
      .toEqual({ x0: 2, y0: 4, x1: 10, y1: 20 });
  });

  it("keeps ordered boxes unchanged", () => {
    const b = { x0: 1, y0: 2, x1: 3, y1: 4 };
    expect(normalize(b)).toEqual(b);
  });
});

describe("clampToImage", () => {
  it("clamps a drag past the image edge", () => {
    expect(clampToImage({ x0: -5, y0: 10, x1: 700, y1: 900 }, 640, 480))
      .toEqual({ x0: 0, y0: 10, x1: 640, y1: 480 });
  });

  it("leaves interior boxes alone", () => {
    const b = { x0: 10, y0: 10, x1: 20, y1: 20 };
    expect(clampToImage(b, 100, 100)).toEqual(b);
  });
});

describe("isUsable", () => {
  it("rejects zero-area releases", () => {
    expect(isUsable({ x0: 5, y0: 5, x1: 5, y1: 5 })).toBe(false);
    expect(area({ x0: 5, y0: 5, x1: 5, y1: 5 })).toBe(0);
  });

  it("rejects hairline boxes", () => {
    expect(isUsable({ x0: 0, y0: 0, x1: 100, y1: 2 })).toBe(false);
  });

  it("accepts normal boxes", () => {
    expect(isUsable({ x0: 0, y0: 0, x1: 40, y1: 16 })).toBe(true);
  });
});

describe("hitTest", () => {
  const b = { x0: 10, y0: 10, x1: 50, y1: 30 };

  it("finds corner handles", () => {
    expect(hitTest(b, 10, 10)).toBe("nw");
    expect(hitTest(b, 50, 30)).toBe("se");
  });

  it("finds edge handles", () => {
    expect(hitTest(b, 30, 10)).toBe("n");
    expect(hitTest(b, 10, 20)).toBe("w");
  });

  it("reports the interior as move", () => {
    expect(hitTest(b, 30, 20)).toBe("move");
  });

  it("misses points away from the box", () => {
    expect(hitTest(b, 80, 80)).toBeNull();
  });
});

describe("applyDrag", () => {
  const b = { x0: 10, y0: 10, x1: 50, y1: 30 };

  it("moves without resizing and stops at the edge", () => {
    const moved = applyDrag(b, "move", -100, 5, 200, 100);
    expect(moved).toEqual({ x0: 0, y0: 15, x1: 40, y1: 35 });
    expect(moved.x1 - moved.x0).toBe(40);
  });

  it("resizes through a corner", () => {
    expect(applyDrag(b, "se", 10, 4, 200, 100))
      .toEqual({ x0: 10, y0: 10, x1: 60, y1: 34 });
  });

  it("resizes a single edge", () => {
    expect(applyDrag(b, "w", -4, 99, 200, 100))
      .toEqual({ x0: 6, y0: 10, x1: 50, y1: 30 });
  });

  it("clamps resizes to the image", () => {
    expect(applyDrag(b, "e", 500, 0, 200, 100).x1).toBe(200);
  });
});

describe("toTuple", () => {
  it("rounds and orders for the API", () => {
    expect(toTuple({ x0: 10.6, y0: 3.2, x1: 2.4, y1: 9.9 }))
      .toEqual([2, 3, 11, 10]);
  });

  it("round matches per-field rounding", () => {
    expect(round({ x0: 0.5, y0: 1.4, x1: 2.5, y1: 3.6 }))
      .toEqual({ x0: 1, y0: 1, x1: 3, y1: 4 });
  });
});
