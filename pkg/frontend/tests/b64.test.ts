import { describe, expect, it } from "vitest";

import { b64ToBytes, b64ToDataUrl, bytesToB64, dataUrlToB64 } from "../src/b64.js";

describe("base64 helpers", () => {
  it("round-trips arbitrary bytes", () => {
    const bytes = new Uint8Array(1000).map((_, i) => (i * 37) % 256);
    expect(b64ToBytes(bytesToB64(bytes))).toEqual(bytes);
  });

  it("decodes to the exact same bytes the server encoded", () => {
    // btoa of "PNG!" — a stand-in for a server payload
    const b64 = btoa("PNG!");
    expect(Array.from(b64ToBytes(b64)))
      .toEqual(["P", "N", "G", "!"].map((c) => c.charCodeAt(0)));
  });

  it("strips data-URL prefixes", () => {
    expect(dataUrlToB64("data:image/png;base64,QUJD")).toBe("QUJD");
    expect(dataUrlToB64("QUJD")).toBe("QUJD");
  });

  it("builds PNG data URLs", () => {
    expect(b64ToDataUrl("QUJD")).toBe("data:image/png;base64,QUJD");
  });
});
