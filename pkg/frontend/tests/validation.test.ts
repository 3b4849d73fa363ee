import { describe, expect, it } from "vitest";

import { validateContent } from "../src/validation.js";
import type { Limits } from "../src/types.js";

const LIMITS: Limits = {
  max_content_length: 8,
  charset: "abcABC123",
  max_pixels: 8_000_000,
};

describe("validateContent", () => {
  it("rejects empty text", () => {
    expect(validateContent("", LIMITS)?.code).toBe("EmptyContent");
  });

  it("rejects text over the length cap", () => {
    expect(validateContent("a".repeat(9), LIMITS)?.code).toBe("LengthOverflow");
    expect(validateContent("a".repeat(8), LIMITS)).toBeNull();
  });

  it("rejects characters outside the charset", () => {
    const err = validateContent("abc!", LIMITS);
    expect(err?.code).toBe("UnsupportedChar");
    expect(err?.message).toContain("!");
  });

  it("accepts valid text", () => {
    expect(validateContent("aB1", LIMITS)).toBeNull();
  });

  it("follows whatever charset the service reports", () => {
    const greek: Limits = { ...LIMITS, charset: "αβγ" };
    expect(validateContent("αβ", greek)).toBeNull();
    expect(validateContent("ab", greek)?.code).toBe("UnsupportedChar");
  });
});
