import type { Limits } from "./types.js";

export interface ValidationError {
  code: "EmptyContent" | "LengthOverflow" | "UnsupportedChar";
  message: string;
}

/**
 * Client-side mirror of the service's content checks, driven by /v1/limits
 * so the charset and length cap always match the running checkpoint.
 */
export function validateContent(text: string, limits: Limits): ValidationError | null {
  if (text.length === 0) {
    return { code: "EmptyContent", message: "Type the replacement text first." };
  }
  if (text.length > limits.max_content_length) {
    return {
      code: "LengthOverflow",
      message: `At most ${limits.max_content_length} characters (got ${text.length}).`,
    };
  }
  const allowed = new Set(limits.charset);
  for (const ch of text) {
    if (!allowed.has(ch)) {
      return {
        code: "UnsupportedChar",
        message: `Character ${JSON.stringify(ch)} is not in the model's charset.`,
      };
    }
  }
  return null;
}
