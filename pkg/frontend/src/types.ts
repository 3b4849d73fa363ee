/** Shared types mirroring the HTTP API schema (version 1). */

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Limits {
  max_content_length: number;
  charset: string;
  max_pixels: number;
}

export interface Health {
  status: string;
  model_hash: string;
  charset: string;
}

export interface TransferRequest {
  schema_version: number;
  scene_png_b64: string;
  box: [number, number, number, number];
  content: string;
  return_mask?: boolean;
  blend?: boolean;
  blend_mode?: string;
}

export interface TransferResponse {
  schema_version: number;
  patch_png_b64: string;
  mask_png_b64?: string;
  blended_png_b64?: string;
}

export interface ApiErrorBody {
  error: string;
  detail?: string;
}
