import type { Box } from "./types.js";

export interface EditOp {
  box: Box;
  content: string;
  /** base64 PNG of the patch returned for this edit (thumbnail). */
  patchB64: string;
  status: "committed";
}

interface SessionJson {
  version: 1;
  sourceB64: string;
  compositeB64: string;
  ops: EditOp[];
  undoStack: string[];
}

/**
 * Editing state for one photo. The composite is always the exact base64 PNG
 * the service returned from the last committed blend — the client never
 * re-encodes pixels, so exports are byte-identical to the server output.
 */
export class EditSession {
  private compositeB64: string;
  private ops: EditOp[] = [];
  private undoStack: string[] = [];

  constructor(private readonly sourceB64: string) {
    this.compositeB64 = sourceB64;
  }

  /** Current composite (base64 PNG); the scene sent with the next request. */
  get composite(): string {
    return this.compositeB64;
  }

  get source(): string {
    return this.sourceB64;
  }

  get history(): readonly EditOp[] {
    return this.ops;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  /** Record a committed edit: the blended scene becomes the new composite. */
  commit(box: Box, content: string, patchB64: string, blendedB64: string): void {
    this.undoStack.push(this.compositeB64);
    this.compositeB64 = blendedB64;
    this.ops.push({ box, content, patchB64, status: "committed" });
  }

  /** Restore the exact prior composite. Returns false when empty. */
  undo(): boolean {
    const prev = this.undoStack.pop();
    if (prev === undefined) return false;
    this.compositeB64 = prev;
    this.ops.pop();
    return true;
  }

  toJSON(): SessionJson {
    return {
      version: 1,
      sourceB64: this.sourceB64,
      compositeB64: this.compositeB64,
      ops: [...this.ops],
      undoStack: [...this.undoStack],
    };
  }

  serialize(): string {
    return JSON.stringify(this.toJSON());
  }

  static restore(json: string): EditSession {
    const data = JSON.parse(json) as SessionJson;
    if (data.version !== 1) {
      throw new Error(`unsupported session version ${data.version}`);
    }
    const s = new EditSession(data.sourceB64);
    s.compositeB64 = data.compositeB64;
    s.ops = [...data.ops];
    s.undoStack = [...data.undoStack];
    return s;
  }
}
