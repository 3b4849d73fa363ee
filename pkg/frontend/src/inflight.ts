/**
 * Single-flight request gate: starting a new request aborts the previous
 * one, so at most one transfer is in flight per session and stale previews
 * never overwrite fresh ones.
 */
export class SingleFlight {
  private controller: AbortController | null = null;
  private seq = 0;

  /**
   * Run `task` with an AbortSignal, cancelling any request still in flight.
   * Resolves to null when this call was superseded before it finished.
   */
  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.seq;
    try {
      const result = await task(controller.signal);
      return ticket === this.seq ? result : null;
    } catch (err) {
      if (controller.signal.aborted && ticket !== this.seq) return null;
      throw err;
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }

  cancel(): void {
    this.controller?.abort();
    this.controller = null;
    this.seq++;
  }

  get busy(): boolean {
    return this.controller !== null;
  }
}
