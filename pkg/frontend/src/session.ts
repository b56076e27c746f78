// Poll-driven session controller: one in-flight state request at a time, a
// short interval while healthy, exponential backoff while the server is
// unreachable, and click capture that arms exactly once per prompt.

import { ConflictError, Polarity, SessionApi, SessionState } from "./api.js";
import { decodePnm, PnmImage } from "./netpbm.js";
import { decodeZivp, ZivpGrid } from "./zivp.js";

export interface PromptContext {
  state: SessionState;
  image: PnmImage;
  entropy: ZivpGrid;
  mask: PnmImage | null;
}

export interface SessionCallbacks {
  onState?(state: SessionState): void;
  onPrompt?(ctx: PromptContext): void;
  onPromptResolved?(): void;
  onDone?(state: SessionState): void;
  onNetworkTrouble?(consecutiveFailures: number): void;
  onNetworkRecovered?(): void;
}

const MAX_BACKOFF_MS = 2000;

export class SessionController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = true;
  private inFlight = false;
  private failures = 0;
  private promptKey: string | null = null;
  private clickArmed = false;

  constructor(
    private readonly api: SessionApi,
    private readonly callbacks: SessionCallbacks = {},
    private readonly pollIntervalMs: number = 150,
  ) {
    if (pollIntervalMs > 250) {
      throw new Error("poll interval must be 250 ms or less");
    }
  }

  get armed(): boolean {
    return this.clickArmed;
  }

  start(): void {
    this.stopped = false;
    this.schedule(0);
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }

  async step(): Promise<void> {
    await this.api.postStep();
    this.schedule(0);
  }

  /** Post the pending click. Capture disarms immediately, so a prompt can
   * never produce two clicks; a 409 just means the view was stale and the
   * next poll resyncs it. */
  async submitClick(row: number, col: number, polarity: Polarity): Promise<boolean> {
    if (!this.clickArmed) return false;
    this.clickArmed = false;
    this.callbacks.onPromptResolved?.();
    try {
      await this.api.postClick(row, col, polarity);
      return true;
    } catch (err) {
      if (err instanceof ConflictError) {
        this.schedule(0);
        return false;
      }
      throw err;
    } finally {
      this.schedule(0);
    }
  }

  async skip(): Promise<void> {
    if (!this.clickArmed) return;
    this.clickArmed = false;
    this.callbacks.onPromptResolved?.();
    await this.api.postSkip();
    this.schedule(0);
  }

  private schedule(delayMs: number): void {
    if (this.stopped) return;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => void this.poll(), delayMs);
  }

  private async poll(): Promise<void> {
    if (this.inFlight || this.stopped) return;
    this.inFlight = true;
    try {
      const state = await this.api.getState();
      if (this.failures > 0) {
        this.failures = 0;
        this.callbacks.onNetworkRecovered?.();
      }
      await this.handle(state);
      this.inFlight = false;
      if (state.status !== "done") this.schedule(this.pollIntervalMs);
    } catch (err) {
      this.inFlight = false;
      this.failures += 1;
      this.callbacks.onNetworkTrouble?.(this.failures);
      const backoff = Math.min(this.pollIntervalMs * 2 ** this.failures, MAX_BACKOFF_MS);
      this.schedule(backoff);
    }
  }

  private async handle(state: SessionState): Promise<void> {
    this.callbacks.onState?.(state);
    if (state.status === "awaiting_click") {
      const key = `${state.frame}:${state.object ?? "init"}`;
      if (key !== this.promptKey) {
        this.promptKey = key;
        const [imageBuf, entropyBuf, maskBuf] = await Promise.all([
          this.api.getImage(state.frame),
          this.api.getEntropy(state.frame),
          state.object !== null
            ? this.api.getMask(state.frame, state.object)
            : Promise.resolve(null),
        ]);
        this.clickArmed = true;
        this.callbacks.onPrompt?.({
          state,
          image: decodePnm(imageBuf),
          entropy: decodeZivp(entropyBuf),
          mask: maskBuf ? decodePnm(maskBuf) : null,
        });
      }
    } else {
      this.promptKey = null;
      if (this.clickArmed) {
        this.clickArmed = false;
        this.callbacks.onPromptResolved?.();
      }
    }
    if (state.status === "done") {
      this.stop();
      this.callbacks.onDone?.(state);
    }
  }
}
