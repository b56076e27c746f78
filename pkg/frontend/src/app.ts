// DOM wiring: canvas layer stack (frame, mask tint, entropy heat), status
// banner, workload counters, and click capture. Left click posts a positive
// correction, right click (or ctrl+click) a negative one; capture disables
// itself after one click per prompt.

import { SessionApi, SessionState } from "./api.js";
import { heatOverlayRgba } from "./colormap.js";
import { canvasToPixel } from "./coords.js";
import { PnmImage, pnmToRgba } from "./netpbm.js";
import { channelPlane, ZivpGrid } from "./zivp.js";
import { PromptContext, SessionController } from "./session.js";

const MASK_TINT: [number, number, number] = [64, 200, 255];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class App {
  private readonly api = new SessionApi("");
  private readonly banner = el<HTMLDivElement>("banner");
  private readonly nocLabel = el<HTMLSpanElement>("noc");
  private readonly sinceLabel = el<HTMLSpanElement>("since-prompt");
  private readonly frameLabel = el<HTMLSpanElement>("frame");
  private readonly summary = el<HTMLPreElement>("summary");
  private readonly imageCanvas = el<HTMLCanvasElement>("layer-image");
  private readonly maskCanvas = el<HTMLCanvasElement>("layer-mask");
  private readonly heatCanvas = el<HTMLCanvasElement>("layer-heat");
  private readonly stack = el<HTMLDivElement>("stack");
  private readonly opacity = el<HTMLInputElement>("opacity");
  private readonly zoomSelect = el<HTMLSelectElement>("zoom");

  private controller: SessionController;
  private zoom = 1;
  private frameHeight = 0;
  private frameWidth = 0;
  private entropy: ZivpGrid | null = null;
  private lastPromptAt: number | null = null;

  constructor() {
    this.controller = new SessionController(this.api, {
      onState: (s) => this.renderState(s),
      onPrompt: (ctx) => this.renderPrompt(ctx),
      onPromptResolved: () => this.setCapture(false),
      onDone: (s) => this.renderDone(s),
      onNetworkTrouble: (n) => this.setBanner(`server unreachable (retry ${n})`, "trouble"),
      onNetworkRecovered: () => this.setBanner("reconnected", "ok"),
    });

    el<HTMLButtonElement>("start").addEventListener("click", () => {
      void this.controller.step();
    });
    el<HTMLButtonElement>("skip").addEventListener("click", () => {
      void this.controller.skip();
    });
    this.zoomSelect.addEventListener("change", () => {
      this.zoom = parseInt(this.zoomSelect.value, 10);
      this.resizeCanvases();
      this.redrawHeat();
    });
    this.opacity.addEventListener("input", () => this.redrawHeat());

    this.heatCanvas.addEventListener("click", (ev) => this.capture(ev, "positive"));
    this.heatCanvas.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      this.capture(ev, "negative");
    });

    window.setInterval(() => this.tickSince(), 1000);
    this.controller.start();
  }

  private capture(ev: MouseEvent, polarity: "positive" | "negative"): void {
    if (!this.controller.armed) return; // ignored while running
    const rect = this.heatCanvas.getBoundingClientRect();
    const pos = canvasToPixel(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      this.zoom,
      this.frameHeight,
      this.frameWidth,
    );
    const modified = ev.ctrlKey || ev.metaKey ? "negative" : polarity;
    void this.controller.submitClick(pos.row, pos.col, modified);
  }

  private setCapture(on: boolean): void {
    this.stack.classList.toggle("awaiting", on);
    if (!on) this.setBanner("running", "ok");
  }

  private setBanner(text: string, kind: "ok" | "prompt" | "trouble"): void {
    this.banner.textContent = text;
    this.banner.className = kind;
  }

  private renderState(state: SessionState): void {
    this.frameLabel.textContent = String(state.frame);
    this.nocLabel.textContent = String(state.noc_so_far);
    if (state.status === "awaiting_init") {
      this.setBanner("press start to begin", "ok");
    } else if (state.status === "running") {
      this.setBanner("running", "ok");
    }
  }

  private renderPrompt(ctx: PromptContext): void {
    this.lastPromptAt = Date.now();
    const which = ctx.state.object === null ? "indicate the object" : `object ${ctx.state.object}`;
    const delta = ctx.state.delta === null ? "" : ` (jump ${ctx.state.delta.toFixed(2)})`;
    this.setBanner(`correction requested: ${which}${delta} — click the image`, "prompt");
    this.frameHeight = ctx.image.height;
    this.frameWidth = ctx.image.width;
    this.resizeCanvases();
    this.drawImage(ctx.image);
    this.drawMask(ctx.mask);
    this.entropy = ctx.entropy;
    this.redrawHeat();
    this.setCapture(true);
  }

  private renderDone(state: SessionState): void {
    this.setBanner("sequence finished", "ok");
    this.summary.textContent = JSON.stringify(state.report ?? {}, null, 2);
    if (state.error) this.setBanner(`finished with error: ${state.error}`, "trouble");
  }

  private tickSince(): void {
    if (this.lastPromptAt === null) return;
    const seconds = Math.round((Date.now() - this.lastPromptAt) / 1000);
    this.sinceLabel.textContent = `${seconds}s`;
  }

  private resizeCanvases(): void {
    for (const canvas of [this.imageCanvas, this.maskCanvas, this.heatCanvas]) {
      canvas.width = this.frameWidth * this.zoom;
      canvas.height = this.frameHeight * this.zoom;
    }
  }

  private blit(canvas: HTMLCanvasElement, rgba: Uint8ClampedArray, w: number, h: number): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const base = document.createElement("canvas");
    base.width = w;
    base.height = h;
    const image = new ImageData(w, h);
    image.data.set(rgba);
    base.getContext("2d")!.putImageData(image, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(base, 0, 0, canvas.width, canvas.height);
  }

  private drawImage(image: PnmImage): void {
    this.blit(this.imageCanvas, pnmToRgba(image), image.width, image.height);
  }

  private drawMask(mask: PnmImage | null): void {
    const ctx = this.maskCanvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.maskCanvas.width, this.maskCanvas.height);
    if (!mask) return;
    const rgba = new Uint8ClampedArray(mask.width * mask.height * 4);
    for (let i = 0; i < mask.width * mask.height; i++) {
      if (mask.pixels[i] !== 0) {
        rgba[4 * i] = MASK_TINT[0];
        rgba[4 * i + 1] = MASK_TINT[1];
        rgba[4 * i + 2] = MASK_TINT[2];
        rgba[4 * i + 3] = 110;
      }
    }
    this.blit(this.maskCanvas, rgba, mask.width, mask.height);
  }

  private redrawHeat(): void {
    if (!this.entropy) return;
    const plane = channelPlane(this.entropy, 0);
    const level = parseInt(this.opacity.value, 10) / 100;
    const rgba = heatOverlayRgba(plane, this.entropy.height, this.entropy.width, level);
    this.blit(this.heatCanvas, rgba, this.entropy.width, this.entropy.height);
  }
}

new App();
