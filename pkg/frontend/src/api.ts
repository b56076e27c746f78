// Thin typed client over the session protocol.

export type SessionStatus = "awaiting_init" | "running" | "awaiting_click" | "done";

export interface SessionState {
  frame: number;
  status: SessionStatus;
  object: number | null;
  s_r: number | null;
  delta: number | null;
  noc_so_far: number;
  report?: Record<string, unknown>;
  error?: string | null;
}

export type Polarity = "positive" | "negative";

export class ConflictError extends Error {}

export class SessionApi {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async getState(): Promise<SessionState> {
    const resp = await fetch(this.url("/api/state"));
    if (!resp.ok) throw new Error(`state failed: ${resp.status}`);
    return (await resp.json()) as SessionState;
  }

  private async binary(path: string): Promise<ArrayBuffer> {
    const resp = await fetch(this.url(path));
    if (!resp.ok) throw new Error(`${path} failed: ${resp.status}`);
    return resp.arrayBuffer();
  }

  getImage(frame: number): Promise<ArrayBuffer> {
    return this.binary(`/api/frame/${frame}/image`);
  }

  getEntropy(frame: number): Promise<ArrayBuffer> {
    return this.binary(`/api/frame/${frame}/entropy`);
  }

  getMask(frame: number, object: number): Promise<ArrayBuffer> {
    return this.binary(`/api/frame/${frame}/mask/${object}`);
  }

  async postClick(row: number, col: number, polarity: Polarity): Promise<void> {
    const resp = await fetch(this.url("/api/click"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ row, col, polarity }),
    });
    if (resp.status === 409) throw new ConflictError("no click awaited");
    if (!resp.ok) throw new Error(`click failed: ${resp.status}`);
  }

  async postSkip(): Promise<void> {
    const resp = await fetch(this.url("/api/skip"), { method: "POST" });
    if (!resp.ok) throw new Error(`skip failed: ${resp.status}`);
  }

  async postStep(): Promise<void> {
    const resp = await fetch(this.url("/api/step"), { method: "POST" });
    if (!resp.ok) throw new Error(`step failed: ${resp.status}`);
  }
}
