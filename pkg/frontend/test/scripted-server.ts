// A minimal in-process stand-in for the engine's session service, scripted
// to issue exactly one correction request. It records when the prompt became
// visible and what the client posted, which is what the round-trip test
// asserts against.

import { createServer, IncomingMessage, Server, ServerResponse } from "node:http";
import { AddressInfo } from "node:net";

import { cornerMarkerZivp, makePgm } from "./fixtures.js";

export interface RecordedClick {
  row: number;
  col: number;
  polarity: string;
  at: number;
}

export interface ScriptedSession {
  base: string;
  promptVisibleAt: () => number | null;
  clicks: RecordedClick[];
  statusNow: () => string;
  close: () => Promise<void>;
}

export async function startScriptedSession(options: {
  height?: number;
  width?: number;
  promptFrame?: number;
  promptDelayMs?: number;
  finishDelayMs?: number;
} = {}): Promise<ScriptedSession> {
  const height = options.height ?? 12;
  const width = options.width ?? 10;
  const promptFrame = options.promptFrame ?? 7;
  const promptDelayMs = options.promptDelayMs ?? 40;
  const finishDelayMs = options.finishDelayMs ?? 30;

  let status = "awaiting_init";
  let frame = 0;
  let promptAt: number | null = null;
  let noc = 0;
  const clicks: RecordedClick[] = [];

  const entropyBody = Buffer.from(cornerMarkerZivp(height, width));
  const imageBody = Buffer.from(makePgm(height, width, (r, c) => (r * 13 + c * 7) % 256));
  const maskBody = Buffer.from(makePgm(height, width, (r, c) => (r >= 3 && c >= 3 ? 255 : 0)));

  function readBody(req: IncomingMessage): Promise<string> {
    return new Promise((resolve) => {
      let data = "";
      req.on("data", (chunk) => (data += chunk));
      req.on("end", () => resolve(data));
    });
  }

  const server: Server = createServer((req: IncomingMessage, res: ServerResponse) => {
    void (async () => {
      const url = req.url ?? "";
      if (req.method === "GET" && url === "/api/state") {
        const state = {
          frame,
          status,
          object: status === "awaiting_click" ? 1 : null,
          s_r: status === "awaiting_click" ? 0.82 : null,
          delta: status === "awaiting_click" ? 0.61 : null,
          noc_so_far: noc,
          ...(status === "done" ? { report: { summary: { noc } }, error: null } : {}),
        };
        res.setHeader("content-type", "application/json");
        res.end(JSON.stringify(state));
        return;
      }
      if (req.method === "POST" && url === "/api/step") {
        if (status === "awaiting_init") {
          status = "running";
          setTimeout(() => {
            frame = promptFrame;
            status = "awaiting_click";
            promptAt = Date.now();
          }, promptDelayMs);
        }
        res.end(JSON.stringify({ status, frame }));
        return;
      }
      if (req.method === "POST" && url === "/api/click") {
        if (status !== "awaiting_click") {
          res.statusCode = 409;
          res.end(JSON.stringify({ detail: "no click is awaited" }));
          return;
        }
        const body = JSON.parse(await readBody(req));
        clicks.push({ row: body.row, col: body.col, polarity: body.polarity, at: Date.now() });
        noc += 1;
        status = "running";
        setTimeout(() => {
          frame = promptFrame + 4;
          status = "done";
        }, finishDelayMs);
        res.end(JSON.stringify({ accepted: true }));
        return;
      }
      if (req.method === "POST" && url === "/api/skip") {
        if (status === "awaiting_click") {
          status = "running";
          setTimeout(() => {
            status = "done";
          }, finishDelayMs);
        }
        res.end(JSON.stringify({ skipped: true }));
        return;
      }
      const frameMatch = url.match(/^\/api\/frame\/(\d+)\/(image|entropy|mask\/\d+)$/);
      if (req.method === "GET" && frameMatch) {
        const kind = frameMatch[2];
        res.setHeader("content-type", "application/octet-stream");
        res.end(kind === "entropy" ? entropyBody : kind === "image" ? imageBody : maskBody);
        return;
      }
      res.statusCode = 404;
      res.end("not found");
    })();
  });

  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const port = (server.address() as AddressInfo).port;
  return {
    base: `http://127.0.0.1:${port}`,
    promptVisibleAt: () => promptAt,
    clicks,
    statusNow: () => status,
    close: () => new Promise((resolve) => server.close(() => resolve())),
  };
}
