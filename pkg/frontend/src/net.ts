// WebSocket wrapper: outbound seq counting and the arrow-key move limiter
// (at most 10 move messages per rolling second, mirroring the server's
// rate limit so no move is ever silently dropped).

import type { Dir, SubmissionDoc } from "./protocol";

export class MoveLimiter {
  private stamps: number[] = [];

  constructor(private limit = 10, private windowMs = 1000) {}

  allow(nowMs: number): boolean {
    this.stamps = this.stamps.filter((t) => t > nowMs - this.windowMs);
    if (this.stamps.length >= this.limit) return false;
    this.stamps.push(nowMs);
    return true;
  }
}

export class Wire {
  private ws: WebSocket;
  private seq = 0;
  private mover = new MoveLimiter();
  onMessage: (raw: string) => void = () => {};
  onClose: () => void = () => {};
  onOpen: () => void = () => {};

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.addEventListener("message", (ev) => this.onMessage(String(ev.data)));
    this.ws.addEventListener("close", () => this.onClose());
    this.ws.addEventListener("open", () => this.onOpen());
  }

  static defaultUrl(): string {
    const proto = location.protocol === "https:" ? "wss:" : "ws:";
    return `${proto}//${location.host}/ws`;
  }

  send(type: string, payload: Record<string, unknown> = {}): void {
    if (this.ws.readyState !== WebSocket.OPEN) return;
    this.seq += 1;
    this.ws.send(JSON.stringify({ type, seq: this.seq, payload }));
  }

  sendMove(dir: Dir, nowMs: number): boolean {
    if (!this.mover.allow(nowMs)) return false;
    this.send("move", { dir });
    return true;
  }

  sendAnswer(taskId: string, submission: SubmissionDoc): void {
    this.send("answer", { taskId, submission });
  }

  close(): void {
    this.ws.close();
  }
}
