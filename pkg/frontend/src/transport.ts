/**
 * Line transports for the NDJSON protocol.
 *
 * The browser speaks through a WebSocket relayed byte-for-byte onto the
 * service's TCP socket (see bridge.ts); Node tests connect straight to
 * TCP.  Both deliver whole lines regardless of how the bytes arrived.
 */

import { LineDecoder } from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private decoder = new LineDecoder();
  private lineHandler: ((line: string) => void) | null = null;
  private closeHandler: (() => void) | null = null;
  private readonly ready: Promise<void>;

  constructor(private readonly ws: WebSocket) {
    ws.binaryType = "arraybuffer";
    this.ready = new Promise((resolve, reject) => {
      ws.addEventListener("open", () => resolve(), { once: true });
      ws.addEventListener("error", () => reject(new Error("websocket error")), { once: true });
    });
    ws.addEventListener("message", (ev) => {
      const text =
        typeof ev.data === "string" ? ev.data : new TextDecoder().decode(ev.data as ArrayBuffer);
      for (const line of this.decoder.push(text)) {
        this.lineHandler?.(line);
      }
    });
    ws.addEventListener("close", () => this.closeHandler?.());
  }

  async opened(): Promise<void> {
    return this.ready;
  }

  send(line: string): void {
    this.ws.send(line);
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}

/** Raw TCP transport for Node (tests, headless clients). */
export async function connectTcp(host: string, port: number): Promise<Transport> {
  const net = await import("node:net");
  const socket = net.createConnection({ host, port });
  await new Promise<void>((resolve, reject) => {
    socket.once("connect", () => resolve());
    socket.once("error", reject);
  });
  socket.setNoDelay(true);

  const decoder = new LineDecoder();
  let lineHandler: ((line: string) => void) | null = null;
  let closeHandler: (() => void) | null = null;
  socket.on("data", (chunk: Buffer) => {
    for (const line of decoder.push(chunk.toString("utf8"))) {
      lineHandler?.(line);
    }
  });
  socket.on("close", () => closeHandler?.());
  socket.on("error", () => socket.destroy());

  return {
    send: (line: string) => void socket.write(line),
    onLine: (handler) => void (lineHandler = handler),
    onClose: (handler) => void (closeHandler = handler),
    close: () => socket.end(),
  };
}
