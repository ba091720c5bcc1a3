/**
 * WebSocket-to-TCP byte relay.
 *
 * Browsers cannot open raw TCP sockets, so the game page connects here
 * and every byte is passed through verbatim in both directions; the
 * relay knows nothing about the protocol.  Run it next to the guidance
 * service:
 *
 *   sonicguide serve &
 *   node dist/bridge.js [wsPort] [tcpHost:tcpPort]
 */

import net from "node:net";
import { WebSocketServer, WebSocket, RawData } from "ws";

export interface BridgeHandle {
  port: number;
  close(): Promise<void>;
}

export function startBridge(
  wsPort: number,
  tcpHost: string,
  tcpPort: number,
): Promise<BridgeHandle> {
  const wss = new WebSocketServer({ port: wsPort });

  wss.on("connection", (ws: WebSocket) => {
    const socket = net.createConnection({ host: tcpHost, port: tcpPort });
    socket.setNoDelay(true);

    ws.on("message", (data: RawData) => {
      socket.write(data as Buffer);
    });
    socket.on("data", (chunk: Buffer) => {
      if (ws.readyState === WebSocket.OPEN) {
        ws.send(chunk);
      }
    });
    ws.on("close", () => socket.destroy());
    socket.on("close", () => ws.close());
    socket.on("error", () => ws.close());
  });

  return new Promise((resolve, reject) => {
    wss.on("error", reject);
    wss.on("listening", () => {
      const address = wss.address();
      const port = typeof address === "object" && address ? address.port : wsPort;
      resolve({
        port,
        close: () =>
          new Promise<void>((done) => {
            for (const client of wss.clients) {
              client.terminate();
            }
            wss.close(() => done());
          }),
      });
    });
  });
}

const invokedDirectly =
  typeof process !== "undefined" && process.argv[1]?.endsWith("bridge.js");

if (invokedDirectly) {
  const wsPort = Number(process.argv[2] ?? 7854);
  const [host, port] = (process.argv[3] ?? "127.0.0.1:7853").split(":");
  startBridge(wsPort, host || "127.0.0.1", Number(port ?? 7853)).then((handle) => {
    console.log(`bridge: ws://127.0.0.1:${handle.port} -> tcp ${host}:${port}`);
  });
}
