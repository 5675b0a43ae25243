// WebSocket transport: one session per connection, fire-and-forget commands,
// auto-reconnect. All state comes back through onMessage.

import { Command, encodeCommand, parseServerMessage, ServerMessage } from "./protocol.js";

export interface Transport {
  send: (cmd: Command) => void;
  close: () => void;
  isOpen: () => boolean;
}

export function connect(
  url: string,
  onMessage: (msg: ServerMessage) => void,
  onStatus: (connected: boolean) => void,
): Transport {
  let socket: WebSocket | null = null;
  let closed = false;

  const open = () => {
    socket = new WebSocket(url);
    socket.onopen = () => onStatus(true);
    socket.onmessage = (ev) => {
      try {
        onMessage(parseServerMessage(String(ev.data)));
      } catch (err) {
        console.warn("dropping unreadable server message", err);
      }
    };
    socket.onclose = () => {
      onStatus(false);
      if (!closed) setTimeout(open, 1000);
    };
    socket.onerror = () => socket?.close();
  };
  open();

  return {
    send: (cmd) => {
      if (socket && socket.readyState === WebSocket.OPEN) {
        socket.send(encodeCommand(cmd));
      }
    },
    close: () => {
      closed = true;
      socket?.close();
    },
    isOpen: () => socket?.readyState === WebSocket.OPEN,
  };
}
