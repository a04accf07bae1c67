// Connection state machine: owns the socket, the last server messages,
// and nothing else. The view is a pure function of this store plus the
// local input state.

import { decode, encode, ClientMessage, HelloMessage, StateMessage } from './protocol.js';

export type ConnectionStatus = 'connecting' | 'open' | 'closed';

export interface ClientStore {
  status: ConnectionStatus;
  hello: HelloMessage | null;
  lastState: StateMessage | null;
  lastError: string | null;
}

export function emptyStore(): ClientStore {
  return { status: 'connecting', hello: null, lastState: null, lastError: null };
}

// Reducer for incoming socket events; returns a new store.
export function reduce(store: ClientStore, raw: string): ClientStore {
  let msg;
  try {
    msg = decode(raw);
  } catch (err) {
    return { ...store, lastError: String(err) };
  }
  if (msg.type === 'hello') return { ...store, hello: msg, lastError: null };
  if (msg.type === 'state') return { ...store, lastState: msg };
  return { ...store, lastError: msg.reason };
}

export class PlayClient {
  store: ClientStore = emptyStore();
  private socket: WebSocket | null = null;
  onChange: (store: ClientStore) => void = () => undefined;

  connect(url: string, side: 'human' | 'spectate' = 'human'): void {
    this.socket = new WebSocket(url);
    this.socket.onopen = () => {
      this.store = { ...this.store, status: 'open' };
      this.send({ type: 'join', side });
      this.onChange(this.store);
    };
    this.socket.onmessage = (ev) => {
      this.store = reduce(this.store, String(ev.data));
      this.onChange(this.store);
    };
    this.socket.onclose = () => {
      this.store = { ...this.store, status: 'closed' };
      this.onChange(this.store);
    };
  }

  send(msg: ClientMessage): boolean {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) return false;
    this.socket.send(encode(msg));
    return true;
  }

  reset(): void {
    this.send({ type: 'reset' });
  }
}
