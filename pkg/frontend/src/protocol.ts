// Wire schema shared with the play service. The server is authoritative;
// the client only ever renders what it last received.

export interface AgentView {
  id: 'human' | 'policy';
  x: number;
  y: number;
  heading: number;
  speed: number;
  role: 'chaser' | 'evader';
}

export interface FlagView {
  x: number;
  y: number;
  active: boolean;
}

export interface ObstacleView {
  kind: 'hurdle' | 'pole';
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface StateMessage {
  type: 'state';
  tick: number;
  agents: AgentView[];
  flag: FlagView;
  obstacles: ObstacleView[];
  result: 'human' | 'policy' | 'draw' | null;
}

export interface HelloMessage {
  type: 'hello';
  arena: { w: number; h: number };
  rules: { catch: number; flag: number; max_ticks: number };
}

export interface ErrorMessage {
  type: 'error';
  reason: string;
}

export type ServerMessage = StateMessage | HelloMessage | ErrorMessage;

export interface JoinMessage {
  type: 'join';
  side: 'human' | 'spectate';
}

export interface CommandMessage {
  type: 'command';
  dir: number; // radians in arena coordinates
  speed: number; // m/s
}

export interface ResetMessage {
  type: 'reset';
}

export type ClientMessage = JoinMessage | CommandMessage | ResetMessage;

export function encode(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function decode(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error('invalid JSON from server');
  }
  if (typeof data !== 'object' || data === null || !('type' in data)) {
    throw new Error('server message missing type');
  }
  const msg = data as { type: string };
  if (msg.type === 'state') {
    const s = data as StateMessage;
    if (!Array.isArray(s.agents) || s.agents.length !== 2 || !s.flag) {
      throw new Error('malformed state message');
    }
    return s;
  }
  if (msg.type === 'hello') {
    const h = data as HelloMessage;
    if (!h.arena || !h.rules) throw new Error('malformed hello message');
    return h;
  }
  if (msg.type === 'error') {
    return data as ErrorMessage;
  }
  throw new Error(`unknown server message type ${msg.type}`);
}
