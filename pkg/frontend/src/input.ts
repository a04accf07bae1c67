// Keyboard / gamepad steering. Arena coordinates: +x right, +y up, so
// "up" maps to +pi/2. Commands are emitted at most at SEND_HZ and only
// when the resulting (dir, speed) changed.

import { CommandMessage } from './protocol.js';

export const SEND_HZ = 20;
export const DEFAULT_SPEED = 0.5;

export interface InputState {
  up: boolean;
  down: boolean;
  left: boolean;
  right: boolean;
  stickX: number; // gamepad, arena axes, [-1, 1]
  stickY: number;
  speed: number; // slider value within [0.5, 3.0]
}

export function emptyInput(): InputState {
  return { up: false, down: false, left: false, right: false, stickX: 0, stickY: 0, speed: DEFAULT_SPEED };
}

const KEY_MAP: Record<string, keyof Pick<InputState, 'up' | 'down' | 'left' | 'right'>> = {
  ArrowUp: 'up', KeyW: 'up',
  ArrowDown: 'down', KeyS: 'down',
  ArrowLeft: 'left', KeyA: 'left',
  ArrowRight: 'right', KeyD: 'right',
};

export function applyKey(state: InputState, code: string, pressed: boolean): InputState {
  const field = KEY_MAP[code];
  if (!field) return state;
  return { ...state, [field]: pressed };
}

export function steeringVector(state: InputState): { x: number; y: number } {
  let x = (state.right ? 1 : 0) - (state.left ? 1 : 0);
  let y = (state.up ? 1 : 0) - (state.down ? 1 : 0);
  if (x === 0 && y === 0 && (state.stickX !== 0 || state.stickY !== 0)) {
    x = state.stickX;
    y = state.stickY;
  }
  return { x, y };
}

// Returns the command for the current input, or null when there is no
// steering input (the server latch holds the previous command).
export function inputToCommand(state: InputState): CommandMessage | null {
  const v = steeringVector(state);
  if (v.x === 0 && v.y === 0) return null;
  return { type: 'command', dir: Math.atan2(v.y, v.x), speed: state.speed };
}

export function sameCommand(a: CommandMessage | null, b: CommandMessage | null): boolean {
  if (a === null || b === null) return a === b;
  return a.dir === b.dir && a.speed === b.speed;
}

// Rate limiter + change detector: feed it the candidate command each
// animation frame; it returns the message to send, or null.
export class CommandGate {
  private last: CommandMessage | null = null;
  private lastSent = -Infinity;

  next(cmd: CommandMessage | null, nowMs: number): CommandMessage | null {
    if (cmd === null) return null;
    if (sameCommand(cmd, this.last) ) return null;
    if (nowMs - this.lastSent < 1000 / SEND_HZ) return null;
    this.last = cmd;
    this.lastSent = nowMs;
    return cmd;
  }
}
