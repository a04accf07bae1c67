import { describe, expect, it } from 'vitest';
import { decode, encode, StateMessage } from '../src/protocol.js';

const state: StateMessage = {
  type: 'state',
  tick: 42,
  agents: [
    { id: 'human', x: 1, y: 2, heading: 0.5, speed: 0.5, role: 'chaser' },
    { id: 'policy', x: 3, y: 4, heading: -0.5, speed: 1.0, role: 'evader' },
  ],
  flag: { x: 2.0, y: 2.0, active: true },
  obstacles: [{ kind: 'hurdle', x0: 1, y0: 1.2, x1: 1.1, y1: 3.3 }],
  result: null,
};

describe('protocol', () => {
  it('round-trips state messages', () => {
    const again = decode(JSON.stringify(state));
    expect(again).toEqual(state);
  });

  it('round-trips client messages through encode', () => {
    const cmd = { type: 'command' as const, dir: Math.PI / 4, speed: 0.5 };
    expect(JSON.parse(encode(cmd))).toEqual(cmd);
    const join = { type: 'join' as const, side: 'human' as const };
    expect(JSON.parse(encode(join))).toEqual(join);
  });

  it('accepts hello with rules', () => {
    const hello = {
      type: 'hello',
      arena: { w: 4.5, h: 4.5 },
      rules: { catch: 0.6, flag: 0.3, max_ticks: 1000 },
    };
    expect(decode(JSON.stringify(hello))).toEqual(hello);
  });

  it('rejects malformed payloads', () => {
    expect(() => decode('not json')).toThrow();
    expect(() => decode('{"nope": 1}')).toThrow();
    expect(() => decode('{"type": "mystery"}')).toThrow();
    expect(() => decode(JSON.stringify({ type: 'state', agents: [] }))).toThrow();
  });
});
