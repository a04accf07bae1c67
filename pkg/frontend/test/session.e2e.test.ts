// End-to-end against the real play service (the primary CLI as a black
// box): join, steer, reach a terminal state, and measure the
// command -> state round trip.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { spawn, ChildProcess } from 'node:child_process';
import WebSocket from 'ws';
import { decode, encode } from '../src/protocol.js';
import { bannerText } from '../src/render.js';

const PORT = 8974;
let server: ChildProcess;

function connect(): Promise<WebSocket> {
  return new Promise((resolve, reject) => {
    const deadline = Date.now() + 20000;
    const attempt = () => {
      const ws = new WebSocket(`ws://127.0.0.1:${PORT}/play`);
      ws.on('open', () => resolve(ws));
      ws.on('error', () => {
        ws.close();
        if (Date.now() > deadline) reject(new Error('server never came up'));
        else setTimeout(attempt, 250);
      });
    };
    attempt();
  });
}

function nextMessage(ws: WebSocket, type: string, timeoutMs = 5000): Promise<any> {
  return new Promise((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error(`timeout waiting for ${type}`)), timeoutMs);
    const handler = (raw: WebSocket.RawData) => {
      const msg = decode(String(raw));
      if (msg.type === type) {
        clearTimeout(timer);
        ws.off('message', handler);
        resolve(msg);
      }
    };
    ws.on('message', handler);
  });
}

beforeAll(async () => {
  server = spawn('python3', ['-m', 'pounce.cli', 'serve', '--port', String(PORT)], {
    cwd: '..',
    stdio: 'ignore',
  });
});

afterAll(() => {
  server.kill();
});

describe('live session', () => {
  it('joins, steers, reaches terminal, and round-trips fast', async () => {
    const ws = await connect();
    ws.send(encode({ type: 'join', side: 'human' }));
    const hello = await nextMessage(ws, 'hello');
    expect(hello.rules.catch).toBeCloseTo(0.6);

    // command -> state round trip: best of several tries under 100 ms
    const latencies: number[] = [];
    for (let i = 0; i < 5; i++) {
      const t0 = performance.now();
      ws.send(encode({ type: 'command', dir: Math.PI / 2, speed: 0.5 }));
      await nextMessage(ws, 'state');
      latencies.push(performance.now() - t0);
    }
    expect(Math.min(...latencies)).toBeLessThan(100);

    // hold still; the scripted chaser hunts the human down to a terminal
    ws.send(encode({ type: 'command', dir: 0, speed: 0.5 }));
    let result: string | null = null;
    const deadline = Date.now() + 60000;
    while (result === null && Date.now() < deadline) {
      const state = await nextMessage(ws, 'state', 10000);
      result = state.result;
    }
    expect(result).not.toBeNull();
    expect(['human', 'policy', 'draw']).toContain(result!);
    expect(bannerText(result as any)).toContain(result === 'draw' ? 'draw' : 'wins');
    ws.close();
  }, 90000);
});
