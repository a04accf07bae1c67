// Scene construction is pure: (hello, last state) -> display list. The
// thin painter below applies a display list to a canvas context, so all
// rendering decisions stay unit-testable.

import { HelloMessage, StateMessage } from './protocol.js';

export const CHASER_COLOR = '#d62728'; // red marks the chaser
export const EVADER_COLOR = '#1f77b4';
export const FLAG_COLOR = '#ffbf00';

export type Shape =
  | { kind: 'rect'; x: number; y: number; w: number; h: number; color: string; fill: boolean }
  | { kind: 'circle'; x: number; y: number; r: number; color: string; fill: boolean }
  | { kind: 'line'; x0: number; y0: number; x1: number; y1: number; color: string }
  | { kind: 'text'; x: number; y: number; text: string; color: string; size: number };

export function waitingScene(): Shape[] {
  return [{ kind: 'text', x: 2.25, y: 2.25, text: 'waiting for server...', color: '#888', size: 0.25 }];
}

export function buildScene(hello: HelloMessage, state: StateMessage | null): Shape[] {
  if (!state) return waitingScene();
  const shapes: Shape[] = [];
  shapes.push({ kind: 'rect', x: 0, y: 0, w: hello.arena.w, h: hello.arena.h, color: '#444', fill: false });
  for (const o of state.obstacles) {
    shapes.push({
      kind: 'rect',
      x: Math.min(o.x0, o.x1), y: Math.min(o.y0, o.y1),
      w: Math.abs(o.x1 - o.x0), h: Math.abs(o.y1 - o.y0),
      color: o.kind === 'pole' ? '#8856a7' : '#999999',
      fill: true,
    });
  }
  if (state.flag.active) {
    shapes.push({ kind: 'circle', x: state.flag.x, y: state.flag.y, r: hello.rules.flag, color: FLAG_COLOR, fill: false });
    shapes.push({ kind: 'circle', x: state.flag.x, y: state.flag.y, r: 0.06, color: FLAG_COLOR, fill: true });
  }
  for (const agent of state.agents) {
    const color = agent.role === 'chaser' ? CHASER_COLOR : EVADER_COLOR;
    shapes.push({ kind: 'circle', x: agent.x, y: agent.y, r: 0.15, color, fill: true });
    shapes.push({
      kind: 'line',
      x0: agent.x, y0: agent.y,
      x1: agent.x + 0.3 * Math.cos(agent.heading),
      y1: agent.y + 0.3 * Math.sin(agent.heading),
      color,
    });
    shapes.push({ kind: 'text', x: agent.x, y: agent.y + 0.28, text: agent.id, color, size: 0.14 });
  }
  shapes.push({ kind: 'text', x: 0.1, y: hello.arena.h - 0.12, text: `tick ${state.tick}`, color: '#666', size: 0.14 });
  if (state.result) {
    shapes.push({
      kind: 'text', x: hello.arena.w / 2, y: hello.arena.h / 2,
      text: bannerText(state.result), color: '#000', size: 0.4,
    });
  }
  return shapes;
}

export function bannerText(result: 'human' | 'policy' | 'draw'): string {
  if (result === 'draw') return 'draw';
  return `${result} wins`;
}

export function agentColors(state: StateMessage): Record<string, string> {
  const out: Record<string, string> = {};
  for (const a of state.agents) out[a.id] = a.role === 'chaser' ? CHASER_COLOR : EVADER_COLOR;
  return out;
}

// Paints a display list onto a 2D canvas, mapping arena meters to pixels
// with y flipped (canvas y grows downward).
export function paint(ctx: CanvasRenderingContext2D, shapes: Shape[], arenaH: number, scale: number): void {
  const Y = (y: number) => (arenaH - y) * scale;
  for (const s of shapes) {
    if (s.kind === 'rect') {
      ctx.strokeStyle = ctx.fillStyle = s.color;
      if (s.fill) ctx.fillRect(s.x * scale, Y(s.y + s.h), s.w * scale, s.h * scale);
      else ctx.strokeRect(s.x * scale, Y(s.y + s.h), s.w * scale, s.h * scale);
    } else if (s.kind === 'circle') {
      ctx.strokeStyle = ctx.fillStyle = s.color;
      ctx.beginPath();
      ctx.arc(s.x * scale, Y(s.y), s.r * scale, 0, Math.PI * 2);
      if (s.fill) ctx.fill();
      else ctx.stroke();
    } else if (s.kind === 'line') {
      ctx.strokeStyle = s.color;
      ctx.beginPath();
      ctx.moveTo(s.x0 * scale, Y(s.y0));
      ctx.lineTo(s.x1 * scale, Y(s.y1));
      ctx.stroke();
    } else {
      ctx.fillStyle = s.color;
      ctx.font = `${Math.round(s.size * scale)}px sans-serif`;
      ctx.textAlign = 'center';
      ctx.fillText(s.text, s.x * scale, Y(s.y));
    }
  }
}
