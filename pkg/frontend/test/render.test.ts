import { describe, expect, it } from 'vitest';
import {
  agentColors, bannerText, buildScene, CHASER_COLOR, EVADER_COLOR, waitingScene,
} from '../src/render.js';
import { HelloMessage, StateMessage } from '../src/protocol.js';

const hello: HelloMessage = {
  type: 'hello',
  arena: { w: 4.5, h: 4.5 },
  rules: { catch: 0.6, flag: 0.3, max_ticks: 1000 },
};

function makeState(partial: Partial<StateMessage> = {}): StateMessage {
  return {
    type: 'state',
    tick: 7,
    agents: [
      { id: 'human', x: 1, y: 1, heading: 0, speed: 0.5, role: 'chaser' },
      { id: 'policy', x: 3, y: 3, heading: 1, speed: 0.5, role: 'evader' },
    ],
    flag: { x: 2, y: 2, active: true },
    obstacles: [{ kind: 'pole', x0: 1.8, y0: 2.2, x1: 2.7, y1: 2.3 }],
    result: null,
    ...partial,
  };
}

describe('scene construction', () => {
  it('shows a waiting overlay without state', () => {
    const scene = buildScene(hello, null);
    expect(scene).toEqual(waitingScene());
    const texts = scene.filter((s) => s.kind === 'text');
    expect(texts[0]).toMatchObject({ text: 'waiting for server...' });
  });

  it('renders terminal banner with the winner', () => {
    const scene = buildScene(hello, makeState({ result: 'policy' }));
    const texts = scene.filter((s) => s.kind === 'text').map((s) => (s as any).text);
    expect(texts).toContain('policy wins');
    expect(bannerText('draw')).toBe('draw');
    expect(bannerText('human')).toBe('human wins');
  });

  it('hides the flag when inactive', () => {
    const active = buildScene(hello, makeState());
    const inactive = buildScene(
      hello, makeState({ flag: { x: 2, y: 2, active: false } }));
    const circles = (scene: ReturnType<typeof buildScene>) =>
      scene.filter((s) => s.kind === 'circle').length;
    expect(circles(active)).toBeGreaterThan(circles(inactive));
  });

  it('swaps colors within one frame of a role swap', () => {
    const before = agentColors(makeState());
    expect(before.human).toBe(CHASER_COLOR);
    expect(before.policy).toBe(EVADER_COLOR);
    const swapped = makeState({
      agents: [
        { id: 'human', x: 1, y: 1, heading: 0, speed: 0.5, role: 'evader' },
        { id: 'policy', x: 3, y: 3, heading: 1, speed: 0.5, role: 'chaser' },
      ],
    });
    const after = agentColors(swapped);
    expect(after.human).toBe(EVADER_COLOR);
    expect(after.policy).toBe(CHASER_COLOR);
  });

  it('draws arena, obstacles, agents, flag and tick', () => {
    const scene = buildScene(hello, makeState());
    const kinds = scene.map((s) => s.kind);
    expect(kinds).toContain('rect');
    expect(kinds).toContain('circle');
    expect(kinds).toContain('line');
    const texts = scene.filter((s) => s.kind === 'text').map((s) => (s as any).text);
    expect(texts).toContain('tick 7');
  });
});
