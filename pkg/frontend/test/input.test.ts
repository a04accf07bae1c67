import { describe, expect, it } from 'vitest';
import {
  applyKey, CommandGate, emptyInput, inputToCommand, SEND_HZ,
} from '../src/input.js';

describe('input mapping', () => {
  it('maps held up to +pi/2', () => {
    const s = applyKey(emptyInput(), 'ArrowUp', true);
    const cmd = inputToCommand(s);
    expect(cmd).not.toBeNull();
    expect(cmd!.dir).toBeCloseTo(Math.PI / 2, 12);
    expect(cmd!.speed).toBe(0.5);
  });

  it('maps diagonal up+right to pi/4', () => {
    let s = applyKey(emptyInput(), 'KeyW', true);
    s = applyKey(s, 'KeyD', true);
    expect(inputToCommand(s)!.dir).toBeCloseTo(Math.PI / 4, 12);
  });

  it('no input sends nothing (server latch holds)', () => {
    expect(inputToCommand(emptyInput())).toBeNull();
  });

  it('gamepad stick steers when no keys are held', () => {
    const s = { ...emptyInput(), stickX: 1, stickY: 0 };
    expect(inputToCommand(s)!.dir).toBeCloseTo(0, 12);
  });

  it('keys take precedence over the stick', () => {
    let s = { ...emptyInput(), stickX: 1, stickY: 0 };
    s = applyKey(s, 'ArrowLeft', true);
    expect(inputToCommand(s)!.dir).toBeCloseTo(Math.PI, 12);
  });

  it('slider speed flows into the command', () => {
    const s = { ...applyKey(emptyInput(), 'KeyW', true), speed: 2.5 };
    expect(inputToCommand(s)!.speed).toBe(2.5);
  });

  it('unknown keys leave the state untouched', () => {
    const s = emptyInput();
    expect(applyKey(s, 'KeyQ', true)).toEqual(s);
  });
});

describe('command gate', () => {
  it('sends only on change and rate-limits', () => {
    const gate = new CommandGate();
    const cmd = { type: 'command' as const, dir: 0, speed: 0.5 };
    expect(gate.next(cmd, 0)).toEqual(cmd);
    // unchanged command: silent
    expect(gate.next({ ...cmd }, 10)).toBeNull();
    // changed but within the rate window: silent
    const turned = { ...cmd, dir: 1 };
    expect(gate.next(turned, 20)).toBeNull();
    // changed and past the window: sent
    expect(gate.next(turned, 1000 / SEND_HZ + 1)).toEqual(turned);
    expect(gate.next(null, 2000)).toBeNull();
  });
});
