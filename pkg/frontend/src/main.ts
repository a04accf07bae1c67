// Browser entry point: wires the socket store, keyboard/gamepad input,
// and the canvas painter into one animation loop.

import { PlayClient } from './client.js';
import { applyKey, CommandGate, emptyInput, inputToCommand, InputState } from './input.js';
import { buildScene, paint, waitingScene } from './render.js';

const canvas = document.getElementById('arena') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const speedSlider = document.getElementById('speed') as HTMLInputElement | null;
const resetButton = document.getElementById('reset') as HTMLButtonElement | null;
const statusEl = document.getElementById('status');

const client = new PlayClient();
let input: InputState = emptyInput();
const gate = new CommandGate();

window.addEventListener('keydown', (ev) => {
  input = applyKey(input, ev.code, true);
});
window.addEventListener('keyup', (ev) => {
  input = applyKey(input, ev.code, false);
});
speedSlider?.addEventListener('input', () => {
  input = { ...input, speed: Number(speedSlider.value) };
});
resetButton?.addEventListener('click', () => client.reset());

function pollGamepad(): void {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  const pad = pads && pads[0];
  if (!pad) return;
  const dead = (v: number) => (Math.abs(v) < 0.15 ? 0 : v);
  // gamepad y is down-positive; arena y is up-positive
  input = { ...input, stickX: dead(pad.axes[0] ?? 0), stickY: -dead(pad.axes[1] ?? 0) };
}

function frame(): void {
  pollGamepad();
  if (client.store.status === 'open') {
    const cmd = gate.next(inputToCommand(input), performance.now());
    if (cmd) client.send(cmd);
  }
  const { hello, lastState, status, lastError } = client.store;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (hello) {
    const scale = canvas.width / hello.arena.w;
    paint(ctx, buildScene(hello, lastState), hello.arena.h, scale);
  } else {
    paint(ctx, waitingScene(), 4.5, canvas.width / 4.5);
  }
  if (statusEl) {
    statusEl.textContent = status === 'open' ? (lastError ?? 'connected') : status;
  }
  requestAnimationFrame(frame);
}

client.connect(`ws://${location.host}/play`, 'human');
requestAnimationFrame(frame);
