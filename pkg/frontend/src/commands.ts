// Keyboard / slider state mapped to clamped carrier commands with strictly
// increasing sequence numbers. All keys released means hold-still at the
// current height setting.

import { CommandMessage, RANGES, clamp } from "./protocol.js";

export interface InputState {
  forward: boolean; // W
  backward: boolean; // S
  left: boolean; // A
  right: boolean; // D
  turnLeft: boolean; // Q
  turnRight: boolean; // E
  height: number; // slider / R-F keys, meters
  speedScale: number; // slider in [0, 1], scales the key velocities
}

export function defaultInput(): InputState {
  return {
    forward: false,
    backward: false,
    left: false,
    right: false,
    turnLeft: false,
    turnRight: false,
    height: 0.7,
    speedScale: 1.0,
  };
}

export function mapInput(input: InputState): { vx: number; vy: number; omega: number; h: number } {
  const scale = clamp(input.speedScale, 0, 1);
  let vx = 0;
  if (input.forward) vx += RANGES.vx[1] * scale;
  if (input.backward) vx += RANGES.vx[0] * scale;
  let vy = 0;
  if (input.left) vy += RANGES.vy[1] * scale;
  if (input.right) vy += RANGES.vy[0] * scale;
  let omega = 0;
  if (input.turnLeft) omega += RANGES.omega[1] * scale;
  if (input.turnRight) omega += RANGES.omega[0] * scale;
  return {
    vx: clamp(vx, RANGES.vx[0], RANGES.vx[1]),
    vy: clamp(vy, RANGES.vy[0], RANGES.vy[1]),
    omega: clamp(omega, RANGES.omega[0], RANGES.omega[1]),
    h: clamp(input.height, RANGES.h[0], RANGES.h[1]),
  };
}

export class CommandSource {
  private seq = 0;

  next(input: InputState): CommandMessage {
    const mapped = mapInput(input);
    this.seq += 1;
    return { type: "command", seq: this.seq, ...mapped };
  }

  get lastSeq(): number {
    return this.seq;
  }
}

const KEY_FIELDS: Record<string, keyof InputState> = {
  w: "forward",
  s: "backward",
  a: "left",
  d: "right",
  q: "turnLeft",
  e: "turnRight",
};

export function applyKey(input: InputState, key: string, down: boolean): InputState {
  const k = key.toLowerCase();
  const field = KEY_FIELDS[k];
  const out = { ...input };
  if (field) {
    (out[field] as boolean) = down;
    return out;
  }
  if (down && k === "r") out.height = clamp(out.height + 0.02, RANGES.h[0], RANGES.h[1]);
  if (down && k === "f") out.height = clamp(out.height - 0.02, RANGES.h[0], RANGES.h[1]);
  return out;
}
