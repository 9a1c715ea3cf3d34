// Wire schema shared with the teleop server.

export const PROTOCOL_VERSION = 1;

// command value ranges enforced client-side before sending
export const RANGES = {
  vx: [-0.5, 2.0] as const,
  vy: [-0.3, 0.3] as const,
  omega: [-Math.PI / 8, Math.PI / 8] as const,
  h: [0.5, 0.8] as const,
};

export interface CommandMessage {
  type: "command";
  seq: number;
  vx: number;
  vy: number;
  omega: number;
  h: number;
}

export interface FootState {
  x: number;
  y: number;
  stance: boolean;
}

export interface RobotState {
  x: number;
  y: number;
  z: number;
  yaw: number;
  feet: FootState[];
}

export interface CarrierState {
  x: number;
  y: number;
  z: number;
  yaw: number;
  vx: number;
  vy: number;
  extent: [number, number][];
}

export interface Frame {
  type: "frame";
  v: number;
  t: number;
  episode: number;
  carrier: CarrierState;
  robots: RobotState[];
  command: { seq: number; vx: number; vy: number; omega: number; h: number };
  reward: number;
  reward_terms: Record<string, number>;
  terminated: boolean;
  reason: string;
  dropped_messages: number;
}

export interface HelloMessage {
  type: "hello";
  v: number;
  robots: number;
}

export type ServerMessage = Frame | HelloMessage;

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}
