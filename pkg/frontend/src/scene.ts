// Pure frame -> drawable-primitive projection. No DOM access here so the
// mapping is unit-testable and replayable.

import { Frame } from "./protocol.js";

export interface Viewport {
  width: number;
  height: number;
  metersAcross: number; // world meters mapped to the viewport width
}

export type Primitive =
  | { kind: "polygon"; points: [number, number][]; stroke: string; fill?: string }
  | { kind: "circle"; x: number; y: number; r: number; fill: string; stroke?: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number }
  | { kind: "arrow"; x1: number; y1: number; x2: number; y2: number; stroke: string }
  | { kind: "text"; x: number; y: number; text: string; fill: string };

export interface Scene {
  primitives: Primitive[];
  statusLines: string[];
  terminated: boolean;
}

function worldToScreen(
  wx: number,
  wy: number,
  cx: number,
  cy: number,
  vp: Viewport,
): [number, number] {
  const scale = vp.width / vp.metersAcross;
  // +x right, +y up on screen; view centered on the carrier control point
  return [vp.width / 2 + (wx - cx) * scale, vp.height / 2 - (wy - cy) * scale];
}

export function renderFrame(frame: Frame, vp: Viewport): Scene {
  const prims: Primitive[] = [];
  const { carrier } = frame;
  const scale = vp.width / vp.metersAcross;
  const cos = Math.cos(carrier.yaw);
  const sin = Math.sin(carrier.yaw);
  const toScreen = (wx: number, wy: number) => worldToScreen(wx, wy, carrier.x, carrier.y, vp);

  // carrier outline: extent polygon given in the carrier frame
  const poly = carrier.extent.map(([ex, ey]) => {
    const wx = carrier.x + cos * ex - sin * ey;
    const wy = carrier.y + sin * ex + cos * ey;
    return toScreen(wx, wy);
  });
  prims.push({ kind: "polygon", points: poly, stroke: "#7a8ba3", fill: "rgba(90,110,140,0.25)" });

  // control point marker + heading tick
  const [cpx, cpy] = toScreen(carrier.x, carrier.y);
  prims.push({ kind: "circle", x: cpx, y: cpy, r: 6, fill: "#ffd166", stroke: "#333" });
  const tip = toScreen(carrier.x + 0.4 * cos, carrier.y + 0.4 * sin);
  prims.push({ kind: "line", x1: cpx, y1: cpy, x2: tip[0], y2: tip[1], stroke: "#ffd166", width: 2 });

  // command overlay: arrow length proportional to |(vx, vy)| in the carrier frame
  const cmd = frame.command;
  const mag = Math.hypot(cmd.vx, cmd.vy);
  if (mag > 1e-6) {
    const wx = carrier.x + (cos * cmd.vx - sin * cmd.vy) * 1.2;
    const wy = carrier.y + (sin * cmd.vx + cos * cmd.vy) * 1.2;
    const [ax, ay] = toScreen(wx, wy);
    prims.push({ kind: "arrow", x1: cpx, y1: cpy, x2: ax, y2: ay, stroke: "#06d6a0" });
  }

  // robots and their feet (stance feet solid, swing feet hollow-ish)
  frame.robots.forEach((robot, i) => {
    for (const foot of robot.feet) {
      const [fx, fy] = toScreen(foot.x, foot.y);
      prims.push({
        kind: "circle",
        x: fx,
        y: fy,
        r: 4,
        fill: foot.stance ? "#ef476f" : "rgba(239,71,111,0.25)",
      });
    }
    const [rx, ry] = toScreen(robot.x, robot.y);
    prims.push({ kind: "circle", x: rx, y: ry, r: 8, fill: "#118ab2", stroke: "#073b4c" });
    const hx = toScreen(robot.x + 0.3 * Math.cos(robot.yaw), robot.y + 0.3 * Math.sin(robot.yaw));
    prims.push({ kind: "line", x1: rx, y1: ry, x2: hx[0], y2: hx[1], stroke: "#073b4c", width: 2 });
    prims.push({ kind: "text", x: rx + 10, y: ry - 10, text: `${i}`, fill: "#cfe8ef" });
  });

  const status = [
    `t=${frame.t.toFixed(2)}s  episode ${frame.episode}`,
    `cmd seq=${cmd.seq}  vx=${cmd.vx.toFixed(2)}  vy=${cmd.vy.toFixed(2)}  ` +
      `omega=${cmd.omega.toFixed(2)}  h=${cmd.h.toFixed(2)}`,
    `carrier v=(${carrier.vx.toFixed(2)}, ${carrier.vy.toFixed(2)})  ` +
      `yaw=${((carrier.yaw * 180) / Math.PI).toFixed(1)}deg  z=${carrier.z.toFixed(2)}`,
    `reward ${frame.reward.toFixed(3)}  robots ${frame.robots.length}`,
  ];
  if (frame.terminated) {
    status.push(`EPISODE RESET (${frame.reason})`);
  }
  void scale;
  return { primitives: prims, statusLines: status, terminated: frame.terminated };
}
