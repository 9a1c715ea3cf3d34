// Wiring: keyboard + sliders feed a 20 Hz command sender; the render loop
// paints the latest frame. Nothing here blocks on the server.

import { paint } from "./canvas.js";
import { CommandSource, applyKey, defaultInput } from "./commands.js";
import { SocketClient } from "./net.js";
import { renderFrame, Viewport } from "./scene.js";

const SEND_HZ = 20;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  const banner = el<HTMLDivElement>("banner");
  const heightSlider = el<HTMLInputElement>("height");
  const speedSlider = el<HTMLInputElement>("speed");
  const heightLabel = el<HTMLSpanElement>("height-label");

  const url = `ws://${window.location.host}/ws`;
  const client = new SocketClient(url);
  const source = new CommandSource();
  let input = defaultInput();

  client.onStateChange = (state) => {
    banner.textContent =
      state === "open"
        ? ""
        : state === "version-mismatch"
          ? "protocol version mismatch: rebuild the UI"
          : "connecting to simulator...";
    banner.style.display = state === "open" ? "none" : "block";
  };

  window.addEventListener("keydown", (e) => {
    if (e.repeat) return;
    input = applyKey(input, e.key, true);
    heightSlider.value = String(input.height);
  });
  window.addEventListener("keyup", (e) => {
    input = applyKey(input, e.key, false);
  });
  heightSlider.addEventListener("input", () => {
    input = { ...input, height: Number(heightSlider.value) };
  });
  speedSlider.addEventListener("input", () => {
    input = { ...input, speedScale: Number(speedSlider.value) };
  });

  setInterval(() => {
    if (client.state !== "open") return; // no stale-frame interaction
    client.send(source.next(input));
    heightLabel.textContent = `${input.height.toFixed(2)} m`;
  }, 1000 / SEND_HZ);

  const vp: Viewport = { width: canvas.width, height: canvas.height, metersAcross: 12 };
  function loop(): void {
    const frame = client.lastFrame;
    if (frame) {
      paint(ctx!, renderFrame(frame, vp), canvas.width, canvas.height);
    }
    requestAnimationFrame(loop);
  }
  requestAnimationFrame(loop);
}

main();
