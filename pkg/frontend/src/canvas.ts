// Thin painter: draws scene primitives onto a 2d canvas context.

import { Primitive, Scene } from "./scene.js";

export function paint(ctx: CanvasRenderingContext2D, scene: Scene, width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#0d1b2a";
  ctx.fillRect(0, 0, width, height);
  for (const p of scene.primitives) {
    drawPrimitive(ctx, p);
  }
  ctx.fillStyle = "#e0e1dd";
  ctx.font = "13px monospace";
  scene.statusLines.forEach((line, i) => ctx.fillText(line, 12, 20 + 16 * i));
  if (scene.terminated) {
    ctx.fillStyle = "rgba(239,71,111,0.85)";
    ctx.font = "bold 28px monospace";
    ctx.fillText("EPISODE RESET", width / 2 - 110, 40);
  }
}

function drawPrimitive(ctx: CanvasRenderingContext2D, p: Primitive): void {
  switch (p.kind) {
    case "polygon": {
      ctx.beginPath();
      p.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
      ctx.closePath();
      if (p.fill) {
        ctx.fillStyle = p.fill;
        ctx.fill();
      }
      ctx.strokeStyle = p.stroke;
      ctx.lineWidth = 1.5;
      ctx.stroke();
      break;
    }
    case "circle": {
      ctx.beginPath();
      ctx.arc(p.x, p.y, p.r, 0, 2 * Math.PI);
      ctx.fillStyle = p.fill;
      ctx.fill();
      if (p.stroke) {
        ctx.strokeStyle = p.stroke;
        ctx.stroke();
      }
      break;
    }
    case "line": {
      ctx.beginPath();
      ctx.moveTo(p.x1, p.y1);
      ctx.lineTo(p.x2, p.y2);
      ctx.strokeStyle = p.stroke;
      ctx.lineWidth = p.width;
      ctx.stroke();
      break;
    }
    case "arrow": {
      ctx.beginPath();
      ctx.moveTo(p.x1, p.y1);
      ctx.lineTo(p.x2, p.y2);
      ctx.strokeStyle = p.stroke;
      ctx.lineWidth = 3;
      ctx.stroke();
      const angle = Math.atan2(p.y2 - p.y1, p.x2 - p.x1);
      ctx.beginPath();
      ctx.moveTo(p.x2, p.y2);
      ctx.lineTo(p.x2 - 10 * Math.cos(angle - 0.4), p.y2 - 10 * Math.sin(angle - 0.4));
      ctx.lineTo(p.x2 - 10 * Math.cos(angle + 0.4), p.y2 - 10 * Math.sin(angle + 0.4));
      ctx.closePath();
      ctx.fillStyle = p.stroke;
      ctx.fill();
      break;
    }
    case "text": {
      ctx.fillStyle = p.fill;
      ctx.font = "12px monospace";
      ctx.fillText(p.text, p.x, p.y);
      break;
    }
  }
}
