// Canvas drawing of the sheet and the captured strokes. Geometry comes
// from SheetGeometry so the visuals stay in lockstep with the analysis
// toolkit's SVG renderer.

import {
  GRADIENT_FROM,
  GRADIENT_TO,
  SheetGeometry,
  START_DOT_TOLERANCE_MM,
} from "./geometry.js";
import { CanvasSession } from "./session.js";

export function drawSheet(ctx: CanvasRenderingContext2D, geom: SheetGeometry): void {
  const { template } = geom;
  const len = template.time_axis_len_mm;
  const half = template.presence_half_range_mm;
  const x0 = geom.xPx(0);
  const x1 = geom.xPx(len);
  const yTop = geom.yPx(half);
  const yMid = geom.yPx(0);
  const yBot = geom.yPx(-half);

  ctx.clearRect(0, 0, geom.widthPx, geom.heightPx);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, geom.widthPx, geom.heightPx);

  // white near the middle line fading to 25% grey at both extremes
  const up = ctx.createLinearGradient(0, yMid, 0, yTop);
  up.addColorStop(0, GRADIENT_FROM);
  up.addColorStop(1, GRADIENT_TO);
  ctx.fillStyle = up;
  ctx.fillRect(x0, yTop, x1 - x0, yMid - yTop);
  const down = ctx.createLinearGradient(0, yMid, 0, yBot);
  down.addColorStop(0, GRADIENT_FROM);
  down.addColorStop(1, GRADIENT_TO);
  ctx.fillStyle = down;
  ctx.fillRect(x0, yMid, x1 - x0, yBot - yMid);

  ctx.strokeStyle = "#999999";
  ctx.lineWidth = 1;
  ctx.strokeRect(x0, yTop, x1 - x0, yBot - yTop);

  // middle (time) line
  ctx.strokeStyle = "#000000";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(x0, yMid);
  ctx.lineTo(x1, yMid);
  ctx.stroke();

  // start-dot snap zone and the dot itself
  ctx.fillStyle = "rgba(46, 160, 44, 0.25)";
  ctx.beginPath();
  ctx.arc(x0, yMid, START_DOT_TOLERANCE_MM * geom.pxPerMm, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillStyle = "#000000";
  ctx.beginPath();
  ctx.arc(x0, yMid, 1.4 * geom.pxPerMm, 0, 2 * Math.PI);
  ctx.fill();

  // dashed HMD-off line with a small headset glyph beneath it
  ctx.setLineDash([10, 8]);
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(x1, yTop);
  ctx.lineTo(x1, yBot);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeRect(x1 - 3 * geom.pxPerMm, yBot + 3 * geom.pxPerMm, 6 * geom.pxPerMm, 3.2 * geom.pxPerMm);
  for (const dx of [-1.5, 1.5]) {
    ctx.beginPath();
    ctx.arc(x1 + dx * geom.pxPerMm, yBot + 4.6 * geom.pxPerMm, 0.7 * geom.pxPerMm, 0, 2 * Math.PI);
    ctx.fill();
  }

  ctx.fillStyle = "#555555";
  ctx.font = `${3.2 * geom.pxPerMm}px sans-serif`;
  ctx.textAlign = "right";
  ctx.fillText("virtual", x0 - 2 * geom.pxPerMm, yTop + 3 * geom.pxPerMm);
  ctx.fillText("real", x0 - 2 * geom.pxPerMm, yBot);

  ctx.textAlign = "center";
  ctx.fillStyle = "#000000";
  for (const tick of template.event_ticks) {
    const tx = geom.xPx(tick.x_mm);
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(tx, yMid - 3 * geom.pxPerMm);
    ctx.lineTo(tx, yMid + 3 * geom.pxPerMm);
    ctx.stroke();
    ctx.fillText(tick.label, tx, yBot + 6 * geom.pxPerMm);
  }
}

export function drawStrokes(ctx: CanvasRenderingContext2D, session: CanvasSession): void {
  const geom = session.geometry;
  ctx.strokeStyle = "#1f3ba6";
  ctx.lineWidth = 2;
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  const all = session.current ? [...session.strokes, session.current] : session.strokes;
  for (const stroke of all) {
    if (stroke.length < 2) continue;
    ctx.beginPath();
    ctx.moveTo(geom.xPx(stroke[0]!.x_mm), geom.yPx(stroke[0]!.y_mm));
    for (const sample of stroke.slice(1)) {
      ctx.lineTo(geom.xPx(sample.x_mm), geom.yPx(sample.y_mm));
    }
    ctx.stroke();
  }
}

export function drawAnnotations(ctx: CanvasRenderingContext2D, session: CanvasSession): void {
  const geom = session.geometry;
  const yTop = geom.yPx(geom.template.presence_half_range_mm);
  ctx.fillStyle = "#b22222";
  ctx.font = `${2.8 * geom.pxPerMm}px sans-serif`;
  ctx.textAlign = "center";
  for (const note of session.annotations) {
    const x = geom.xPx(note.x_mm);
    ctx.beginPath();
    ctx.moveTo(x, yTop - 2 * geom.pxPerMm);
    ctx.lineTo(x - 1.5 * geom.pxPerMm, yTop - 5 * geom.pxPerMm);
    ctx.lineTo(x + 1.5 * geom.pxPerMm, yTop - 5 * geom.pxPerMm);
    ctx.closePath();
    ctx.fill();
    ctx.fillText(note.kind.replace("_", " "), x, yTop - 6.5 * geom.pxPerMm);
  }
}
