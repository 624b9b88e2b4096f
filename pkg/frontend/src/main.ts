// DOM wiring: canvas, pointer capture, examiner controls and export.

import { defaultTemplate, parseTemplateConfig, TemplateConfig } from "./geometry.js";
import { drawAnnotations, drawSheet, drawStrokes } from "./render.js";
import { AnnotationKind, CanvasSession, serializeTrace } from "./session.js";

const root = document.querySelector<HTMLDivElement>("#app")!;

const controls = document.createElement("div");
controls.className = "controls";
root.append(controls);

function labelled(label: string, input: HTMLElement): HTMLLabelElement {
  const wrap = document.createElement("label");
  wrap.append(label, input);
  return wrap;
}

const participantInput = document.createElement("input");
participantInput.value = "P01";
const groupInput = document.createElement("input");
groupInput.value = "A";
groupInput.size = 3;
const templateInput = document.createElement("input");
templateInput.type = "file";
templateInput.accept = "application/json";
const screenshotInput = document.createElement("input");
screenshotInput.type = "file";
screenshotInput.accept = "image/*";
screenshotInput.multiple = true;

const undoButton = document.createElement("button");
undoButton.textContent = "Undo stroke";
const exportButton = document.createElement("button");
exportButton.textContent = "Export trace";
const examinerToggle = document.createElement("input");
examinerToggle.type = "checkbox";

controls.append(
  labelled("participant ", participantInput),
  labelled("group ", groupInput),
  labelled("template ", templateInput),
  labelled("screenshots ", screenshotInput),
  labelled("examiner mode ", examinerToggle),
  undoButton,
  exportButton,
);

const examinerBar = document.createElement("div");
examinerBar.className = "controls";
examinerBar.hidden = true;
const kindSelect = document.createElement("select");
for (const kind of ["break_note", "constant_note", "event_note", "free_text", "tick"]) {
  const option = document.createElement("option");
  option.value = kind;
  option.textContent = kind;
  kindSelect.append(option);
}
const noteText = document.createElement("input");
noteText.placeholder = "annotation text / tick label";
noteText.size = 32;
examinerBar.append(
  labelled("kind ", kindSelect),
  labelled("text ", noteText),
  document.createTextNode("click the sheet to place it"),
);
root.append(examinerBar);

const strip = document.createElement("div");
strip.className = "screenshot-strip";
root.append(strip);

const canvas = document.createElement("canvas");
root.append(canvas);

const hintBox = document.createElement("div");
hintBox.className = "hint";
root.append(hintBox);

let session = new CanvasSession(defaultTemplate());

function redraw(): void {
  const ctx = canvas.getContext("2d")!;
  drawSheet(ctx, session.geometry);
  drawStrokes(ctx, session);
  drawAnnotations(ctx, session);
  hintBox.textContent = session.hint ?? "";
  exportButton.disabled = !session.canExport();
  const pct = Math.min(100, Math.round(session.progress() * 100));
  exportButton.textContent = session.canExport()
    ? "Export trace"
    : `Export trace (${pct}% drawn, need 90%)`;
}

function resetSession(template: TemplateConfig): void {
  session = new CanvasSession(template, {
    participant_id: participantInput.value || "anonymous",
    group: groupInput.value,
  });
  canvas.width = session.geometry.widthPx;
  canvas.height = session.geometry.heightPx;
  redraw();
}

function pointerMm(event: PointerEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  const scale = canvas.width / rect.width;
  return {
    x: session.geometry.xMm((event.clientX - rect.left) * scale),
    y: session.geometry.yMm((event.clientY - rect.top) * scale),
  };
}

canvas.addEventListener("pointerdown", (event) => {
  const { x, y } = pointerMm(event);
  if (examinerToggle.checked) {
    placeAnnotation(x);
  } else {
    canvas.setPointerCapture(event.pointerId);
    session.beginStroke(x, y);
  }
  redraw();
});

canvas.addEventListener("pointermove", (event) => {
  if (!session.current) return;
  const { x, y } = pointerMm(event);
  session.extendStroke(x, y);
  redraw();
});

canvas.addEventListener("pointerup", () => {
  session.endStroke();
  redraw();
});

function placeAnnotation(xMm: number): void {
  try {
    if (kindSelect.value === "tick") {
      session.addTick(noteText.value || `tick-${session.template.event_ticks.length + 1}`, xMm);
    } else {
      session.addAnnotation(xMm, kindSelect.value as AnnotationKind, noteText.value);
    }
    session.hint = null;
  } catch (error) {
    session.hint = String(error instanceof Error ? error.message : error);
  }
}

examinerToggle.addEventListener("change", () => {
  examinerBar.hidden = !examinerToggle.checked;
});

undoButton.addEventListener("click", () => {
  session.undoStroke();
  redraw();
});

exportButton.addEventListener("click", () => {
  session.source = {
    participant_id: participantInput.value || "anonymous",
    group: groupInput.value,
    capture: "digital",
  };
  const doc = session.exportDocument();
  const blob = new Blob([serializeTrace(doc)], { type: "application/json" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = `trace-${doc.source.participant_id}.json`;
  link.click();
  URL.revokeObjectURL(link.href);
});

templateInput.addEventListener("change", async () => {
  const file = templateInput.files?.[0];
  if (!file) return;
  try {
    resetSession(parseTemplateConfig(JSON.parse(await file.text())));
  } catch (error) {
    hintBox.textContent = `template config rejected: ${error}`;
  }
});

screenshotInput.addEventListener("change", () => {
  strip.replaceChildren();
  for (const file of screenshotInput.files ?? []) {
    const img = document.createElement("img");
    img.src = URL.createObjectURL(file);
    img.title = file.name;
    strip.append(img);
  }
});

resetSession(defaultTemplate());
