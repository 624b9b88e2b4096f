// Drawing session state: captured strokes in sheet millimeters,
// annotations, and the export gate. Pure of any DOM concern so the
// logic is testable headlessly.

import {
  SheetGeometry,
  TemplateConfig,
  type EventTick,
} from "./geometry.js";

export type AnnotationKind = "break_note" | "constant_note" | "event_note" | "free_text";

export interface Annotation {
  x_mm: number;
  kind: AnnotationKind;
  text: string;
}

export interface SourceMeta {
  participant_id: string;
  group: string;
  capture: "digital" | "paper_scan";
}

export interface Sample {
  x_mm: number;
  y_mm: number;
}

export interface TraceFileDocument {
  schema_version: "1";
  template: TemplateConfig;
  samples: Array<[number, number]>;
  annotations: Annotation[];
  source: SourceMeta;
}

/** Fraction of the timeline a stroke must reach before export unlocks. */
export const EXPORT_MIN_FRACTION = 0.9;

export class ExportBlockedError extends Error {}

export class CanvasSession {
  readonly geometry: SheetGeometry;
  strokes: Sample[][] = [];
  current: Sample[] | null = null;
  annotations: Annotation[] = [];
  source: SourceMeta;
  /** Last rejection reason, for the on-screen hint. */
  hint: string | null = null;

  constructor(template: TemplateConfig, source?: Partial<SourceMeta>) {
    this.geometry = new SheetGeometry(template);
    this.source = {
      participant_id: source?.participant_id ?? "anonymous",
      group: source?.group ?? "",
      capture: source?.capture ?? "digital",
    };
  }

  get template(): TemplateConfig {
    return this.geometry.template;
  }

  /** Pointer-down. The first stroke must begin inside the start-dot zone. */
  beginStroke(xMm: number, yMm: number): boolean {
    if (this.current) return false;
    if (this.strokes.length === 0 && !this.geometry.inStartZone(xMm, yMm)) {
      this.hint = "start the line at the dot";
      return false;
    }
    this.hint = null;
    this.current = [
      { x_mm: this.geometry.clampX(xMm), y_mm: this.geometry.clampY(yMm) },
    ];
    return true;
  }

  /** Pointer-move. Leftward motion adds nothing (rejected, not repaired). */
  extendStroke(xMm: number, yMm: number): boolean {
    if (!this.current) return false;
    const last = this.current[this.current.length - 1]!;
    const x = this.geometry.clampX(xMm);
    if (x < last.x_mm) {
      this.hint = "draw to the right";
      return false;
    }
    this.hint = null;
    this.current.push({ x_mm: x, y_mm: this.geometry.clampY(yMm) });
    return true;
  }

  /** Pointer-up. Single-point strokes are discarded. */
  endStroke(): boolean {
    if (!this.current) return false;
    const stroke = this.current;
    this.current = null;
    if (stroke.length < 2) {
      this.hint = "stroke too short, ignored";
      return false;
    }
    this.strokes.push(stroke);
    return true;
  }

  /** Removes the whole most recent stroke (there is no eraser). */
  undoStroke(): boolean {
    if (this.current) {
      this.current = null;
      return true;
    }
    return this.strokes.pop() !== undefined;
  }

  addAnnotation(xMm: number, kind: AnnotationKind, text: string): void {
    if (xMm < 0 || xMm > this.template.time_axis_len_mm) {
      throw new Error(`annotation outside the timeline: ${xMm}mm`);
    }
    this.annotations.push({ x_mm: xMm, kind, text });
  }

  /** Examiner mode: insert an ad-hoc event tick for exploratory sessions. */
  addTick(label: string, xMm: number): void {
    if (xMm < 0 || xMm > this.template.time_axis_len_mm) {
      throw new Error(`tick outside the axis: ${xMm}mm`);
    }
    if (this.template.event_ticks.some((t) => t.label === label)) {
      throw new Error(`duplicate tick label: ${label}`);
    }
    const tick: EventTick = { label, x_mm: xMm };
    this.template.event_ticks.push(tick);
    this.template.event_ticks.sort((a, b) => a.x_mm - b.x_mm);
  }

  /** Strokes concatenated in x-order with global monotonicity enforced. */
  mergedSamples(): Sample[] {
    const ordered = [...this.strokes].sort(
      (a, b) => a[0]!.x_mm - b[0]!.x_mm,
    );
    const merged: Sample[] = [];
    for (const stroke of ordered) {
      for (const sample of stroke) {
        const last = merged[merged.length - 1];
        if (last === undefined || sample.x_mm >= last.x_mm) {
          merged.push(sample);
        }
      }
    }
    return merged;
  }

  /** Rightmost drawn fraction of the timeline. */
  progress(): number {
    let max = 0;
    for (const stroke of this.strokes) {
      for (const sample of stroke) max = Math.max(max, sample.x_mm);
    }
    if (this.current) {
      for (const sample of this.current) max = Math.max(max, sample.x_mm);
    }
    return max / this.template.time_axis_len_mm;
  }

  canExport(): boolean {
    return this.mergedSamples().length >= 2 && this.progress() >= EXPORT_MIN_FRACTION;
  }

  /** The trace file the analysis toolkit ingests. */
  exportDocument(): TraceFileDocument {
    if (!this.canExport()) {
      throw new ExportBlockedError(
        `draw to at least ${EXPORT_MIN_FRACTION * 100}% of the timeline before exporting`,
      );
    }
    const annotations = [...this.annotations];
    if (this.strokes.length > 1) {
      annotations.push({
        x_mm: 0,
        kind: "free_text",
        text: `multi-stroke drawing (${this.strokes.length} strokes, concatenated by x)`,
      });
    }
    return {
      schema_version: "1",
      template: {
        time_axis_len_mm: this.template.time_axis_len_mm,
        presence_half_range_mm: this.template.presence_half_range_mm,
        event_ticks: [...this.template.event_ticks],
      },
      samples: this.mergedSamples().map((s) => [s.x_mm, s.y_mm]),
      annotations,
      source: { ...this.source },
    };
  }
}

export function serializeTrace(doc: TraceFileDocument): string {
  return JSON.stringify(doc, null, 2) + "\n";
}
