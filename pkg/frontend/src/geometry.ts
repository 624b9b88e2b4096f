// Sheet geometry shared by the canvas renderer and the pointer → mm
// mapping. Mirrors the core renderer: an 18mm margin around the sheet,
// time from the HMD-on line, presence from the middle line with the
// virtual world upward.

export interface EventTick {
  label: string;
  x_mm: number;
}

export interface TemplateConfig {
  time_axis_len_mm: number;
  presence_half_range_mm: number;
  event_ticks: EventTick[];
}

export const SHEET_MARGIN_MM = 18;
export const START_DOT_TOLERANCE_MM = 5;
export const MAX_OVERRUN_FRACTION = 1.05;
export const GRADIENT_FROM = "#ffffff";
export const GRADIENT_TO = "#bfbfbf"; // 25% grey

export function defaultTemplate(): TemplateConfig {
  return { time_axis_len_mm: 200, presence_half_range_mm: 40, event_ticks: [] };
}

export function parseTemplateConfig(doc: unknown): TemplateConfig {
  const raw = doc as Record<string, unknown>;
  // accept either a bare template section or a {template: ...} document
  const section = (raw.template ?? raw) as Record<string, unknown>;
  const template: TemplateConfig = {
    time_axis_len_mm: Number(section.time_axis_len_mm ?? section.time_len_mm ?? 200),
    presence_half_range_mm: Number(
      section.presence_half_range_mm ?? section.half_range_mm ?? 40,
    ),
    event_ticks: ((section.event_ticks ?? section.ticks ?? []) as Array<
      EventTick | [string, number]
    >).map((t) =>
      Array.isArray(t) ? { label: String(t[0]), x_mm: Number(t[1]) } : {
        label: String(t.label),
        x_mm: Number(t.x_mm),
      }
    ),
  };
  if (template.time_axis_len_mm <= 0 || template.presence_half_range_mm <= 0) {
    throw new Error("template dimensions must be positive");
  }
  template.event_ticks.sort((a, b) => a.x_mm - b.x_mm);
  return template;
}

export class SheetGeometry {
  constructor(
    readonly template: TemplateConfig,
    readonly pxPerMm = 4,
  ) {}

  get widthPx(): number {
    return (this.template.time_axis_len_mm + 2 * SHEET_MARGIN_MM) * this.pxPerMm;
  }

  get heightPx(): number {
    return (2 * this.template.presence_half_range_mm + 2 * SHEET_MARGIN_MM) * this.pxPerMm;
  }

  xPx(xMm: number): number {
    return (SHEET_MARGIN_MM + xMm) * this.pxPerMm;
  }

  yPx(yMm: number): number {
    return (SHEET_MARGIN_MM + this.template.presence_half_range_mm - yMm) * this.pxPerMm;
  }

  xMm(px: number): number {
    return px / this.pxPerMm - SHEET_MARGIN_MM;
  }

  yMm(px: number): number {
    return SHEET_MARGIN_MM + this.template.presence_half_range_mm - px / this.pxPerMm;
  }

  tickFraction(tick: EventTick): number {
    return tick.x_mm / this.template.time_axis_len_mm;
  }

  inStartZone(xMm: number, yMm: number): boolean {
    return Math.hypot(xMm, yMm) <= START_DOT_TOLERANCE_MM;
  }

  clampY(yMm: number): number {
    const half = this.template.presence_half_range_mm;
    return Math.max(-half, Math.min(half, yMm));
  }

  clampX(xMm: number): number {
    return Math.max(0, Math.min(MAX_OVERRUN_FRACTION * this.template.time_axis_len_mm, xMm));
  }
}
