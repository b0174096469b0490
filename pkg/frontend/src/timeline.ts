/** Keyframe selection over a trace window: the slider's data model. */

import type { TraceStep, TraceWindow, VarClass } from "./types.js";
import { factualText } from "./draft.js";

export interface TimelineRow {
  name: string;
  klass: VarClass;
  text: string;
}

export interface Timeline {
  length: number;
  steps: TraceStep[];
  classes: Record<string, VarClass>;
  selected: number;
}

export function makeTimeline(window: TraceWindow): Timeline {
  return {
    length: window.length,
    steps: window.steps,
    classes: window.classes,
    selected: window.steps.length ? window.steps[window.steps.length - 1]!.t : 0,
  };
}

export function stepAt(timeline: Timeline, t: number): TraceStep {
  const step = timeline.steps.find((s) => s.t === t);
  if (!step) throw new RangeError(`step ${t} not loaded`);
  return step;
}

export function select(timeline: Timeline, t: number): Timeline {
  stepAt(timeline, t);
  return { ...timeline, selected: t };
}

/** Rows for the keyframe state table, in catalog order. */
export function keyframeRows(timeline: Timeline): TimelineRow[] {
  const step = stepAt(timeline, timeline.selected);
  return Object.entries(step.vars).map(([name, value]) => ({
    name,
    klass: timeline.classes[name] ?? "env",
    text: factualText(value),
  }));
}
