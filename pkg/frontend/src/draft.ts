/** The query under construction: one constraint widget per input variable,
 * a behavior expression, a mode toggle, and the chosen keyframe.
 *
 * Serialization is byte-canonical: variables appear in catalog order,
 * numeric literals keep the exact text the investigator typed, and the
 * layout matches the committed query files, so equivalent drafts produce
 * identical documents.
 */

import type { QueryMode, TraceStep, VarClass, VarValue } from "./types.js";

export type ValueKind = "bool" | "int" | "float" | "symbol";

export type WidgetState =
  | { kind: "locked" }
  | { kind: "free" }
  | { kind: "eq"; value: string }
  | { kind: "member"; values: string[] }
  | { kind: "range"; lo: string; hi: string };

export interface VarWidget {
  name: string;
  klass: VarClass;
  valueKind: ValueKind;
  factual: string;
  state: WidgetState;
}

export interface QueryDraft {
  mode: QueryMode;
  keyframe: number;
  widgets: VarWidget[];
  behavior: string;
}

const NUMBER_RE = /^-?(0|[1-9]\d*)(\.\d+)?([eE][+-]?\d+)?$/;
const SYMBOL_RE = /^[A-Za-z_][A-Za-z0-9_]*$/;

export function valueKindOf(value: VarValue): ValueKind {
  if (typeof value === "boolean") return "bool";
  if (typeof value === "number") return "int";
  if (typeof value === "string") return "symbol";
  return "float";
}

/** Editable text for a logged value; floats keep their decimal rendering. */
export function factualText(value: VarValue): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") return String(value);
  if (typeof value === "string") return value;
  return typeof value.dec === "string" ? value.dec : formatFloat(value.dec);
}

function formatFloat(x: number): string {
  const text = String(x);
  // mirror the trace serializer: finite floats always carry a decimal point
  if (/^-?\d+$/.test(text)) return `${text}.0`;
  return text;
}

/** Build the default draft for a keyframe: every variable locked to its
 * logged value (the tight scenario). */
export function draftForKeyframe(
  step: TraceStep,
  classes: Record<string, VarClass>,
  mode: QueryMode = "factual",
): QueryDraft {
  const widgets: VarWidget[] = [];
  for (const [name, value] of Object.entries(step.vars)) {
    const klass = classes[name];
    if (!klass || klass === "decision") continue;
    widgets.push({
      name,
      klass,
      valueKind: valueKindOf(value),
      factual: factualText(value),
      state: { kind: "locked" },
    });
  }
  return { mode, keyframe: step.t, widgets, behavior: "" };
}

export function setWidget(draft: QueryDraft, name: string, state: WidgetState): QueryDraft {
  return {
    ...draft,
    widgets: draft.widgets.map((w) => (w.name === name ? { ...w, state } : w)),
  };
}

// --- validation -------------------------------------------------------------

export interface DraftProblem {
  variable?: string;
  message: string;
}

function checkLiteral(widget: VarWidget, text: string): string | null {
  const value = text.trim();
  if (!value) return "empty value";
  switch (widget.valueKind) {
    case "bool":
      return value === "true" || value === "false" ? null : "expected true or false";
    case "int":
      return /^-?\d+$/.test(value) ? null : "expected an integer";
    case "float":
      return NUMBER_RE.test(value) ? null : "expected a number";
    case "symbol":
      return SYMBOL_RE.test(value) ? null : "expected a member name";
  }
}

export function validateDraft(draft: QueryDraft): DraftProblem[] {
  const problems: DraftProblem[] = [];
  if (!draft.behavior.trim()) {
    problems.push({ message: "behavior expression is empty" });
  }
  for (const widget of draft.widgets) {
    const state = widget.state;
    if (draft.mode === "factual" && state.kind !== "locked") {
      problems.push({
        variable: widget.name,
        message: "factual queries pin every variable to the logged value",
      });
      continue;
    }
    if (state.kind === "free" && widget.valueKind === "float") {
      problems.push({
        variable: widget.name,
        message: "floats cannot be fully free; use a range or member set",
      });
      continue;
    }
    if (state.kind === "locked" || state.kind === "free") continue;
    if (state.kind === "eq") {
      const bad = checkLiteral(widget, state.value);
      if (bad) problems.push({ variable: widget.name, message: bad });
    } else if (state.kind === "member") {
      if (state.values.length === 0) {
        problems.push({ variable: widget.name, message: "empty member set" });
      }
      for (const v of state.values) {
        const bad = checkLiteral(widget, v);
        if (bad) problems.push({ variable: widget.name, message: bad });
      }
    } else {
      if (widget.valueKind === "bool" || widget.valueKind === "symbol") {
        problems.push({
          variable: widget.name,
          message: "ranges need an ordered domain",
        });
        continue;
      }
      for (const bound of [state.lo, state.hi]) {
        const bad = checkLiteral(widget, bound);
        if (bad) problems.push({ variable: widget.name, message: bad });
      }
      if (!problems.some((p) => p.variable === widget.name)
          && Number(state.lo) > Number(state.hi)) {
        problems.push({ variable: widget.name, message: "range lo above hi" });
      }
    }
  }
  return problems;
}

export function submittable(draft: QueryDraft): boolean {
  return validateDraft(draft).length === 0;
}

// --- canonical serialization ---------------------------------------------------

function literalJson(widget: VarWidget, text: string): string {
  const value = text.trim();
  switch (widget.valueKind) {
    case "bool":
    case "int":
    case "float":
      return value; // validated numeric/boolean literal text, kept verbatim
    case "symbol":
      return JSON.stringify(value);
  }
}

function constraintJson(widget: VarWidget): string | null {
  const state = widget.state;
  switch (state.kind) {
    case "locked":
      return null;
    case "free":
      return '"free"';
    case "eq":
      return `{"eq": ${literalJson(widget, state.value)}}`;
    case "member": {
      const items = state.values.map((v) => literalJson(widget, v));
      return `{"in": [${items.join(", ")}]}`;
    }
    case "range":
      return `{"range": [${literalJson(widget, state.lo)}, ${literalJson(widget, state.hi)}]}`;
  }
}

/** Render the draft as the canonical query document text. */
export function serializeQuery(draft: QueryDraft): string {
  const constraintLines: string[] = [];
  for (const widget of draft.widgets) {
    const rendered = constraintJson(widget);
    if (rendered !== null) {
      constraintLines.push(`    ${JSON.stringify(widget.name)}: ${rendered}`);
    }
  }
  const constraints = constraintLines.length
    ? `{\n${constraintLines.join(",\n")}\n  }`
    : "{}";
  return [
    "{",
    `  "mode": ${JSON.stringify(draft.mode)},`,
    `  "keyframe": ${draft.keyframe},`,
    `  "constraints": ${constraints},`,
    `  "behavior": ${JSON.stringify(draft.behavior)}`,
    "}",
    "",
  ].join("\n");
}

/** The parsed form to send over the wire; identical content to the text. */
export function queryDocument(draft: QueryDraft): unknown {
  return JSON.parse(serializeQuery(draft));
}
