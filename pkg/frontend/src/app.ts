/** DOM wiring for the investigator. All reasoning happens server-side; this
 * file moves state between widgets and the typed client. */

import { ApiError, Client } from "./api.js";
import {
  QueryDraft,
  VarWidget,
  WidgetState,
  draftForKeyframe,
  serializeQuery,
  setWidget,
  submittable,
  validateDraft,
} from "./draft.js";
import { Timeline, keyframeRows, makeTimeline, select, stepAt } from "./timeline.js";
import { ledgerRows, timingLine, verdictLabel } from "./ledger.js";
import { changedNames, outputRows, witnessRows } from "./witness.js";
import type { JobDoc, QueryDoc, QueryMode } from "./types.js";

interface AppState {
  client: Client;
  programId?: string;
  traceId?: string;
  sessionId?: string;
  timeline?: Timeline;
  draft?: QueryDraft;
  inFlight: boolean;
}

const qs = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
};

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8750";
}

const state: AppState = { client: new Client(apiBase()), inFlight: false };

// --- setup panel ---------------------------------------------------------------

async function handleLoad(): Promise<void> {
  const programText = qs<HTMLTextAreaElement>("#program-text").value;
  const traceText = qs<HTMLTextAreaElement>("#trace-text").value;
  try {
    const program = await state.client.uploadProgram("uploaded", programText);
    const trace = await state.client.uploadTrace(program.id, "uploaded", traceText);
    const session = await state.client.createSession(
      program.id, trace.id, "investigation",
    );
    state.programId = program.id;
    state.traceId = trace.id;
    state.sessionId = session.id;
    const window = await state.client.traceWindow(trace.id);
    state.timeline = makeTimeline(window);
    banner("");
    renderTimeline();
    selectKeyframe(state.timeline.selected);
  } catch (err) {
    banner(describe(err), "error");
  }
}

// --- timeline -------------------------------------------------------------------

function renderTimeline(): void {
  const timeline = state.timeline;
  if (!timeline) return;
  const slider = qs<HTMLInputElement>("#keyframe-slider");
  slider.min = "0";
  slider.max = String(timeline.length - 1);
  slider.value = String(timeline.selected);
  slider.disabled = timeline.steps.length === 0;
  qs("#keyframe-label").textContent = `step ${timeline.selected}`;
  const tbody = qs("#keyframe-table");
  tbody.innerHTML = "";
  for (const row of keyframeRows(timeline)) {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td>${row.name}</td><td class="klass">${row.klass}</td>` +
      `<td class="value">${row.text}</td>`;
    tbody.appendChild(tr);
  }
}

function selectKeyframe(t: number): void {
  if (!state.timeline) return;
  state.timeline = select(state.timeline, t);
  const step = stepAt(state.timeline, t);
  const mode = state.draft?.mode ?? "factual";
  state.draft = draftForKeyframe(step, state.timeline.classes, mode);
  if (state.draft && stashedBehavior) state.draft.behavior = stashedBehavior;
  renderTimeline();
  renderDraft();
}

let stashedBehavior = "";

// --- constraint builder ------------------------------------------------------------

function stateEditor(widget: VarWidget): string {
  const s = widget.state;
  switch (s.kind) {
    case "locked":
      return `<span class="locked">= ${widget.factual} (logged)</span>`;
    case "free":
      return `<span class="free">any value</span>`;
    case "eq":
      return `<input data-field="value" value="${s.value}">`;
    case "member":
      return `<input data-field="values" value="${s.values.join(", ")}" ` +
        `placeholder="comma-separated values">`;
    case "range":
      return `<input data-field="lo" value="${s.lo}" class="bound"> .. ` +
        `<input data-field="hi" value="${s.hi}" class="bound">`;
  }
}

function renderDraft(): void {
  const draft = state.draft;
  if (!draft) return;
  qs<HTMLSelectElement>("#mode").value = draft.mode;
  const tbody = qs("#constraint-table");
  tbody.innerHTML = "";
  for (const widget of draft.widgets) {
    const tr = document.createElement("tr");
    tr.dataset.variable = widget.name;
    const options = ["locked", "free", "eq", "member", "range"]
      .map((k) => `<option value="${k}" ${widget.state.kind === k ? "selected" : ""}>${k}</option>`)
      .join("");
    tr.innerHTML =
      `<td>${widget.name}</td>` +
      `<td><select data-field="kind">${options}</select></td>` +
      `<td class="editor">${stateEditor(widget)}</td>`;
    tbody.appendChild(tr);
  }
  const problems = validateDraft(draft);
  qs("#draft-problems").textContent =
    problems.map((p) => (p.variable ? `${p.variable}: ${p.message}` : p.message)).join("; ");
  qs<HTMLButtonElement>("#submit").disabled = !submittable(draft) || state.inFlight;
  qs("#query-preview").textContent = serializeQuery(draft);
}

function widgetStateFrom(kind: string, widget: VarWidget): WidgetState {
  switch (kind) {
    case "free":
      return { kind: "free" };
    case "eq":
      return { kind: "eq", value: widget.factual };
    case "member":
      return { kind: "member", values: [widget.factual] };
    case "range":
      return { kind: "range", lo: widget.factual, hi: widget.factual };
    default:
      return { kind: "locked" };
  }
}

function onConstraintChange(event: Event): void {
  const target = event.target as HTMLElement;
  const row = target.closest("tr");
  const draft = state.draft;
  if (!row || !draft || !row.dataset.variable) return;
  const widget = draft.widgets.find((w) => w.name === row.dataset.variable);
  if (!widget) return;
  const field = (target as HTMLInputElement | HTMLSelectElement).dataset.field;
  const value = (target as HTMLInputElement | HTMLSelectElement).value;
  let next: WidgetState = widget.state;
  if (field === "kind") {
    next = widgetStateFrom(value, widget);
  } else if (widget.state.kind === "eq" && field === "value") {
    next = { kind: "eq", value };
  } else if (widget.state.kind === "member" && field === "values") {
    next = { kind: "member", values: value.split(",").map((v) => v.trim()).filter(Boolean) };
  } else if (widget.state.kind === "range" && (field === "lo" || field === "hi")) {
    next = { ...widget.state, [field]: value };
  }
  state.draft = setWidget(draft, widget.name, next);
  renderDraft();
}

// --- submission --------------------------------------------------------------------

async function handleSubmit(): Promise<void> {
  const draft = state.draft;
  if (!draft || !state.sessionId || !submittable(draft)) return;
  state.inFlight = true;
  renderDraft();
  banner("resolving…");
  try {
    const doc = JSON.parse(serializeQuery(draft)) as QueryDoc;
    const { job_id } = await state.client.postQuery(state.sessionId, doc);
    const job = await state.client.pollJob(job_id);
    renderResult(job);
    await refreshLedger();
    banner("");
  } catch (err) {
    if (err instanceof ApiError && err.busy) {
      banner("query in flight — wait for the current one to settle", "busy");
    } else {
      banner(describe(err), "error");
    }
  } finally {
    state.inFlight = false;
    renderDraft();
  }
}

function renderResult(job: JobDoc): void {
  const panel = qs("#result");
  if (job.status === "error" || !job.response) {
    panel.innerHTML = `<p class="error">${job.error ?? "query failed"}</p>`;
    return;
  }
  const response = job.response;
  if (response.verdict === "empty_family") {
    panel.innerHTML =
      `<div class="banner empty-family">empty family: the relaxation admits ` +
      `no counterfactual besides the logged state itself</div>`;
    return;
  }
  let html = `<h3 class="verdict-${response.verdict}">${verdictLabel(response)}</h3>` +
    `<p class="timings">${timingLine(response)}</p>`;
  if (response.witness && state.timeline) {
    const keyframe = stepAt(state.timeline, state.timeline.selected);
    const rows = witnessRows(response.witness, keyframe);
    html += `<p>witness differs on: <b>${changedNames(rows).join(", ")}</b></p>`;
    html += `<table><tr><th>variable</th><th>logged</th><th>witness</th></tr>`;
    for (const row of rows) {
      html += `<tr class="${row.changed ? "changed" : ""}">` +
        `<td>${row.name}</td><td>${row.factual}</td><td>${row.witness}</td></tr>`;
    }
    html += `</table>`;
    const outputs = outputRows(response.witness);
    if (outputs.length) {
      html += `<p class="outputs">decisions: ` +
        outputs.map((o) => `${o.name} = ${o.text}`).join(", ") + `</p>`;
    }
    html += `<button id="use-witness">use witness as new basis</button>`;
  }
  panel.innerHTML = html;
  const useWitness = document.querySelector("#use-witness");
  if (useWitness && job.facts_added?.length) {
    const fact = job.facts_added[job.facts_added.length - 1]!;
    useWitness.addEventListener("click", () => void deriveBasis(fact.id));
  }
}

async function deriveBasis(factId: number): Promise<void> {
  if (!state.sessionId || !state.draft) return;
  try {
    const { constraints } = await state.client.factBasis(state.sessionId, factId);
    // prefill every widget with the witness value, locked as equalities
    let draft = state.draft;
    for (const widget of draft.widgets) {
      const raw = constraints[widget.name] as { eq?: unknown } | undefined;
      if (raw && typeof raw === "object" && "eq" in raw) {
        const value = raw.eq;
        const text = typeof value === "object" && value !== null && "dec" in value
          ? String((value as { dec: unknown }).dec)
          : typeof value === "boolean" ? (value ? "true" : "false") : String(value);
        draft = setWidget(draft, widget.name, { kind: "eq", value: text });
      }
    }
    state.draft = draft;
    renderDraft();
    banner("constraints seeded from the witness", "info");
  } catch (err) {
    banner(describe(err), "error");
  }
}

// --- ledger ----------------------------------------------------------------------

async function refreshLedger(): Promise<void> {
  if (!state.sessionId) return;
  const { facts } = await state.client.ledger(state.sessionId);
  const tbody = qs("#ledger-table");
  tbody.innerHTML = "";
  for (const row of ledgerRows(facts)) {
    const tr = document.createElement("tr");
    tr.className = row.stale ? "stale" : "";
    tr.innerHTML =
      `<td>${row.id}</td><td>${row.statement}</td>` +
      `<td>${row.basisKind}</td><td>q${row.queryId} (${row.verdict})</td>` +
      `<td class="transcript">${row.transcriptRef}</td>`;
    tbody.appendChild(tr);
  }
}

// --- shared ---------------------------------------------------------------------

function banner(text: string, kind = "info"): void {
  const el = qs("#banner");
  el.textContent = text;
  el.className = text ? `banner ${kind}` : "banner hidden";
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.solverUnavailable) return `solver unavailable: ${err.message}`;
    return `${err.status}: ${err.message}`;
  }
  return String(err);
}

export function boot(): void {
  qs("#load").addEventListener("click", () => void handleLoad());
  qs("#keyframe-slider").addEventListener("input", (event) => {
    selectKeyframe(Number((event.target as HTMLInputElement).value));
  });
  qs("#constraint-table").addEventListener("change", onConstraintChange);
  qs("#constraint-table").addEventListener("input", onConstraintChange);
  qs<HTMLSelectElement>("#mode").addEventListener("change", (event) => {
    if (!state.draft) return;
    state.draft = { ...state.draft, mode: (event.target as HTMLSelectElement).value as QueryMode };
    renderDraft();
  });
  qs<HTMLInputElement>("#behavior").addEventListener("input", (event) => {
    stashedBehavior = (event.target as HTMLInputElement).value;
    if (!state.draft) return;
    state.draft = { ...state.draft, behavior: stashedBehavior };
    renderDraft();
  });
  qs("#submit").addEventListener("click", () => void handleSubmit());
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
