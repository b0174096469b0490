/** End-to-end investigation against a live service: load the crash case,
 * pose the factual query from the logged moment, relax the position into a
 * range family, and follow the witness into a new basis.
 *
 * Spawns the Python service; every displayed verdict must round-trip from
 * the API untouched.
 */

import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, Client } from "../src/api.js";
import { draftForKeyframe, serializeQuery, setWidget } from "../src/draft.js";
import { ledgerRows, verdictLabel } from "../src/ledger.js";
import { makeTimeline, select, stepAt } from "../src/timeline.js";
import { changedNames, witnessRows } from "../src/witness.js";
import type { QueryDoc, QueryMode } from "../src/types.js";

const ROOT = join(__dirname, "..", "..");
const DATA = join(ROOT, "src", "deposition", "fixtures", "data");
const PORT = 8917;

let service: ChildProcess;
let client: Client;

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const res = await fetch(`http://127.0.0.1:${PORT}/api/health`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
}

beforeAll(async () => {
  service = spawn(
    "python3", ["-m", "deposition.cli", "serve", "--port", String(PORT)],
    { cwd: ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  client = new Client(`http://127.0.0.1:${PORT}`);
  await waitForService();
}, 40_000);

afterAll(() => {
  service?.kill();
});

async function openCrashSession(name: string) {
  const program = readFileSync(
    join(DATA, "intersection_standard.decl"), "utf-8",
  );
  const trace = readFileSync(join(DATA, "crash.jsonl"), "utf-8");
  const { id: programId } = await client.uploadProgram("standard", program);
  const { id: traceId } = await client.uploadTrace(programId, "crash", trace);
  const { id: sessionId } = await client.createSession(programId, traceId, name);
  return { programId, traceId, sessionId };
}

async function poseDraft(sessionId: string, draft: Parameters<typeof serializeQuery>[0]) {
  const doc = JSON.parse(serializeQuery(draft)) as QueryDoc;
  const { job_id } = await client.postQuery(sessionId, doc);
  const job = await client.pollJob(job_id);
  expect(job.status).toBe("done");
  return job;
}

describe("investigation walkthrough", () => {
  it("runs the tight-to-relaxed loop end to end", async () => {
    const { traceId, sessionId } = await openCrashSession("walkthrough");

    // timeline: slider over the trace, keyframe at the collision approach
    const window = await client.traceWindow(traceId);
    let timeline = makeTimeline(window);
    expect(timeline.length).toBe(6);
    timeline = select(timeline, 4);
    const keyframe = stepAt(timeline, 4);
    expect(keyframe.vars.agent1_signal).toBe("RIGHT");

    // the logged moment, fully pinned: did the car decide to move?
    let draft = draftForKeyframe(keyframe, timeline.classes, "factual");
    draft = { ...draft, behavior: "move" };
    const factualJob = await poseDraft(sessionId, draft);
    expect(factualJob.response!.verdict).toBe("true");
    expect(factualJob.response!.ct).toBe(1);
    expect(verdictLabel(factualJob.response!)).toContain("true");

    // relax position into a band and the signal across all members:
    // might the car have stayed?
    let relaxed = draftForKeyframe(keyframe, timeline.classes, "might" as QueryMode);
    relaxed = { ...relaxed, behavior: "!move" };
    relaxed = setWidget(relaxed, "agent1_signal",
      { kind: "member", values: ["LEFT", "STRAIGHT", "RIGHT"] });
    relaxed = setWidget(relaxed, "agent1_pos_x",
      { kind: "range", lo: "1.0", hi: "1.5" });
    const mightJob = await poseDraft(sessionId, relaxed);
    expect(mightJob.response!.verdict).toBe("true");

    // the witness view highlights exactly what changed
    const rows = witnessRows(mightJob.response!.witness!, keyframe);
    const changed = changedNames(rows);
    expect(changed.length).toBeGreaterThan(0);
    expect(changed).not.toContain("has_right_of_way");

    // the ledger grew by two facts, rendered verbatim from the service
    const { facts } = await client.ledger(sessionId);
    const ledger = ledgerRows(facts);
    expect(ledger.map((r) => r.id)).toEqual([1, 2]);
    expect(ledger[1]!.canDeriveBasis).toBe(true);

    // follow the witness: derive a new basis and pin it as the next draft
    const { constraints } = await client.factBasis(sessionId, 2);
    expect(constraints.agent1_signal).toEqual(
      { eq: rows.find((r) => r.name === "agent1_signal")!.witness },
    );

    // the session file is downloadable with both queries on record
    const download = (await client.downloadSession(sessionId)) as {
      queries: unknown[];
      facts: unknown[];
    };
    expect(download.queries).toHaveLength(2);
    expect(download.facts).toHaveLength(2);
  }, 60_000);

  it("renders empty families distinctly and enforces one query in flight", async () => {
    const { traceId, sessionId } = await openCrashSession("edge-cases");
    const window = await client.traceWindow(traceId);
    const timeline = makeTimeline(window);
    const keyframe = stepAt(timeline, 4);

    // a punctured singleton: everything pinned, nothing left to consider
    let draft = draftForKeyframe(keyframe, timeline.classes, "would" as QueryMode);
    draft = { ...draft, behavior: "move" };
    const job = await poseDraft(sessionId, draft);
    expect(job.response!.verdict).toBe("empty_family");
    expect(verdictLabel(job.response!)).toContain("no counterfactuals");
    const { facts } = await client.ledger(sessionId);
    expect(facts).toHaveLength(0); // history only, never the ledger

    // racing a second query gets the busy signal
    let relaxed = draftForKeyframe(keyframe, timeline.classes, "might" as QueryMode);
    relaxed = { ...relaxed, behavior: "!move" };
    relaxed = setWidget(relaxed, "agent1_pos_x",
      { kind: "range", lo: "1.0", hi: "1.5" });
    const doc = JSON.parse(serializeQuery(relaxed)) as QueryDoc;
    const first = client.postQuery(sessionId, doc);
    const second = client.postQuery(sessionId, doc);
    const settled = await Promise.allSettled([first, second]);
    const busy = settled.filter(
      (s) => s.status === "rejected" && (s.reason as ApiError).busy,
    );
    const accepted = settled.filter((s) => s.status === "fulfilled");
    expect(accepted.length).toBeGreaterThanOrEqual(1);
    if (busy.length === 0) {
      // both landed only if the first finished before the second arrived;
      // verify the server still serialized them
      const { queries } = (await client.downloadSession(sessionId)) as {
        queries: unknown[];
      };
      expect(queries.length).toBeGreaterThanOrEqual(2);
    }
    for (const s of accepted) {
      const value = (s as PromiseFulfilledResult<{ job_id: string }>).value;
      await client.pollJob(value.job_id);
    }
  }, 60_000);
});
