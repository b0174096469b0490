/** Facts ledger presentation: an append-only table with provenance.
 *
 * Verdicts and statements come from the service untouched; rendering adds
 * nothing the prover did not say.
 */

import type { FactDoc, OracleResponseDoc, Verdict } from "./types.js";

export interface LedgerRow {
  id: number;
  statement: string;
  basisKind: "keyframe" | "witness" | "family";
  queryId: number;
  verdict: Verdict;
  transcriptRef: string;
  stale: boolean;
  canDeriveBasis: boolean;
}

export function ledgerRows(facts: FactDoc[]): LedgerRow[] {
  return facts.map((fact) => {
    const [lo, hi] = fact.provenance.transcripts.query_range;
    const dir = fact.provenance.transcripts.debug_dir;
    return {
      id: fact.id,
      statement: fact.property.statement,
      basisKind: fact.basis.kind,
      queryId: fact.provenance.query_id,
      verdict: fact.provenance.verdict,
      transcriptRef: dir ? `${dir} #${lo}-${hi}` : `solver calls #${lo}-${hi}`,
      stale: fact.stale,
      canDeriveBasis: fact.basis.kind === "witness",
    };
  });
}

export const VERDICT_LABELS: Record<Verdict, string> = {
  true: "proven",
  false: "refuted",
  unknown: "unknown (solver gave up)",
  empty_family: "empty family (no counterfactuals to consider)",
};

export function verdictLabel(response: OracleResponseDoc): string {
  return `${response.verdict} — ${VERDICT_LABELS[response.verdict]}`;
}

export function timingLine(response: OracleResponseDoc): string {
  const t = response.timings;
  return `${response.ct} path(s) · symbolic ${t.symbolic.toFixed(3)}s · ` +
    `solving ${t.solving.toFixed(3)}s · total ${t.total.toFixed(3)}s`;
}
