/** Wire types for the investigation service's JSON API. */

/** Floats travel as {dec, bits}; the 16-hex-char bit pattern is authoritative. */
export interface FloatValue {
  dec: number | string;
  bits: string;
}

export type VarValue = boolean | number | string | FloatValue;

export type VarClass = "env" | "state" | "decision";

export interface TraceStep {
  t: number;
  vars: Record<string, VarValue>;
}

export interface TraceWindow {
  steps: TraceStep[];
  classes: Record<string, VarClass>;
  length: number;
}

export type QueryMode = "factual" | "might" | "would";

export type ConstraintJson =
  | "free"
  | { eq: VarValue }
  | { in: VarValue[] }
  | { range: [VarValue, VarValue] };

export interface QueryDoc {
  mode: QueryMode;
  keyframe: number;
  constraints: Record<string, ConstraintJson>;
  behavior: string;
}

export type Verdict = "true" | "false" | "unknown" | "empty_family";

export interface WitnessDoc {
  inputs: Record<string, VarValue>;
  outputs: Record<string, VarValue>;
}

export interface Timings {
  symbolic: number;
  solving: number;
  total: number;
}

export interface OracleResponseDoc {
  verdict: Verdict;
  ct: number;
  paths: { id: number; steps: number; feasible: string }[];
  timings: Timings;
  witness?: WitnessDoc;
}

export interface FactDoc {
  id: number;
  basis:
    | { kind: "keyframe"; keyframe: number }
    | { kind: "witness"; model: WitnessDoc }
    | { kind: "family"; ctx: { keyframe: number; constraints: Record<string, ConstraintJson> } };
  property: {
    operator: string;
    mode: QueryMode;
    keyframe: number;
    scenario: Record<string, ConstraintJson>;
    behavior: string;
    negated: boolean;
    statement: string;
  };
  provenance: {
    query_id: number;
    verdict: Verdict;
    transcripts: { query_range: [number, number]; debug_dir?: string };
  };
  stale: boolean;
}

export interface JobDoc {
  job_id: string;
  status: "pending" | "done" | "error";
  response?: OracleResponseDoc;
  facts_added?: FactDoc[];
  error?: string;
}

export interface SessionSummary {
  id: string;
  name: string;
  program_hash: string;
  trace_length: number;
  queries: number;
  facts: number;
}
