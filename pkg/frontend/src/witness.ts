/** Witness presentation: which inputs differ from the logged keyframe.
 *
 * The puncture guarantees at least one difference; investigators read
 * deltas, so changed variables are the headline. Floats compare by bit
 * pattern when both sides carry one.
 */

import type { TraceStep, VarValue, WitnessDoc } from "./types.js";
import { factualText } from "./draft.js";

export interface WitnessRow {
  name: string;
  factual: string;
  witness: string;
  changed: boolean;
}

function sameValue(a: VarValue, b: VarValue): boolean {
  if (typeof a === "object" && typeof b === "object") {
    return a.bits === b.bits;
  }
  if (typeof a === "object" || typeof b === "object") return false;
  return a === b;
}

export function witnessRows(witness: WitnessDoc, keyframe: TraceStep): WitnessRow[] {
  const rows: WitnessRow[] = [];
  for (const [name, value] of Object.entries(witness.inputs)) {
    const logged = keyframe.vars[name];
    rows.push({
      name,
      factual: logged === undefined ? "?" : factualText(logged),
      witness: factualText(value),
      changed: logged === undefined ? true : !sameValue(value, logged),
    });
  }
  return rows;
}

export function changedNames(rows: WitnessRow[]): string[] {
  return rows.filter((r) => r.changed).map((r) => r.name);
}

/** Decision values the solver attached to the witness, for display. */
export function outputRows(witness: WitnessDoc): { name: string; text: string }[] {
  return Object.entries(witness.outputs).map(([name, value]) => ({
    name,
    text: factualText(value),
  }));
}
