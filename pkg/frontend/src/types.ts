/** Wire types mirroring the HTTP API's JSON documents. */

export interface StateDef {
  id: string;
  name: string;
  description: string;
  order: number;
}

export interface AlphaDef {
  id: string;
  name: string;
  description: string;
  states: StateDef[];
}

export interface ConcernDef {
  id: string;
  name: string;
  description: string;
  alphas: AlphaDef[];
}

export interface KernelDefinition {
  version: string;
  concerns: ConcernDef[];
}

export interface Project {
  id: string;
  owner: string | null;
  name: string;
  description: string;
  created_at: string;
  alpha_states: Record<string, string>;
}

export interface Snapshot {
  alpha_completion: Record<string, number>;
  concern_completion: Record<string, number>;
  project_completion: number;
}

export interface EventRecord {
  project_id: string;
  seq: number;
  timestamp: string;
  subject: string;
  value: string;
}

/** One line of the NDJSON subscription stream. */
export interface ChangeNotice {
  project_id: string;
  event: EventRecord;
  snapshot: Snapshot;
}

export interface ChangeResult {
  event: EventRecord;
  snapshot: Snapshot;
}

/** The event value recorded when an alpha returns to the no-state condition. */
export const CLEARED_VALUE = "(none)";

export function allAlphas(kernel: KernelDefinition): AlphaDef[] {
  return kernel.concerns.flatMap((concern) => concern.alphas);
}

export function findAlpha(kernel: KernelDefinition, alphaId: string): AlphaDef | undefined {
  return allAlphas(kernel).find((alpha) => alpha.id === alphaId);
}

export function findState(alpha: AlphaDef, stateId: string): StateDef | undefined {
  return alpha.states.find((state) => state.id === stateId);
}

/**
 * Map a logged event back to a board assignment.
 *
 * Subjects look like "Requirements.State"; values carry the state's display
 * name, or the cleared sentinel. Returns null for events that do not describe
 * a state change of a known alpha.
 */
export function noticeAssignment(
  kernel: KernelDefinition,
  event: EventRecord,
): { alphaId: string; stateId: string | null } | null {
  const dot = event.subject.lastIndexOf(".State");
  if (dot < 1 || dot + 6 !== event.subject.length) return null;
  const alphaId = event.subject.slice(0, dot);
  const alpha = findAlpha(kernel, alphaId);
  if (!alpha) return null;
  if (event.value === CLEARED_VALUE) return { alphaId, stateId: null };
  const state = alpha.states.find((s) => s.name === event.value);
  if (!state) return null;
  return { alphaId, stateId: state.id };
}

/** Render a completion percentage the way both charts and labels show it. */
export function formatPercent(value: number): string {
  return `${value.toFixed(2)}%`;
}
