/** Board view model: expansion, hover hints, and optimistic state changes.
 *
 * All percentages shown anywhere come from server snapshots; this module only
 * bookkeeps which state each alpha holds and what the user is hovering. An
 * optimistic change is displayed as pending until the server's answer (either
 * the POST result or the matching stream notice) reconciles it.
 */

import {
  type ChangeNotice,
  type ChangeResult,
  type KernelDefinition,
  type Project,
  type Snapshot,
  findAlpha,
  findState,
  noticeAssignment,
} from "./types.js";

export interface Hint {
  title: string;
  description: string;
}

export interface PendingChange {
  alphaId: string;
  stateId: string | null;
}

export class BoardModel {
  expandedAlpha: string | null = null;
  hint: Hint | null = null;
  pending: PendingChange | null = null;
  lastSeq: number;

  constructor(
    public readonly kernel: KernelDefinition,
    public project: Project,
    public snapshot: Snapshot,
    lastSeq = 0,
  ) {
    this.lastSeq = lastSeq;
  }

  // -- expansion -----------------------------------------------------------

  toggleAlpha(alphaId: string): void {
    if (!findAlpha(this.kernel, alphaId)) return;
    this.expandedAlpha = this.expandedAlpha === alphaId ? null : alphaId;
  }

  // -- hint box --------------------------------------------------------------

  hintConcern(concernId: string): void {
    const concern = this.kernel.concerns.find((c) => c.id === concernId);
    if (concern) this.hint = { title: concern.name, description: concern.description };
  }

  hintAlpha(alphaId: string): void {
    const alpha = findAlpha(this.kernel, alphaId);
    if (alpha) this.hint = { title: alpha.name, description: alpha.description };
  }

  hintState(alphaId: string, stateId: string): void {
    const alpha = findAlpha(this.kernel, alphaId);
    const state = alpha ? findState(alpha, stateId) : undefined;
    if (alpha && state) {
      this.hint = { title: `${alpha.name}: ${state.name}`, description: state.description };
    }
  }

  clearHint(): void {
    this.hint = null;
  }

  // -- state changes -----------------------------------------------------------

  /** The state to draw for an alpha: the pending one while a change is in flight. */
  displayedState(alphaId: string): string | null {
    if (this.pending && this.pending.alphaId === alphaId) return this.pending.stateId;
    return this.project.alpha_states[alphaId] ?? null;
  }

  isPending(alphaId: string): boolean {
    return this.pending !== null && this.pending.alphaId === alphaId;
  }

  /** Optimistically highlight a change before the server confirms it. */
  beginChange(alphaId: string, stateId: string | null): void {
    const alpha = findAlpha(this.kernel, alphaId);
    if (!alpha) throw new Error(`unknown alpha '${alphaId}'`);
    if (stateId !== null && !findState(alpha, stateId)) {
      throw new Error(`alpha '${alphaId}' has no state '${stateId}'`);
    }
    this.pending = { alphaId, stateId };
  }

  /** Server rejected the change: drop the highlight, keep the old state. */
  rollback(): void {
    this.pending = null;
  }

  /** Apply the POST response for a change this client initiated. */
  applyResult(result: ChangeResult): void {
    this.applyAssignment(noticeAssignment(this.kernel, result.event));
    if (result.event.seq > this.lastSeq) this.lastSeq = result.event.seq;
    this.snapshot = result.snapshot;
    this.pending = null;
  }

  /**
   * Apply one stream notice. Returns false for notices already covered by a
   * direct POST response (the stream echoes this client's own changes too).
   */
  applyNotice(notice: ChangeNotice): boolean {
    if (notice.event.seq <= this.lastSeq) return false;
    this.lastSeq = notice.event.seq;
    const assignment = noticeAssignment(this.kernel, notice.event);
    this.applyAssignment(assignment);
    this.snapshot = notice.snapshot;
    if (this.pending && assignment && this.pending.alphaId === assignment.alphaId) {
      this.pending = null;
    }
    return true;
  }

  /** Full resync after a stream drop: server state replaces everything local. */
  resync(project: Project, snapshot: Snapshot, lastSeq: number): void {
    this.project = project;
    this.snapshot = snapshot;
    this.lastSeq = lastSeq;
    this.pending = null;
    if (this.expandedAlpha && !findAlpha(this.kernel, this.expandedAlpha)) {
      this.expandedAlpha = null;
    }
  }

  private applyAssignment(assignment: { alphaId: string; stateId: string | null } | null): void {
    if (!assignment) return;
    const states = { ...this.project.alpha_states };
    if (assignment.stateId === null) {
      delete states[assignment.alphaId];
    } else {
      states[assignment.alphaId] = assignment.stateId;
    }
    this.project = { ...this.project, alpha_states: states };
  }
}
