/** Shared fixtures: a small but shape-accurate kernel document, wire-object
 * builders, and fake Response plumbing for driving ApiClient without a server.
 */

import type {
  AlphaDef,
  ChangeNotice,
  EventRecord,
  KernelDefinition,
  Project,
  Snapshot,
} from "../src/types.js";

function alphaDef(id: string, name: string, stateNames: string[]): AlphaDef {
  return {
    id,
    name,
    description: `${name} description`,
    states: stateNames.map((stateName, i) => ({
      id: stateName.replace(/ /g, ""),
      name: stateName,
      description: `${name} ${stateName} description`,
      order: i + 1,
    })),
  };
}

const SIX = ["First", "Second", "Third", "Fourth", "Fifth", "Sixth"];

/** Three concerns, seven alphas; Requirements carries its six real states. */
export function miniKernel(): KernelDefinition {
  return {
    version: "test",
    concerns: [
      {
        id: "Customer",
        name: "Customer",
        description: "Customer description",
        alphas: [
          alphaDef("Opportunity", "Opportunity", SIX),
          alphaDef("Stakeholders", "Stakeholders", SIX),
        ],
      },
      {
        id: "Solution",
        name: "Solution",
        description: "Solution description",
        alphas: [
          alphaDef("Requirements", "Requirements", [
            "Conceived",
            "Bounded",
            "Coherent",
            "Acceptable",
            "Addressed",
            "Fulfilled",
          ]),
          alphaDef("SoftwareSystem", "Software System", SIX),
        ],
      },
      {
        id: "Endeavor",
        name: "Endeavor",
        description: "Endeavor description",
        alphas: [
          alphaDef("Work", "Work", SIX),
          alphaDef("Team", "Team", SIX.slice(0, 5)),
          alphaDef("WayOfWorking", "Way of Working", SIX),
        ],
      },
    ],
  };
}

export function project(overrides: Partial<Project> = {}): Project {
  return {
    id: "p1",
    owner: "u1",
    name: "Sample project",
    description: "A sample",
    created_at: "2013-04-03T14:01:27.007Z",
    alpha_states: {},
    ...overrides,
  };
}

/** All-zero snapshot covering every alpha and concern in the kernel. */
export function zeroSnapshot(kernel: KernelDefinition): Snapshot {
  const alpha_completion: Record<string, number> = {};
  const concern_completion: Record<string, number> = {};
  for (const concern of kernel.concerns) {
    concern_completion[concern.id] = 0;
    for (const alpha of concern.alphas) alpha_completion[alpha.id] = 0;
  }
  return { alpha_completion, concern_completion, project_completion: 0 };
}

export function event(overrides: Partial<EventRecord> = {}): EventRecord {
  return {
    project_id: "p1",
    seq: 1,
    timestamp: "2013-04-03T14:01:27.007Z",
    subject: "Requirements.State",
    value: "Conceived",
    ...overrides,
  };
}

export function notice(
  eventOverrides: Partial<EventRecord>,
  snapshot: Snapshot,
): ChangeNotice {
  const record = event(eventOverrides);
  return { project_id: record.project_id, event: record, snapshot };
}

/** A Response-alike good enough for ApiClient's json()/text() paths. */
export function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
    text: async () => JSON.stringify(body),
  } as unknown as Response;
}

export function textResponse(status: number, text: string): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => JSON.parse(text),
    text: async () => text,
  } as unknown as Response;
}

/** Poll until `check` stops throwing (assertions) or returns true. */
export async function until(check: () => boolean | void, timeoutMs = 3000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastFailure: unknown = new Error("condition never became true");
  while (Date.now() < deadline) {
    try {
      if (check() !== false) return;
      lastFailure = new Error("condition returned false");
    } catch (failure) {
      lastFailure = failure;
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
  throw lastFailure;
}
