// @vitest-environment jsdom

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, type SubscribeHandlers } from "../src/api.js";
import { mountBoard } from "../src/board.js";
import type { EventRecord, Project, Snapshot } from "../src/types.js";
import {
  event,
  jsonResponse,
  miniKernel,
  notice,
  project,
  textResponse,
  until,
  zeroSnapshot,
} from "./fixtures.js";

const kernel = miniKernel();

function conceivedSnapshot(): Snapshot {
  const snapshot = zeroSnapshot(kernel);
  snapshot.alpha_completion["Requirements"] = 100 / 6;
  snapshot.concern_completion["Solution"] = 100 / 12;
  snapshot.project_completion = 100 / 36;
  return snapshot;
}

interface PendingPost {
  body: { state_id: string | null };
  resolve: (response: Response) => void;
}

/** A scripted server: canned GET payloads, hand-resolved state POSTs. */
class FakeServer {
  project: Project = project();
  snapshot: Snapshot = zeroSnapshot(kernel);
  events: EventRecord[] = [];
  csvText = "timestamp,subject,value\r\n";
  posts: PendingPost[] = [];
  handlers: SubscribeHandlers[] = [];
  closes = 0;
  downloads: { filename: string; text: string }[] = [];

  api(): ApiClient {
    return new ApiClient("http://api.test", async (url, init) => {
      const method = init?.method ?? "GET";
      const path = url.replace("http://api.test", "");
      if (path === "/api/kernel") return jsonResponse(200, kernel);
      if (path === "/api/projects/p1" && method === "GET") {
        return jsonResponse(200, this.project);
      }
      if (path === "/api/projects/p1/snapshot") return jsonResponse(200, this.snapshot);
      if (path === "/api/projects/p1/events") return jsonResponse(200, this.events);
      if (path === "/api/projects/p1/events.csv") return textResponse(200, this.csvText);
      if (method === "POST" && /\/alphas\/[^/]+\/state$/.test(path)) {
        return new Promise<Response>((resolve) => {
          this.posts.push({ body: JSON.parse(String(init?.body)), resolve });
        });
      }
      throw new Error(`unmocked route: ${method} ${path}`);
    });
  }

  mountOptions() {
    return {
      subscribe: (_projectId: string, handlers: SubscribeHandlers) => {
        this.handlers.push(handlers);
        return {
          close: () => {
            this.closes += 1;
          },
        };
      },
      download: (filename: string, text: string) => {
        this.downloads.push({ filename, text });
      },
    };
  }

  lastPost(): PendingPost {
    const post = this.posts[this.posts.length - 1];
    if (!post) throw new Error("no POST captured");
    return post;
  }

  pushNotice(seq: number, value: string, snapshot: Snapshot): void {
    const handler = this.handlers[0];
    if (!handler) throw new Error("no subscriber");
    handler.onNotice(notice({ seq, value }, snapshot));
  }
}

let server: FakeServer;
let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.append(root);
  server = new FakeServer();
});

function hover(element: Element): void {
  element.dispatchEvent(new Event("mouseenter"));
}

function alphaButton(id: string): HTMLElement {
  const button = root.querySelector(`button[data-alpha="${id}"]`);
  if (!button) throw new Error(`no alpha button ${id}`);
  return button as HTMLElement;
}

function stateButton(id: string): HTMLElement {
  const button = root.querySelector(`button[data-state="${id}"]`);
  if (!button) throw new Error(`no state button ${id}`);
  return button as HTMLElement;
}

describe("board rendering", () => {
  it("builds the whole board from server documents", async () => {
    const handle = await mountBoard(root, server.api(), "p1", server.mountOptions());
    expect(root.querySelectorAll("section.concern")).toHaveLength(3);
    expect(root.querySelectorAll("button.alpha")).toHaveLength(7);
    expect(root.querySelector(".rose-box svg")).not.toBeNull();
    expect(root.querySelector(".bars-box svg")).not.toBeNull();
    expect(root.querySelector(".overall-figure")?.textContent).toBe("0.00%");
    expect(root.querySelector("h2")?.textContent).toBe("Sample project");
    handle.close();
    expect(server.closes).toBe(1);
  });

  it("expands an alpha into its state list on click", async () => {
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    alphaButton("Requirements").click();
    const states = root.querySelectorAll("button.state");
    expect(states).toHaveLength(6);
    expect(states[0]?.textContent).toBe("1. Conceived");
    expect(states[5]?.textContent).toBe("6. Fulfilled");
    // clicking another alpha moves the expansion
    alphaButton("Team").click();
    expect(root.querySelectorAll("button.state")).toHaveLength(5);
  });

  it("fills the hint box from kernel descriptions on hover", async () => {
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    hover(alphaButton("Opportunity"));
    expect(root.querySelector(".hint-box")?.textContent).toContain(
      "Opportunity description",
    );
    alphaButton("Requirements").click();
    hover(stateButton("Conceived"));
    expect(root.querySelector(".hint-box")?.textContent).toContain(
      "Requirements Conceived description",
    );
  });
});

describe("state clicks", () => {
  it("paints an optimistic highlight, then reconciles with the POST result", async () => {
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    alphaButton("Requirements").click();
    stateButton("Conceived").click();

    // optimistic: highlighted immediately, but no chart movement yet
    expect(server.lastPost().body).toEqual({ state_id: "Conceived" });
    expect(stateButton("Conceived").classList.contains("pending")).toBe(true);
    expect(root.querySelector(".overall-figure")?.textContent).toBe("0.00%");

    server
      .lastPost()
      .resolve(jsonResponse(200, { event: event({ seq: 1 }), snapshot: conceivedSnapshot() }));
    await until(() => !stateButton("Conceived").classList.contains("pending"));
    expect(stateButton("Conceived").classList.contains("active")).toBe(true);
    expect(root.querySelector(".overall-figure")?.textContent).toBe("2.78%");
    const sector = root.querySelector('path.rose-sector[data-alpha="Requirements"]');
    expect(sector?.querySelector("title")?.textContent).toBe("Requirements: 16.67%");
  });

  it("clicking the held state posts a clear", async () => {
    server.project = project({ alpha_states: { Requirements: "Conceived" } });
    server.snapshot = conceivedSnapshot();
    server.events = [event({ seq: 1 })];
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    alphaButton("Requirements").click();
    expect(stateButton("Conceived").classList.contains("active")).toBe(true);

    stateButton("Conceived").click();
    expect(server.lastPost().body).toEqual({ state_id: null });
    server.lastPost().resolve(
      jsonResponse(200, {
        event: event({ seq: 2, value: "(none)" }),
        snapshot: zeroSnapshot(kernel),
      }),
    );
    await until(() => !alphaButton("Requirements").classList.contains("pending"));
    expect(stateButton("Conceived").classList.contains("active")).toBe(false);
    expect(root.querySelector(".overall-figure")?.textContent).toBe("0.00%");
    expect(alphaButton("Requirements").textContent).toContain("\u2014");
  });

  it("rolls back the highlight and shows the error when the POST fails", async () => {
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    alphaButton("Requirements").click();
    stateButton("Bounded").click();
    expect(stateButton("Bounded").classList.contains("pending")).toBe(true);

    server.lastPost().resolve(jsonResponse(409, { detail: "cannot set state" }));
    await until(() => {
      const box = root.querySelector(".error-box") as HTMLElement;
      return !box.hidden && box.textContent === "cannot set state";
    });
    expect(root.querySelector("button.state.pending")).toBeNull();
    expect(root.querySelector("button.state.active")).toBeNull();
    expect(root.querySelector(".overall-figure")?.textContent).toBe("0.00%");
  });
});

describe("live updates", () => {
  it("applies another client's notice without a reload", async () => {
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    server.pushNotice(1, "Conceived", conceivedSnapshot());
    await until(() => root.querySelector(".overall-figure")?.textContent === "2.78%");
    alphaButton("Requirements").click();
    expect(stateButton("Conceived").classList.contains("active")).toBe(true);
  });

  it("does not apply the echoed notice of a change it already holds", async () => {
    const handle = await mountBoard(root, server.api(), "p1", server.mountOptions());
    alphaButton("Requirements").click();
    stateButton("Conceived").click();
    server
      .lastPost()
      .resolve(jsonResponse(200, { event: event({ seq: 1 }), snapshot: conceivedSnapshot() }));
    await until(() => root.querySelector(".overall-figure")?.textContent === "2.78%");

    // the stream now echoes the same event; a stale snapshot must not regress the board
    server.pushNotice(1, "Conceived", zeroSnapshot(kernel));
    expect(handle.model.lastSeq).toBe(1);
    expect(root.querySelector(".overall-figure")?.textContent).toBe("2.78%");
  });

  it("resyncs from the server after a drop and reconnect", async () => {
    const handle = await mountBoard(root, server.api(), "p1", server.mountOptions());
    const subscriber = server.handlers[0];
    if (!subscriber) throw new Error("no subscriber");

    subscriber.onDrop?.();
    const errorBox = root.querySelector(".error-box") as HTMLElement;
    expect(errorBox.hidden).toBe(false);
    expect(errorBox.textContent).toContain("Connection lost");

    // while disconnected the project moved on
    server.project = project({ alpha_states: { Requirements: "Conceived" } });
    server.snapshot = conceivedSnapshot();
    server.events = [event({ seq: 1 }), event({ seq: 2, value: "(none)" }), event({ seq: 3 })];
    subscriber.onReconnect?.();

    await until(() => root.querySelector(".overall-figure")?.textContent === "2.78%");
    expect(errorBox.hidden).toBe(true);
    expect(handle.model.lastSeq).toBe(3);
  });
});

describe("CSV download", () => {
  it("saves the export under a name that includes the project id", async () => {
    server.csvText = 'timestamp,subject,value\r\n"t","Requirements.State","Conceived"\r\n';
    await mountBoard(root, server.api(), "p1", server.mountOptions());
    (root.querySelector(".csv-button") as HTMLElement).click();
    await until(() => server.downloads.length === 1);
    expect(server.downloads[0]).toEqual({
      filename: "p1-events.csv",
      text: server.csvText,
    });
  });
});
