/** Kernel board screen: concerns, alphas, expandable state lists, hint box,
 * charts, and the live subscription that keeps all of it current.
 *
 * Click flow: a state click paints an optimistic highlight, posts the change,
 * and reconciles with the server's answer. Completion figures are never
 * computed here; they are read from the snapshot the server sent last.
 */

import { ApiClient, ApiError, type SubscribeHandlers, type Subscription } from "./api.js";
import { renderBars, renderRose } from "./charts.js";
import { BoardModel } from "./state.js";
import { type ChangeNotice, type EventRecord, formatPercent } from "./types.js";

export interface BoardOptions {
  /** Show a link back to the project list (absent on the demo board). */
  showBack?: boolean;
  /** Stream factory, injectable for tests; defaults to the API client's. */
  subscribe?: (projectId: string, handlers: SubscribeHandlers) => Subscription;
  /** File-save hook, injectable for tests; defaults to a blob download. */
  download?: (filename: string, text: string) => void;
}

export interface BoardHandle {
  model: BoardModel;
  close(): void;
}

export async function mountBoard(
  root: HTMLElement,
  api: ApiClient,
  projectId: string,
  options: BoardOptions = {},
): Promise<BoardHandle> {
  root.replaceChildren(el("p", { class: "loading" }, "Loading project..."));

  // Subscribe before the initial fetch so no change can fall in between;
  // notices that arrive early wait in the backlog until the model exists.
  let model: BoardModel | null = null;
  const backlog: ChangeNotice[] = [];
  const subscribeFn = options.subscribe ?? ((id, handlers) => api.subscribe(id, handlers));
  const subscription = subscribeFn(projectId, {
    onNotice(notice) {
      if (!model) {
        backlog.push(notice);
      } else if (model.applyNotice(notice)) {
        renderKernel();
        renderCharts();
      }
    },
    onDrop() {
      showError("Connection lost. Reconnecting...");
    },
    onReconnect() {
      void resync();
    },
  });

  const kernel = await api.kernel();
  const [project, snapshot, events] = await Promise.all([
    api.getProject(projectId),
    api.snapshot(projectId),
    api.events(projectId),
  ]);
  model = new BoardModel(kernel, project, snapshot, lastSeq(events));
  for (const notice of backlog) model.applyNotice(notice);
  backlog.length = 0;

  // -- static scaffold --------------------------------------------------------

  const errorBox = el("p", { class: "error-box", hidden: "" });
  const heading = el("h2", {}, project.name);
  const overall = el("span", { class: "overall-figure" });
  const csvButton = el("button", { class: "csv-button", type: "button" }, "Download CSV");
  const kernelPanel = el("section", { class: "kernel-panel" });
  const hintBox = el("div", { class: "hint-box" });
  const roseBox = el("div", { class: "chart rose-box" });
  const barsBox = el("div", { class: "chart bars-box" });

  const headerBits: (HTMLElement | string)[] = [heading];
  if (options.showBack) {
    headerBits.unshift(el("a", { href: "#/projects", class: "back-link" }, "← Projects"));
  }
  headerBits.push(
    el("div", { class: "board-tools" }, el("span", {}, "Overall: "), overall, csvButton),
  );

  root.replaceChildren(
    el("header", { class: "board-header" }, ...headerBits),
    errorBox,
    el(
      "div",
      { class: "board-layout" },
      kernelPanel,
      el(
        "aside",
        { class: "side-panel" },
        hintBox,
        el("h3", {}, "Alpha completion"),
        roseBox,
        el("h3", {}, "Concern completion"),
        barsBox,
      ),
    ),
  );

  // -- rendering ---------------------------------------------------------------

  function renderHint(): void {
    const m = model;
    if (!m) return;
    if (m.hint) {
      hintBox.replaceChildren(
        el("h4", {}, m.hint.title),
        el("p", {}, m.hint.description),
      );
    } else {
      hintBox.replaceChildren(
        el("p", { class: "hint-placeholder" }, "Hover an element to read its description."),
      );
    }
  }

  function renderCharts(): void {
    const m = model;
    if (!m) return;
    overall.textContent = formatPercent(m.snapshot.project_completion);
    renderRose(roseBox, m.kernel, m.snapshot);
    renderBars(barsBox, m.kernel, m.snapshot);
  }

  function renderKernel(): void {
    const m = model;
    if (!m) return;
    const sections = m.kernel.concerns.map((concern) => {
      const title = el(
        "h3",
        { class: "concern-title", "data-concern": concern.id },
        concern.name,
        el(
          "span",
          { class: "pct" },
          formatPercent(m.snapshot.concern_completion[concern.id] ?? 0),
        ),
      );
      title.addEventListener("mouseenter", () => {
        m.hintConcern(concern.id);
        renderHint();
      });

      const rows = concern.alphas.map((alpha) => {
        const currentId = m.displayedState(alpha.id);
        const current = currentId ? alpha.states.find((s) => s.id === currentId) : undefined;
        const classes = ["alpha"];
        if (m.expandedAlpha === alpha.id) classes.push("expanded");
        if (m.isPending(alpha.id)) classes.push("pending");
        const button = el(
          "button",
          { class: classes.join(" "), type: "button", "data-alpha": alpha.id },
          el("span", { class: "alpha-name" }, alpha.name),
          el("span", { class: "alpha-state" }, current ? current.name : "\u2014"),
          el(
            "span",
            { class: "pct" },
            formatPercent(m.snapshot.alpha_completion[alpha.id] ?? 0),
          ),
        );
        button.addEventListener("click", () => {
          m.toggleAlpha(alpha.id);
          renderKernel();
        });
        button.addEventListener("mouseenter", () => {
          m.hintAlpha(alpha.id);
          renderHint();
        });

        const row = el("li", { class: "alpha-row" }, button);
        if (m.expandedAlpha === alpha.id) {
          const items = alpha.states.map((state) => {
            const stateClasses = ["state"];
            if (currentId === state.id) stateClasses.push("active");
            if (m.isPending(alpha.id) && currentId === state.id) stateClasses.push("pending");
            const stateButton = el(
              "button",
              { class: stateClasses.join(" "), type: "button", "data-state": state.id },
              `${state.order}. ${state.name}`,
            );
            stateButton.addEventListener("click", () => {
              clickState(alpha.id, state.id);
            });
            stateButton.addEventListener("mouseenter", () => {
              m.hintState(alpha.id, state.id);
              renderHint();
            });
            return el("li", {}, stateButton);
          });
          row.append(el("ol", { class: "state-list" }, ...items));
        }
        return row;
      });

      return el(
        "section",
        { class: "concern" },
        title,
        el("ul", { class: "alpha-list" }, ...rows),
      );
    });
    kernelPanel.replaceChildren(...sections);
  }

  function renderAll(): void {
    renderKernel();
    renderCharts();
    renderHint();
  }

  // -- errors --------------------------------------------------------------------

  function showError(message: string): void {
    errorBox.textContent = message;
    errorBox.hidden = false;
  }

  function clearError(): void {
    errorBox.hidden = true;
  }

  // -- interactions ---------------------------------------------------------------

  function clickState(alphaId: string, stateId: string): void {
    const m = model;
    if (!m || m.isPending(alphaId)) return;
    // Clicking the held state clears the alpha; anything else sets it.
    const target = m.displayedState(alphaId) === stateId ? null : stateId;
    m.beginChange(alphaId, target);
    clearError();
    renderKernel();
    api
      .changeState(projectId, alphaId, target)
      .then((result) => {
        m.applyResult(result);
        renderAll();
      })
      .catch((failure: unknown) => {
        m.rollback();
        showError(failureText(failure));
        renderAll();
      });
  }

  async function resync(): Promise<void> {
    const m = model;
    if (!m) return;
    try {
      const [freshProject, freshSnapshot, freshEvents] = await Promise.all([
        api.getProject(projectId),
        api.snapshot(projectId),
        api.events(projectId),
      ]);
      m.resync(freshProject, freshSnapshot, lastSeq(freshEvents));
      clearError();
      renderAll();
    } catch (failure) {
      showError(failureText(failure));
    }
  }

  const download = options.download ?? blobDownload;
  csvButton.addEventListener("click", () => {
    api
      .fetchCsv(projectId)
      .then((text) => {
        clearError();
        download(`${projectId}-events.csv`, text);
      })
      .catch((failure: unknown) => {
        showError(failureText(failure));
      });
  });

  kernelPanel.addEventListener("mouseleave", () => {
    model?.clearHint();
    renderHint();
  });

  renderAll();
  return {
    model,
    close() {
      subscription.close();
    },
  };
}

function lastSeq(events: EventRecord[]): number {
  return events.length > 0 ? (events[events.length - 1]?.seq ?? 0) : 0;
}

function failureText(failure: unknown): string {
  if (failure instanceof ApiError) return failure.message;
  return "Request failed. Check the connection and retry.";
}

function blobDownload(filename: string, text: string): void {
  const url = URL.createObjectURL(new Blob([text], { type: "text/csv" }));
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  document.body.append(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

/** Tiny element builder: attributes then children, empty-string for boolean attrs. */
export function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (HTMLElement | string)[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "hidden") {
      node.hidden = true;
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}
