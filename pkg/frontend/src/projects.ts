/** Project list screen: create, rename, delete, and open ("accelerate")
 * projects. Row commands appear on hover (CSS); delete asks for confirmation.
 */

import { ApiClient, ApiError } from "./api.js";
import { el } from "./board.js";
import type { Project } from "./types.js";

export interface ProjectsOptions {
  onOpen: (projectId: string) => void;
  onLogout?: () => void;
  /** Confirmation hook, injectable for tests; defaults to window.confirm. */
  confirmFn?: (message: string) => boolean;
}

export interface ProjectsHandle {
  refresh(): Promise<void>;
}

export async function mountProjects(
  root: HTMLElement,
  api: ApiClient,
  options: ProjectsOptions,
): Promise<ProjectsHandle> {
  const confirmFn = options.confirmFn ?? ((message: string) => window.confirm(message));

  const errorBox = el("p", { class: "error-box", hidden: "" });
  const listBox = el("ul", { class: "project-list" });

  const nameInput = el("input", {
    class: "project-name-input",
    placeholder: "Project name",
    required: "",
  }) as HTMLInputElement;
  const descInput = el("input", {
    class: "project-desc-input",
    placeholder: "Description (optional)",
  }) as HTMLInputElement;
  const createForm = el(
    "form",
    { class: "create-form" },
    nameInput,
    descInput,
    el("button", { type: "submit" }, "Create project"),
  ) as HTMLFormElement;

  const headerBits: HTMLElement[] = [el("h2", {}, "Projects")];
  if (options.onLogout) {
    const logout = el("button", { class: "logout-button", type: "button" }, "Log out");
    logout.addEventListener("click", () => options.onLogout?.());
    headerBits.push(logout);
  }

  root.replaceChildren(
    el("header", { class: "projects-header" }, ...headerBits),
    errorBox,
    createForm,
    listBox,
  );

  function showError(message: string): void {
    errorBox.textContent = message;
    errorBox.hidden = false;
  }

  function clearError(): void {
    errorBox.hidden = true;
  }

  function failureText(failure: unknown): string {
    if (failure instanceof ApiError) return failure.message;
    return "Request failed. Check the connection and retry.";
  }

  function projectRow(project: Project): HTMLElement {
    const open = el("button", { class: "row-open", type: "button", title: "Accelerate" }, "→");
    open.addEventListener("click", () => options.onOpen(project.id));

    const edit = el("button", { class: "row-edit", type: "button" }, "Edit");
    const remove = el("button", { class: "row-delete", type: "button" }, "Delete");

    const row = el(
      "li",
      { class: "project-row", "data-project": project.id },
      el(
        "div",
        { class: "row-text" },
        el("span", { class: "row-name" }, project.name),
        el("span", { class: "row-desc" }, project.description),
      ),
      el("div", { class: "row-commands" }, open, edit, remove),
    );

    edit.addEventListener("click", () => {
      row.replaceWith(editRow(project));
    });

    remove.addEventListener("click", () => {
      if (!confirmFn(`Delete project "${project.name}"? This cannot be undone.`)) return;
      api
        .deleteProject(project.id)
        .then(() => refresh())
        .catch((failure: unknown) => showError(failureText(failure)));
    });

    return row;
  }

  function editRow(project: Project): HTMLElement {
    const name = el("input", { class: "edit-name", value: project.name }) as HTMLInputElement;
    name.value = project.name;
    const desc = el("input", { class: "edit-desc" }) as HTMLInputElement;
    desc.value = project.description;
    const save = el("button", { type: "submit" }, "Save");
    const cancel = el("button", { type: "button", class: "edit-cancel" }, "Cancel");
    const form = el("form", { class: "edit-form" }, name, desc, save, cancel) as HTMLFormElement;
    const row = el("li", { class: "project-row editing", "data-project": project.id }, form);

    cancel.addEventListener("click", () => {
      row.replaceWith(projectRow(project));
    });
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      api
        .patchProject(project.id, { name: name.value, description: desc.value })
        .then(() => {
          clearError();
          return refresh();
        })
        .catch((failure: unknown) => showError(failureText(failure)));
    });
    return row;
  }

  async function refresh(): Promise<void> {
    const projects = await api.listProjects();
    if (projects.length === 0) {
      listBox.replaceChildren(
        el("li", { class: "empty-note" }, "No projects yet. Create one above."),
      );
    } else {
      listBox.replaceChildren(...projects.map(projectRow));
    }
  }

  createForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const name = nameInput.value.trim();
    if (!name) {
      showError("A project needs a name.");
      return;
    }
    api
      .createProject(name, descInput.value.trim())
      .then(() => {
        clearError();
        createForm.reset();
        return refresh();
      })
      .catch((failure: unknown) => showError(failureText(failure)));
  });

  try {
    await refresh();
  } catch (failure) {
    showError(failureText(failure));
  }
  return { refresh };
}
