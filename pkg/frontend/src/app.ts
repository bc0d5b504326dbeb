/** Application entry point: authentication, hash routing, screen switching.
 *
 * Routes:
 *   /demo            tokenless board on the shared demo project
 *   #/projects       project list (requires a session)
 *   #/board/<id>     kernel board for one project (requires a session)
 *
 * The session token lives in localStorage so a reload stays signed in until
 * the server expires the session.
 */

import { ApiClient, ApiError } from "./api.js";
import { type BoardHandle, el, mountBoard } from "./board.js";
import { mountProjects } from "./projects.js";

const TOKEN_KEY = "essencetrack.token";
const DEMO_PROJECT_ID = "demo";

export function startApp(root: HTMLElement, api: ApiClient = new ApiClient()): void {
  let board: BoardHandle | null = null;

  function closeBoard(): void {
    board?.close();
    board = null;
  }

  function failureText(failure: unknown): string {
    if (failure instanceof ApiError) return failure.message;
    return "Request failed. Check the connection and retry.";
  }

  // -- auth ------------------------------------------------------------------

  function storedToken(): string | null {
    try {
      return window.localStorage.getItem(TOKEN_KEY);
    } catch {
      return null;
    }
  }

  function storeToken(token: string | null): void {
    try {
      if (token === null) {
        window.localStorage.removeItem(TOKEN_KEY);
      } else {
        window.localStorage.setItem(TOKEN_KEY, token);
      }
    } catch {
      // Private-mode storage failures leave the session in memory only.
    }
  }

  function logout(): void {
    api.token = null;
    storeToken(null);
    closeBoard();
    window.location.hash = "";
    renderLogin();
  }

  function renderLogin(message = ""): void {
    closeBoard();
    const errorBox = el("p", { class: "error-box", hidden: "" });
    if (message) {
      errorBox.textContent = message;
      errorBox.hidden = false;
    }
    const email = el("input", {
      class: "email-input",
      type: "email",
      placeholder: "Email",
      required: "",
    }) as HTMLInputElement;
    const password = el("input", {
      class: "password-input",
      type: "password",
      placeholder: "Password",
      required: "",
    }) as HTMLInputElement;
    const loginButton = el("button", { type: "submit", class: "login-button" }, "Log in");
    const registerButton = el(
      "button",
      { type: "button", class: "register-button" },
      "Register",
    );
    const form = el(
      "form",
      { class: "auth-form" },
      el("h2", {}, "Sign in"),
      errorBox,
      email,
      password,
      el("div", { class: "auth-buttons" }, loginButton, registerButton),
      el(
        "p",
        { class: "demo-note" },
        "Or try the shared board without an account: ",
        el("a", { href: "/demo" }, "open the demo"),
      ),
    ) as HTMLFormElement;

    function showError(text: string): void {
      errorBox.textContent = text;
      errorBox.hidden = false;
    }

    async function login(): Promise<void> {
      const session = await api.login(email.value, password.value);
      api.token = session.token;
      storeToken(session.token);
      window.location.hash = "#/projects";
      await route();
    }

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      login().catch((failure: unknown) => showError(failureText(failure)));
    });
    registerButton.addEventListener("click", () => {
      api
        .register(email.value, password.value)
        .then(() => login())
        .catch((failure: unknown) => showError(failureText(failure)));
    });

    root.replaceChildren(el("div", { class: "auth-screen" }, form));
  }

  // -- screens ------------------------------------------------------------------

  async function showProjects(): Promise<void> {
    closeBoard();
    try {
      await mountProjects(root, api, {
        onOpen(projectId) {
          window.location.hash = `#/board/${encodeURIComponent(projectId)}`;
        },
        onLogout: logout,
      });
    } catch (failure) {
      if (failure instanceof ApiError && failure.status === 401) {
        logout();
        return;
      }
      throw failure;
    }
  }

  async function showBoard(projectId: string, showBack: boolean): Promise<void> {
    closeBoard();
    try {
      board = await mountBoard(root, api, projectId, { showBack });
    } catch (failure) {
      if (failure instanceof ApiError && failure.status === 401 && showBack) {
        logout();
        return;
      }
      root.replaceChildren(el("p", { class: "error-box" }, failureText(failure)));
    }
  }

  // -- routing -------------------------------------------------------------------

  async function route(): Promise<void> {
    if (window.location.pathname === "/demo") {
      await showBoard(DEMO_PROJECT_ID, false);
      return;
    }
    if (!api.token) {
      renderLogin();
      return;
    }
    const hash = window.location.hash;
    const boardMatch = /^#\/board\/(.+)$/.exec(hash);
    if (boardMatch && boardMatch[1]) {
      await showBoard(decodeURIComponent(boardMatch[1]), true);
    } else {
      await showProjects();
    }
  }

  api.token = storedToken();
  window.addEventListener("hashchange", () => {
    void route();
  });
  void route();
}
