import { ReviewApi } from "./api.js";
import { App } from "./app.js";
import { SessionStore } from "./state.js";

const DEFAULT_BASE = "http://127.0.0.1:8742";

function baseUrl(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  if (fromQuery) {
    localStorage.setItem("req2ltl.api", fromQuery);
    return fromQuery;
  }
  return localStorage.getItem("req2ltl.api") ?? DEFAULT_BASE;
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");
new App(root, new ReviewApi(baseUrl()), new SessionStore()).mount();
