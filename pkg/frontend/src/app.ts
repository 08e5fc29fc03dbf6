/** Single-page shell: hash routing between the template editor and the
 * prediction review screen.  The service base URL defaults to the page
 * origin and can be overridden with ?service=http://host:port. */

import { ServiceClient } from "./api.js";
import { mountEditor } from "./editor.js";
import { mountReview } from "./review.js";

export function resolveServiceBase(search: string): string {
  const params = new URLSearchParams(search);
  return params.get("service") ?? "";
}

export function mountApp(root: HTMLElement, client: ServiceClient): void {
  root.innerHTML = `
    <header>
      <h1>Document review</h1>
      <nav>
        <a href="#/editor" data-role="nav-editor">Template editor</a>
        <a href="#/review" data-role="nav-review">Review</a>
      </nav>
    </header>
    <main data-role="view"></main>
  `;
  const view = root.querySelector<HTMLElement>('[data-role="view"]');
  if (!view) throw new Error("app markup missing view container");

  function route(): void {
    const hash = window.location.hash || "#/editor";
    if (hash.startsWith("#/review")) {
      mountReview(view!, client);
    } else {
      mountEditor(view!, client);
    }
  }

  window.addEventListener("hashchange", route);
  route();
}

declare global {
  interface Window {
    SERVICE_BASE?: string;
  }
}

if (typeof document !== "undefined") {
  const appRoot = document.getElementById("app");
  if (appRoot) {
    const base =
      window.SERVICE_BASE ?? resolveServiceBase(window.location.search);
    mountApp(appRoot, new ServiceClient(base));
  }
}
