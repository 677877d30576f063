/**
 * Browser bootstrap: routes the hash to a screen, fetches state, renders,
 * and wires controls. All state lives on the server; every interaction is
 * an optimistic local render followed by a re-fetch of the authoritative
 * response (or a revert + toast on rejection).
 *
 * Routes:
 *   #/expert/{sessionId}/{expertToken}
 *   #/facilitator/{studyId}/{sessionId}
 */

import { PanelApi } from "./api.js";
import { clampRating } from "./scale.js";
import {
  buildExpertView,
  buildFacilitatorView,
  buildResultsView,
  explain,
} from "./store.js";
import {
  renderExpertScreen,
  renderFacilitatorScreen,
  renderResults,
  escapeHtml,
} from "./views.js";

const root = document.getElementById("app") as HTMLElement;

function api(): PanelApi {
  return new PanelApi({
    baseUrl: localStorage.getItem("panel-api-base") ?? "",
    facilitatorToken: localStorage.getItem("panel-facilitator-token") ?? undefined,
  });
}

let toastTimer: number | undefined;
function toast(message: string): void {
  let el = document.getElementById("toast");
  if (!el) {
    el = document.createElement("div");
    el.id = "toast";
    document.body.appendChild(el);
  }
  el.textContent = message;
  el.className = "visible";
  window.clearTimeout(toastTimer);
  toastTimer = window.setTimeout(() => {
    el!.className = "";
  }, 4000);
}

async function showExpert(sessionId: string, expertToken: string): Promise<void> {
  const summary = await api().getSummary(sessionId, expertToken);
  const view = buildExpertView(summary, expertToken);
  root.innerHTML = renderExpertScreen(view);
  if (view.readOnly) return;

  root.querySelectorAll<HTMLInputElement>(".rating input[type=radio]").forEach((input) => {
    input.addEventListener("change", async () => {
      const itemId = input.closest<HTMLElement>(".rating")!.dataset.itemId!;
      const value = clampRating(Number(input.value));
      try {
        await api().submitRating(sessionId, expertToken, { item_id: itemId, value });
      } catch (error) {
        toast(explain(error));
      }
      // reconcile with the server's view either way
      void showExpert(sessionId, expertToken);
    });
  });
}

async function showFacilitator(studyId: string, sessionId: string): Promise<void> {
  const client = api();
  const summary = await client.getSummary(sessionId);
  const view = buildFacilitatorView(summary);
  let html = renderFacilitatorScreen(view);

  const study = await client.getStudy(studyId);
  html += `<div class="run-controls">
    <button id="run-pipeline">Run ranking</button>
    ${study.has_report ? '<button id="show-report">Show results</button>' : ""}
  </div><div id="results"></div>`;
  root.innerHTML = html;

  const on = (id: string, fn: () => Promise<void>) => {
    const el = document.getElementById(id);
    if (el) {
      el.addEventListener("click", () => {
        fn().catch((error) => toast(explain(error)));
      });
    }
  };
  on("close-round", async () => {
    await client.closeRound(sessionId);
    await showFacilitator(studyId, sessionId);
  });
  on("advance", async () => {
    await client.advanceRound(sessionId);
    await showFacilitator(studyId, sessionId);
  });
  on("run-pipeline", async () => {
    const report = await client.runStudy(studyId, { sessions: [sessionId] });
    document.getElementById("results")!.innerHTML = renderResults(buildResultsView(report));
  });
  on("show-report", async () => {
    const report = await client.getReport(studyId);
    document.getElementById("results")!.innerHTML = renderResults(buildResultsView(report));
  });
}

function showLanding(): void {
  root.innerHTML = `<section class="landing">
  <h2>panel-ui</h2>
  <p>Open an expert link (<code>#/expert/&lt;session&gt;/&lt;token&gt;</code>)
  or a facilitator link (<code>#/facilitator/&lt;study&gt;/&lt;session&gt;</code>).</p>
</section>`;
}

async function route(): Promise<void> {
  const parts = window.location.hash.replace(/^#\/?/, "").split("/");
  try {
    if (parts[0] === "expert" && parts.length === 3) {
      await showExpert(parts[1], parts[2]);
    } else if (parts[0] === "facilitator" && parts.length === 3) {
      await showFacilitator(parts[1], parts[2]);
    } else {
      showLanding();
    }
  } catch (error) {
    root.innerHTML = `<div class="banner error">${escapeHtml(explain(error))}</div>`;
  }
}

window.addEventListener("hashchange", () => void route());
void route();
