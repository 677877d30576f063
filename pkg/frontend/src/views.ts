/**
 * HTML renderers for the view models. Pure string builders so the same
 * projection can be asserted in tests and injected into the page shell.
 */

import type {
  ExpertItemView,
  ExpertView,
  FacilitatorView,
  FeedbackView,
  ResultsView,
} from "./store.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function ratingControl(item: ExpertItemView, disabled: boolean): string {
  const rows = item.choices
    .map((choice) => {
      const checked = item.myValue === choice.value ? " checked" : "";
      const off = disabled ? " disabled" : "";
      return `
      <label class="choice">
        <input type="radio" name="rating-${escapeHtml(item.id)}" value="${choice.value}"${checked}${off}>
        <span class="choice-value">${choice.value}</span>
        <span class="choice-text">${escapeHtml(choice.description)}</span>
      </label>`;
    })
    .join("");
  return `<fieldset class="rating" data-item-id="${escapeHtml(item.id)}"${disabled ? " disabled" : ""}>
    <legend>${escapeHtml(item.criterionName)}: ${escapeHtml(item.subject)} vs ${escapeHtml(item.reference)}</legend>
    ${rows}
  </fieldset>`;
}

export function renderExpertScreen(view: ExpertView): string {
  const banner = view.banner
    ? `<div class="banner" role="status">${escapeHtml(view.banner)}</div>`
    : "";
  const items = view.items.map((item) => ratingControl(item, view.readOnly)).join("\n");
  const feedback = view.feedback ? renderFeedbackBoard(view.feedback) : "";
  return `<section class="expert">
  <header><h2>Round ${view.round}</h2><span class="state">${escapeHtml(view.state)}</span></header>
  ${banner}
  ${items}
  ${feedback}
</section>`;
}

export function renderFeedbackBoard(view: FeedbackView): string {
  const rows = view.items
    .map(
      (item) => `
    <tr class="${item.settled ? "settled" : "dissent"}">
      <td>${escapeHtml(item.criterionName)}</td>
      <td>${escapeHtml(item.subject)} vs ${escapeHtml(item.reference)}</td>
      <td>${item.median}</td>
      <td>${item.iqr}</td>
      <td>${item.mean.toFixed(2)}</td>
      <td>${item.changed}</td>
    </tr>`,
    )
    .join("");
  return `<table class="feedback" data-round="${view.round}">
  <caption>Round ${view.round} panel aggregates${view.allSettled ? " (all items settled)" : ""}</caption>
  <thead><tr><th>criterion</th><th>pair</th><th>median</th><th>IQR</th><th>mean</th><th>changed</th></tr></thead>
  <tbody>${rows}</tbody>
</table>`;
}

export function renderFacilitatorScreen(view: FacilitatorView): string {
  const heat = view.board
    .map(
      (item) => `
    <div class="cell ${item.settled ? "settled" : "dissent"}" title="IQR ${item.iqr}">
      ${escapeHtml(item.subject)}/${escapeHtml(item.reference)} ${escapeHtml(item.criterionName)}
    </div>`,
    )
    .join("");
  const rounds = view.rounds.map((round) => renderFeedbackBoard(round)).join("\n");
  return `<section class="facilitator">
  <header>
    <h2>Session ${escapeHtml(view.sessionId)}</h2>
    <span class="badge badge-${escapeHtml(view.state)}">${escapeHtml(view.badge)}</span>
    <span class="round">round ${view.round} of ${view.maxRounds}</span>
    <span class="experts">${view.expertCount} experts</span>
  </header>
  <div class="controls">
    <button id="close-round"${view.canCloseRound ? "" : " disabled"}>Close round</button>
    <button id="advance"${view.canAdvance ? "" : " disabled"}>Advance</button>
  </div>
  <div class="heatmap">${heat}</div>
  ${rounds}
</section>`;
}

export function renderResults(view: ResultsView): string {
  const bars = view.ranking
    .map(
      (bar) => `
    <div class="bar-row">
      <span class="bar-rank">${bar.rank}</span>
      <span class="bar-name">${escapeHtml(bar.technology)}</span>
      <span class="bar" style="width:${bar.widthPct}%"></span>
      <span class="bar-tns">${bar.tns.toFixed(4)}</span>
    </div>`,
    )
    .join("");
  const ties = view.ties.length
    ? `<p class="ties">Exact ties: ${view.ties.map((group) => escapeHtml(group.join(" = "))).join("; ")}</p>`
    : "";
  return `<section class="results">
  <h2>Ranking (lower TNS is better)</h2>
  <div class="ranking">${bars}</div>
  ${ties}
  <p class="anova badge-${view.anovaRejected ? "reject" : "keep"}">${escapeHtml(view.anovaBadge)}</p>
</section>`;
}
