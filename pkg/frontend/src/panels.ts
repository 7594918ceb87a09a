/** HTML fragments for the side panels; pure string builders. */

import { SessionState } from "./state.js";
import { Cause, Diagnosis } from "./types.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function causeLabel(cause: Cause): string {
  return `${escapeHtml(cause.component)}: ${escapeHtml(cause.risk)}`;
}

export function renderCausePanel(state: SessionState): string {
  if (state.contradiction) {
    return "";
  }
  const report = state.report;
  if (!report) {
    return '<p class="placeholder">No diagnosis yet.</p>';
  }
  if (!report.causes.length) {
    return '<p class="all-clear">All components available; nothing to explain.</p>';
  }
  const items = report.causes
    .map((c) => `<li class="cause-item">${causeLabel(c)} <span class="score">score ${report.score}</span></li>`)
    .join("");
  const alternatives =
    report.alternatives && report.alternatives.length > 1
      ? '<h3>Alternatives</h3><ol class="alternatives">' +
        report.alternatives
          .map(
            (alt) =>
              `<li><span class="score">${alt.score}</span> ${alt.causes.map(causeLabel).join("; ") || "no causes"}</li>`,
          )
          .join("") +
        "</ol>"
      : "";
  const chains = report.explanations
    .flatMap((e) =>
      e.chains
        .filter((chain) => chain.steps.length)
        .map(
          (chain) =>
            `<li class="chain" title="derived from the dependency model">` +
            `${escapeHtml(e.cause.component)} &rarr; ${chain.steps.map((s) => escapeHtml(s.to)).join(" &rarr; ")}</li>`,
        ),
    )
    .join("");
  const chainBlock = chains ? `<h3>Derived chains</h3><ul class="chains">${chains}</ul>` : "";
  return `<ul class="causes">${items}</ul>${alternatives}${chainBlock}`;
}

export function renderBanner(state: SessionState): string {
  if (state.sessionExpired) {
    return '<div class="banner error">Session no longer exists; create a new session to continue.</div>';
  }
  if (state.contradiction) {
    const names = state.contradiction.conflictingObservations
      .map((o) => `${escapeHtml(o.status)}(${escapeHtml(o.component)})`)
      .join(", ");
    return `<div class="banner contradiction">Observations contradict the model: ${names}</div>`;
  }
  if (state.conflict) {
    const c = state.conflict;
    return (
      `<div class="banner conflict">Conflicting observation for ${escapeHtml(c.component)}: ` +
      `already recorded ${escapeHtml(c.earlier.status)}, rejected ${escapeHtml(c.later.status)}.</div>`
    );
  }
  if (state.error) {
    return `<div class="banner error">${escapeHtml(state.error)}</div>`;
  }
  return "";
}

export function renderObservationLog(state: SessionState): string {
  if (!state.observations.length) {
    return '<p class="placeholder">No observations recorded.</p>';
  }
  const rows = state.observations
    .map(
      (o) =>
        `<li class="obs ${o.status}"><span class="status">${o.status}</span> ` +
        `${escapeHtml(o.component)} <span class="source">${escapeHtml(o.source)}</span></li>`,
    )
    .join("");
  return `<ol class="observations">${rows}</ol>`;
}

export function renderHistory(state: SessionState): string {
  if (!state.history.length) {
    return "";
  }
  const entries = state.history
    .map((report: Diagnosis, i: number) => {
      const label = report.causes.length ? report.causes.map(causeLabel).join("; ") : "all available";
      return `<li class="history-entry"><span class="step">#${i + 1}</span> ${label}</li>`;
    })
    .join("");
  return `<ol class="history">${entries}</ol>`;
}
