/** DOM rendering. Cards appear in server order; descriptions are always
 * visible, raw task expressions sit behind a disclosure, utility scores
 * behind a toggle. */

import type { Controller } from "./controller.js";
import { AppState, badgesOf, canSubmit } from "./state.js";
import type { Verdict } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const BADGE_LABELS: Record<string, string> = {
  accuracy: "accuracy",
  sufficiency: "examples",
  confidence: "confidence",
  explainability: "explainability",
};

function renderCard(state: AppState, controller: Controller, index: number): HTMLElement {
  const card = state.cards[index];
  const root = el("article", "card" + (card.verdict ? ` judged-${card.verdict}` : ""));

  const head = el("header", "card-head");
  head.append(el("span", "rank", `#${index + 1}`));
  if (state.showUtility) {
    head.append(el("span", "utility", card.rec.utility.toFixed(4)));
  }
  root.append(head);

  root.append(el("p", "nl", card.rec.nl));

  const badges = el("div", "badges");
  for (const [key, value] of Object.entries(badgesOf(card.rec))) {
    const badge = el("span", "badge", `${BADGE_LABELS[key]} ${value.toFixed(2)}`);
    badge.dataset.metric = key;
    badge.dataset.value = String(value);
    badges.append(badge);
  }
  root.append(badges);

  const disclosure = el("details", "petel");
  disclosure.append(el("summary", undefined, "expression"));
  disclosure.append(el("pre", undefined, card.rec.petel));
  root.append(disclosure);

  const actions = el("div", "actions");
  for (const verdict of ["useful", "not_useful"] as Verdict[]) {
    const button = el("button", `verdict ${verdict}`,
                      verdict === "useful" ? "useful" : "not useful");
    button.disabled = !canSubmit(state, card.rec.task_id, verdict);
    button.addEventListener("click", () => {
      void controller.submitFeedback(card.rec.task_id, verdict);
    });
    actions.append(button);
  }
  if (card.verdict) {
    actions.append(el("span", "verdict-mark", `marked ${card.verdict.replace("_", " ")}`));
  }
  root.append(actions);
  return root;
}

function renderControls(state: AppState, controller: Controller): HTMLElement {
  const panel = el("aside", "controls");

  const runButton = el("button", "run", state.hasRun ? "re-run pipeline" : "run pipeline");
  runButton.addEventListener("click", () => void controller.run());
  panel.append(runButton);

  const lambdaRow = el("label", "control-row", `diversity λ = ${state.lambda.toFixed(2)} `);
  const slider = el("input") as HTMLInputElement;
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.05";
  slider.value = String(state.lambda);
  slider.addEventListener("change", () => void controller.changeLambda(Number(slider.value)));
  lambdaRow.append(slider);
  panel.append(lambdaRow);

  const utilityRow = el("label", "control-row", "show utility scores ");
  const toggle = el("input") as HTMLInputElement;
  toggle.type = "checkbox";
  toggle.checked = state.showUtility;
  toggle.addEventListener("change", () => controller.toggleUtility());
  utilityRow.append(toggle);
  panel.append(utilityRow);

  const windowInput = el("input") as HTMLInputElement;
  windowInput.placeholder = "window, e.g. 1d";
  windowInput.pattern = "\\d+[dhm]";
  const leadInput = el("input") as HTMLInputElement;
  leadInput.placeholder = "lead, e.g. 0d";
  leadInput.pattern = "\\d+[dhm]";
  const apply = el("button", undefined, "apply window/lead");
  apply.addEventListener("click", () => {
    const params: { window?: string; lead?: string } = {};
    const durationOk = (v: string) => /^\d+[dhm]$/.test(v);
    if (windowInput.value) {
      if (!durationOk(windowInput.value)) { windowInput.reportValidity(); return; }
      params.window = windowInput.value;
    }
    if (leadInput.value) {
      if (!durationOk(leadInput.value)) { leadInput.reportValidity(); return; }
      params.lead = leadInput.value;
    }
    if (params.window || params.lead) void controller.changeParams(params);
  });
  const paramsRow = el("div", "control-row params");
  paramsRow.append(windowInput, leadInput, apply);
  panel.append(paramsRow);

  if (state.feedbackLog.length) {
    const drawer = el("details", "history");
    drawer.append(el("summary", undefined, `feedback history (${state.feedbackLog.length})`));
    const list = el("ul");
    for (const entry of state.feedbackLog) {
      list.append(el("li", entry.verdict, `${entry.verdict.replace("_", " ")}: ${entry.nl}`));
    }
    drawer.append(list);
    panel.append(drawer);
  }
  return panel;
}

export function render(root: HTMLElement, state: AppState, controller: Controller): void {
  root.replaceChildren();

  if (state.stale) {
    root.append(el("div", "banner stale",
                   "Parameters changed: results are stale until the next run."));
  }
  if (state.toast) {
    root.append(el("div", "banner toast", state.toast));
  }

  const layout = el("div", "layout");
  const main = el("section", "cards");
  if (!state.hasRun || state.cards.length === 0) {
    main.append(el("p", "empty",
                   state.sessionId
                     ? "No recommendations yet. Run the pipeline to get a ranked list."
                     : "Create a session to begin."));
  } else {
    state.cards.forEach((_, i) => main.append(renderCard(state, controller, i)));
  }
  layout.append(main, renderControls(state, controller));
  root.append(layout);
}
