// DOM rendering: sliders and toggles for the seven variables, the conflict
// gauge with its peace-threshold marker, the intervention diff panel, and
// the relevance bars.

import { ScenarioState, ScenarioStore } from "./state.js";
import {
  CONTROLLABLE,
  ScenarioFeatures,
  Strategy,
  VariableName,
  VARIABLE_NAMES,
} from "./types.js";
import { isBinary, RANGES } from "./validate.js";

const SLIDER_RANGES: Record<string, { min: number; max: number; step: number }> = {
  democracy: { min: -10, max: 10, step: 0.5 },
  distance: { min: 1.5, max: 4.5, step: 0.05 },
  capability: { min: 0, max: 3, step: 0.05 },
  dependency: { min: 0, max: 0.4, step: 0.005 },
};

const LABELS: Record<VariableName, string> = {
  democracy: "Democracy (joint, -10 to 10)",
  allies: "Allies",
  contingency: "Shared border",
  distance: "Distance (log10 km)",
  capability: "Capability ratio (log10)",
  dependency: "Trade dependency",
  major_power: "Major power",
};

export function mount(root: HTMLElement, store: ScenarioStore): void {
  root.innerHTML = `
    <header>
      <h1>Dispute scenario explorer</h1>
      <div id="banner" class="banner hidden"></div>
    </header>
    <main>
      <section class="panel" id="variables"><h2>Liberal variables</h2></section>
      <section class="panel">
        <h2>Conflict probability</h2>
        <div id="gauge"></div>
        <h2>Intervention</h2>
        <div class="controls">
          <select id="strategy"></select>
          <button id="intervene">Find peaceful values</button>
        </div>
        <div id="diff"></div>
      </section>
      <section class="panel">
        <h2>Variable relevance</h2>
        <div id="ard"></div>
      </section>
    </main>
  `;

  buildVariableWidgets(root.querySelector("#variables")!, store);
  buildStrategyPicker(root.querySelector("#strategy")!, store);
  root.querySelector("#intervene")!.addEventListener("click", () => {
    void store.requestIntervention();
  });

  store.subscribe((state) => render(root, state, store));
  render(root, store.snapshot(), store);
}

function buildVariableWidgets(section: HTMLElement, store: ScenarioStore): void {
  const features = store.snapshot().features;
  for (const name of VARIABLE_NAMES) {
    const row = document.createElement("div");
    row.className = "variable-row";
    const label = document.createElement("label");
    label.textContent = LABELS[name];
    label.htmlFor = `var-${name}`;
    row.appendChild(label);

    if (isBinary(name)) {
      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.id = `var-${name}`;
      toggle.checked = features[name] === 1;
      toggle.addEventListener("change", () => {
        store.setFeature(name, toggle.checked ? 1 : 0);
      });
      row.appendChild(toggle);
    } else {
      const slider = document.createElement("input");
      const range = SLIDER_RANGES[name];
      slider.type = "range";
      slider.id = `var-${name}`;
      slider.min = String(range.min);
      slider.max = String(range.max);
      slider.step = String(range.step);
      slider.value = String(features[name]);
      const readout = document.createElement("span");
      readout.className = "readout";
      readout.id = `readout-${name}`;
      readout.textContent = String(features[name]);
      slider.addEventListener("input", () => {
        store.setFeature(name, Number(slider.value));
      });
      row.appendChild(slider);
      row.appendChild(readout);
    }
    section.appendChild(row);
  }
}

function buildStrategyPicker(select: HTMLElement, store: ScenarioStore): void {
  const options: Strategy[] = [
    "multi",
    ...CONTROLLABLE.map((v) => `single:${v}` as Strategy),
  ];
  for (const value of options) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent =
      value === "multi" ? "All four controllables" : `Only ${value.split(":")[1]}`;
    select.appendChild(option);
  }
  (select as HTMLSelectElement).addEventListener("change", () => {
    store.setStrategy((select as HTMLSelectElement).value as Strategy);
  });
}

function render(root: HTMLElement, state: ScenarioState, store: ScenarioStore): void {
  const banner = root.querySelector("#banner") as HTMLElement;
  const message = state.serviceError ?? state.fieldError;
  banner.classList.toggle("hidden", message === null);
  banner.textContent = message ?? "";

  for (const name of VARIABLE_NAMES) {
    const widget = root.querySelector(`#var-${name}`) as HTMLInputElement | null;
    if (!widget) continue;
    if (isBinary(name)) {
      widget.checked = state.features[name] === 1;
    } else {
      widget.value = String(state.features[name]);
      const readout = root.querySelector(`#readout-${name}`);
      if (readout) readout.textContent = formatValue(state.features[name]);
    }
  }

  renderGauge(root.querySelector("#gauge") as HTMLElement, state);
  renderDiff(root.querySelector("#diff") as HTMLElement, state, store);
  renderArd(root.querySelector("#ard") as HTMLElement, state);
}

function renderGauge(el: HTMLElement, state: ScenarioState): void {
  const pct = state.pConflict === null ? null : state.pConflict * 100;
  const thresholdPct = state.threshold * 100;
  const staleClass = state.stale ? " stale" : "";
  el.innerHTML = `
    <div class="gauge${staleClass}">
      <div class="gauge-track">
        <div class="gauge-fill${pct !== null && pct >= thresholdPct ? " conflict" : ""}"
             style="width: ${pct ?? 0}%"></div>
        <div class="gauge-threshold" style="left: ${thresholdPct}%"
             title="peace threshold"></div>
      </div>
      <div class="gauge-value">${pct === null ? "—" : pct.toFixed(1) + "%"}</div>
    </div>
  `;
}

function renderDiff(el: HTMLElement, state: ScenarioState, store: ScenarioStore): void {
  if (state.controlling) {
    el.innerHTML = `<p class="muted">searching…</p>`;
    return;
  }
  const outcome = state.outcome;
  if (outcome === null) {
    el.innerHTML = `<p class="muted">No intervention requested yet.</p>`;
    return;
  }
  if (outcome.evaluations === 0 && outcome.success) {
    el.innerHTML = `<p class="success">No intervention needed: the scenario already predicts peace
      (${(outcome.p_before * 100).toFixed(1)}%).</p>`;
    return;
  }
  const rows = VARIABLE_NAMES.filter(
    (name) => Math.abs(outcome.adjusted[name] - state.features[name]) > 1e-12,
  )
    .map(
      (name) => `
      <tr>
        <td>${name}</td>
        <td>${formatValue(state.features[name])}</td>
        <td>→</td>
        <td>${formatValue(outcome.adjusted[name])}</td>
      </tr>`,
    )
    .join("");
  const badge = outcome.success
    ? `<span class="badge success">peace reached</span>`
    : `<span class="badge failure">still conflict</span>`;
  const rounded = outcome.rounded_allies_variant
    ? `<p class="muted">With alliance rounded to ${outcome.rounded_allies_variant.adjusted.allies}:
         ${(outcome.rounded_allies_variant.p_after * 100).toFixed(1)}%
         (${outcome.rounded_allies_variant.success ? "peace" : "conflict"})</p>`
    : "";
  const diagnostics = outcome.diagnostics
    ? `<p class="failure">${outcome.diagnostics}</p>`
    : "";
  el.innerHTML = `
    ${badge}
    <p>${(outcome.p_before * 100).toFixed(1)}% → ${(outcome.p_after * 100).toFixed(1)}%</p>
    <table class="diff-table"><tbody>${rows}</tbody></table>
    ${rounded}
    ${diagnostics}
    <button id="apply">Adopt these values</button>
  `;
  el.querySelector("#apply")?.addEventListener("click", () => {
    void store.applyIntervention();
  });
}

function renderArd(el: HTMLElement, state: ScenarioState): void {
  if (state.ard === null) {
    el.innerHTML = `<p class="muted">Relevance unavailable for this model.</p>`;
    return;
  }
  const maxNorm = Math.max(...state.ard.map((e) => e.normalized));
  el.innerHTML = state.ard
    .slice()
    .sort((a, b) => b.normalized - a.normalized)
    .map(
      (entry) => `
      <div class="ard-row">
        <span class="ard-label">${entry.variable}</span>
        <div class="ard-bar" style="width: ${(entry.normalized / maxNorm) * 100}%"></div>
        <span class="ard-value">${(entry.normalized * 100).toFixed(1)}%</span>
      </div>`,
    )
    .join("");
}

function formatValue(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(3).replace(/0+$/, "").replace(/\.$/, "");
}
