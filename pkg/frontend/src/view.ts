/** DOM layer: the scenario form, inline field errors, and the results pane. */

import type { ApiFieldError, SimulateResponse } from "./api";
import type { ChartData, RuinMarker } from "./results";
import { buildChartData, echoRows, ruinMarkers, summaryRows } from "./results";
import type { ScenarioForm } from "./scenario";

export type ChartFactory = (host: HTMLElement, data: ChartData, markers: RuinMarker[]) => unknown;

interface FieldSpec {
  name: string;
  label: string;
  input: string;
}

const BASIC_FIELDS: FieldSpec[] = [
  { name: "initial_wealth", label: "Initial wealth ($)", input: `<input name="initial_wealth" type="number" min="1" step="1000" value="1000000" />` },
  { name: "horizon", label: "Horizon (years, 1–50)", input: `<input name="horizon" type="number" min="1" max="50" step="1" value="30" />` },
  { name: "stock_share_start", label: "Stock share at start (0–1)", input: `<input name="stock_share_start" type="number" min="0" max="1" step="0.05" value="0.6" />` },
  { name: "stock_share_end", label: "Stock share at end (0–1)", input: `<input name="stock_share_end" type="number" min="0" max="1" step="0.05" value="0.6" />` },
  { name: "domestic_share", label: "Domestic share of stocks (0–1)", input: `<input name="domestic_share" type="number" min="0" max="1" step="0.05" value="0.5" />` },
  {
    name: "cashflow.sign",
    label: "Cashflow direction",
    input: `<select name="cashflow.sign"><option value="withdraw">withdraw</option><option value="contribute">contribute</option></select>`,
  },
  { name: "cashflow.amount", label: "Annual cashflow ($, first year)", input: `<input name="cashflow.amount" type="number" min="0" step="1000" value="40000" />` },
  { name: "cashflow.growth_rate", label: "Cashflow growth per year (e.g. 0.04)", input: `<input name="cashflow.growth_rate" type="number" step="0.01" value="0.04" />` },
  {
    name: "cashflow.frequency",
    label: "Cashflow frequency",
    input: `<select name="cashflow.frequency"><option value="annual">annual</option><option value="quarterly">quarterly</option><option value="monthly">monthly</option></select>`,
  },
  { name: "n_paths", label: "Simulated paths", input: `<input name="n_paths" type="number" min="100" max="100000" step="100" value="10000" />` },
  { name: "master_seed", label: "Seed (blank = random)", input: `<input name="master_seed" type="text" value="" placeholder="auto" />` },
];

const ADVANCED_FIELDS: FieldSpec[] = [
  { name: "factor_overrides.vol", label: "Initial volatility", input: `<input name="factor_overrides.vol" type="number" step="0.5" value="10" />` },
  { name: "factor_overrides.rate", label: "Initial corporate rate (%)", input: `<input name="factor_overrides.rate" type="number" step="0.1" value="5" />` },
  { name: "factor_overrides.spread", label: "Initial term spread (%)", input: `<input name="factor_overrides.spread" type="number" step="0.1" value="1" />` },
  { name: "factor_overrides.valuation", label: "Initial valuation level", input: `<input name="factor_overrides.valuation" type="number" step="0.1" value="0" />` },
];

function fieldHtml(spec: FieldSpec): string {
  return `
    <label class="field" data-field="${spec.name}">
      <span>${spec.label}</span>
      ${spec.input}
      <small class="field-error" data-error-for="${spec.name}"></small>
    </label>`;
}

export function renderPage(root: HTMLElement): void {
  root.innerHTML = `
    <div class="layout">
      <form id="scenario" novalidate>
        <h1>Wealth path planner</h1>
        <p class="intro">Simulate a stock/bond portfolio year by year and see the
        ranked outcome paths, with regular contributions or withdrawals.</p>
        <div class="grid">${BASIC_FIELDS.map(fieldHtml).join("")}</div>
        <label class="field mode-toggle">
          <span>Advanced: override initial market factors</span>
          <input name="advanced" type="checkbox" />
          <small class="field-error" data-error-for="advanced"></small>
        </label>
        <div class="grid advanced-fields" hidden>${ADVANCED_FIELDS.map(fieldHtml).join("")}</div>
        <div class="submit-row">
          <button id="run" type="submit">Run simulation</button>
          <span id="status" role="status"></span>
        </div>
        <small class="field-error" data-error-for="request"></small>
      </form>
      <section id="results" hidden>
        <div id="chart"></div>
        <aside id="panel">
          <h2>Outcome</h2>
          <dl id="summary"></dl>
          <h2>Scenario</h2>
          <dl id="echo"></dl>
        </aside>
      </section>
    </div>`;
}

function inputElement(root: HTMLElement, name: string): HTMLInputElement | HTMLSelectElement {
  const el = root.querySelector(`[name="${name}"]`);
  if (!el) throw new Error(`missing form control: ${name}`);
  return el as HTMLInputElement | HTMLSelectElement;
}

export function readForm(root: HTMLElement): ScenarioForm {
  const value = (name: string) => inputElement(root, name).value;
  const number = (name: string) => Number(value(name));
  return {
    initialWealth: number("initial_wealth"),
    horizon: number("horizon"),
    stockShareStart: number("stock_share_start"),
    stockShareEnd: number("stock_share_end"),
    domesticShare: number("domestic_share"),
    cashflowAmount: number("cashflow.amount"),
    cashflowSign: value("cashflow.sign") as ScenarioForm["cashflowSign"],
    cashflowGrowth: number("cashflow.growth_rate"),
    frequency: value("cashflow.frequency") as ScenarioForm["frequency"],
    nPaths: number("n_paths"),
    masterSeed: value("master_seed"),
    advanced: (inputElement(root, "advanced") as HTMLInputElement).checked,
    vol: number("factor_overrides.vol"),
    rate: number("factor_overrides.rate"),
    spread: number("factor_overrides.spread"),
    valuation: number("factor_overrides.valuation"),
  };
}

export function writeForm(root: HTMLElement, form: ScenarioForm): void {
  const assign = (name: string, value: string) => {
    inputElement(root, name).value = value;
  };
  assign("initial_wealth", String(form.initialWealth));
  assign("horizon", String(form.horizon));
  assign("stock_share_start", String(form.stockShareStart));
  assign("stock_share_end", String(form.stockShareEnd));
  assign("domestic_share", String(form.domesticShare));
  assign("cashflow.amount", String(form.cashflowAmount));
  assign("cashflow.sign", form.cashflowSign);
  assign("cashflow.growth_rate", String(form.cashflowGrowth));
  assign("cashflow.frequency", form.frequency);
  assign("n_paths", String(form.nPaths));
  assign("master_seed", form.masterSeed);
  (inputElement(root, "advanced") as HTMLInputElement).checked = form.advanced;
  assign("factor_overrides.vol", String(form.vol));
  assign("factor_overrides.rate", String(form.rate));
  assign("factor_overrides.spread", String(form.spread));
  assign("factor_overrides.valuation", String(form.valuation));
  syncAdvancedVisibility(root);
}

export function syncAdvancedVisibility(root: HTMLElement): void {
  const advanced = (inputElement(root, "advanced") as HTMLInputElement).checked;
  const section = root.querySelector<HTMLElement>(".advanced-fields");
  if (section) section.hidden = !advanced;
}

/** Write validation messages next to their fields; returns overall validity. */
export function showFieldErrors(root: HTMLElement, errors: Record<string, string>): boolean {
  for (const slot of root.querySelectorAll<HTMLElement>("[data-error-for]")) {
    const field = slot.dataset.errorFor ?? "";
    slot.textContent = errors[field] ?? "";
  }
  const valid = Object.keys(errors).length === 0;
  const submit = root.querySelector<HTMLButtonElement>("#run");
  if (submit) submit.disabled = !valid;
  return valid;
}

export function showApiErrors(root: HTMLElement, errors: ApiFieldError[]): void {
  const known = new Set(
    Array.from(root.querySelectorAll<HTMLElement>("[data-error-for]")).map((el) => el.dataset.errorFor),
  );
  const mapped: Record<string, string> = {};
  for (const error of errors) {
    const field = known.has(error.field) ? error.field : "request";
    mapped[field] = mapped[field] ? `${mapped[field]}; ${error.message}` : error.message;
  }
  for (const slot of root.querySelectorAll<HTMLElement>("[data-error-for]")) {
    const field = slot.dataset.errorFor ?? "";
    slot.textContent = mapped[field] ?? "";
  }
}

function renderRows(host: HTMLElement, rows: { label: string; value: string }[]): void {
  host.innerHTML = rows.map((r) => `<div><dt>${r.label}</dt><dd>${r.value}</dd></div>`).join("");
}

export function renderResults(
  root: HTMLElement,
  response: SimulateResponse,
  chartFactory: ChartFactory,
): void {
  const results = root.querySelector<HTMLElement>("#results");
  const chartHost = root.querySelector<HTMLElement>("#chart");
  const summary = root.querySelector<HTMLElement>("#summary");
  const echo = root.querySelector<HTMLElement>("#echo");
  if (!results || !chartHost || !summary || !echo) throw new Error("results pane missing");

  results.hidden = false;
  chartHost.innerHTML = "";
  const data = buildChartData(response);
  const markers = ruinMarkers(response);
  chartFactory(chartHost, data, markers);

  const markerNote = markers.length
    ? `<p class="ruin-note">Ruin years marked: ${markers.map((m) => `${m.label} at year ${m.year}`).join(", ")}</p>`
    : "";
  chartHost.insertAdjacentHTML("beforeend", markerNote);

  renderRows(summary, summaryRows(response));
  renderRows(echo, echoRows(response));
}
