/** Turning a simulation response into chart series and summary rows. */

import type { SimulateResponse } from "./api";

export const PERCENTILE_LABELS = ["10", "30", "50", "70", "90"] as const;

export interface ChartData {
  years: number[];
  /** one series per percentile label; zero wealth becomes null so the
   * log scale stays defined (the ruin marker shows where it died) */
  series: (number | null)[][];
  labels: string[];
}

export interface RuinMarker {
  label: string;
  year: number;
}

export function buildChartData(response: SimulateResponse): ChartData {
  const years = response.percentile_paths["50"].wealth.map((p) => p.year);
  const series = PERCENTILE_LABELS.map((label) =>
    response.percentile_paths[label].wealth.map((p) => (p.wealth > 0 ? p.wealth : null)),
  );
  return { years, series, labels: PERCENTILE_LABELS.map((q) => `${q}% path`) };
}

export function ruinMarkers(response: SimulateResponse): RuinMarker[] {
  return PERCENTILE_LABELS.flatMap((label) => {
    const ruinYear = response.percentile_paths[label].ruin_year;
    return ruinYear === null ? [] : [{ label: `${label}%`, year: ruinYear }];
  });
}

const moneyFormat = new Intl.NumberFormat("en-US", {
  style: "currency",
  currency: "USD",
  maximumFractionDigits: 0,
});

export function formatMoney(value: number): string {
  return moneyFormat.format(value);
}

export function formatPercent(fraction: number): string {
  return `${(100 * fraction).toFixed(fraction >= 0.1 || fraction === 0 ? 0 : 1)}%`;
}

export interface StatRow {
  label: string;
  value: string;
}

export function summaryRows(response: SimulateResponse): StatRow[] {
  return [
    { label: "Ruin probability", value: formatPercent(response.ruin_probability) },
    {
      label: "Mean ruin year",
      value: response.mean_ruin_year === null ? "—" : response.mean_ruin_year.toFixed(1),
    },
    { label: "Mean final wealth", value: formatMoney(response.mean_final_wealth) },
    { label: "90% final wealth", value: formatMoney(response.p90_final_wealth) },
    { label: "Paths", value: String(response.n_paths) },
    { label: "Seed", value: String(response.master_seed) },
    { label: "Model", value: response.model_version },
    { label: "Elapsed", value: `${response.elapsed_ms.toFixed(0)} ms` },
  ];
}

export function echoRows(response: SimulateResponse): StatRow[] {
  const config = response.config;
  const cashflow = config.cashflow;
  const overrides = config.factor_overrides;
  const rows: StatRow[] = [
    { label: "Initial wealth", value: formatMoney(config.initial_wealth) },
    { label: "Horizon", value: `${config.horizon} years` },
    {
      label: "Stock share",
      value: `${Math.round(100 * config.stock_share_start)}% → ${Math.round(100 * config.stock_share_end)}%`,
    },
    { label: "Domestic share", value: `${Math.round(100 * config.domestic_share)}% of stocks` },
    {
      label: cashflow.sign === "withdraw" ? "Withdrawal" : "Contribution",
      value: `${formatMoney(cashflow.amount)}/yr, ${frequencyLabel(cashflow.frequency)}, ${(
        100 * cashflow.growth_rate
      ).toFixed(1)}%/yr growth`,
    },
  ];
  if (overrides) {
    rows.push({
      label: "Initial factors",
      value: `vol ${overrides.vol ?? "–"}, rate ${overrides.rate ?? "–"}, spread ${overrides.spread ?? "–"}, valuation ${overrides.valuation ?? "–"}`,
    });
  }
  return rows;
}

function frequencyLabel(frequency: number): string {
  return frequency === 12 ? "monthly" : frequency === 4 ? "quarterly" : "annual";
}

export function compactMoney(value: number | null): string {
  if (value === null || !isFinite(value)) return "";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e9) return `${(value / 1e9).toPrecision(3)}B`;
  if (magnitude >= 1e6) return `${(value / 1e6).toPrecision(3)}M`;
  if (magnitude >= 1e3) return `${(value / 1e3).toPrecision(3)}k`;
  return value.toPrecision(3);
}
