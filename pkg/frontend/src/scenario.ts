/** The scenario form model: parsing, validation, and the request mapping.
 *
 * Validation mirrors the server's ranges so the submit button can stay
 * disabled while any field is out of range; the server remains the
 * authority and its field errors are surfaced inline either way.
 */

import type { CashflowFrequency, CashflowSign, Defaults, SimulateRequest } from "./api";

export type FrequencyLabel = "annual" | "quarterly" | "monthly";

export const FREQUENCY_BY_LABEL: Record<FrequencyLabel, CashflowFrequency> = {
  annual: 1,
  quarterly: 4,
  monthly: 12,
};

export const LABEL_BY_FREQUENCY: Record<CashflowFrequency, FrequencyLabel> = {
  1: "annual",
  4: "quarterly",
  12: "monthly",
};

export interface ScenarioForm {
  initialWealth: number;
  horizon: number;
  stockShareStart: number;
  stockShareEnd: number;
  domesticShare: number;
  cashflowAmount: number;
  cashflowSign: CashflowSign;
  cashflowGrowth: number;
  frequency: FrequencyLabel;
  nPaths: number;
  /** blank = let the server pick and echo a seed */
  masterSeed: string;
  advanced: boolean;
  vol: number;
  rate: number;
  spread: number;
  valuation: number;
}

export const FALLBACK_LIMITS = {
  horizon: { min: 1, max: 50 },
  n_paths: { default: 10_000, min: 100, max: 100_000 },
  factor_ranges: {
    vol: { min: 0.1, max: 150 },
    rate: { min: 0.1, max: 30 },
    spread: { min: -10, max: 10 },
    valuation: { min: -5, max: 5 },
  },
};

export type Limits = typeof FALLBACK_LIMITS;

export function limitsFromDefaults(defaults: Defaults): Limits {
  return {
    horizon: defaults.horizon,
    n_paths: defaults.n_paths,
    factor_ranges: defaults.factor_ranges,
  };
}

export function initialForm(defaults?: Defaults): ScenarioForm {
  const factors = defaults?.initial_factors;
  return {
    initialWealth: 1_000_000,
    horizon: 30,
    stockShareStart: 0.6,
    stockShareEnd: 0.6,
    domesticShare: 0.5,
    cashflowAmount: 40_000,
    cashflowSign: "withdraw",
    cashflowGrowth: 0.04,
    frequency: "annual",
    nPaths: defaults?.n_paths.default ?? 10_000,
    masterSeed: "",
    advanced: false,
    vol: factors?.vol ?? 10,
    rate: factors?.rate ?? 5,
    spread: factors?.spread ?? 1,
    valuation: factors?.valuation ?? 0,
  };
}

const isInt = (x: number) => Number.isInteger(x);

/** Field name -> message; an empty object means the form can be submitted. */
export function validateScenario(form: ScenarioForm, limits: Limits = FALLBACK_LIMITS): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!(form.initialWealth > 0) || !Number.isFinite(form.initialWealth)) {
    errors.initial_wealth = "must be a positive amount";
  }
  if (!isInt(form.horizon) || form.horizon < limits.horizon.min || form.horizon > limits.horizon.max) {
    errors.horizon = `must be a whole number of years in ${limits.horizon.min}..${limits.horizon.max}`;
  }
  for (const [field, value] of [
    ["stock_share_start", form.stockShareStart],
    ["stock_share_end", form.stockShareEnd],
    ["domestic_share", form.domesticShare],
  ] as const) {
    if (!(value >= 0 && value <= 1)) errors[field] = "must be between 0 and 1";
  }
  if (!(form.cashflowAmount >= 0)) errors["cashflow.amount"] = "must be non-negative";
  if (!(form.cashflowGrowth > -1)) errors["cashflow.growth_rate"] = "must be above -100%";
  if (!(form.frequency in FREQUENCY_BY_LABEL)) errors["cashflow.frequency"] = "unknown frequency";
  if (!isInt(form.nPaths) || form.nPaths < limits.n_paths.min || form.nPaths > limits.n_paths.max) {
    errors.n_paths = `must be in ${limits.n_paths.min}..${limits.n_paths.max}`;
  }
  if (form.masterSeed.trim() !== "") {
    const seed = Number(form.masterSeed);
    if (!isInt(seed) || seed < 0) errors.master_seed = "must be a non-negative integer";
  }
  if (form.advanced) {
    for (const name of ["vol", "rate", "spread", "valuation"] as const) {
      const range = limits.factor_ranges[name];
      const value = form[name];
      if (!(value >= range.min && value <= range.max)) {
        errors[`factor_overrides.${name}`] = `must be in ${range.min}..${range.max}`;
      }
    }
  }
  return errors;
}

export function toRequest(form: ScenarioForm): SimulateRequest {
  const request: SimulateRequest = {
    initial_wealth: form.initialWealth,
    horizon: form.horizon,
    stock_share_start: form.stockShareStart,
    stock_share_end: form.stockShareEnd,
    domestic_share: form.domesticShare,
    cashflow: {
      amount: form.cashflowAmount,
      sign: form.cashflowSign,
      growth_rate: form.cashflowGrowth,
      frequency: FREQUENCY_BY_LABEL[form.frequency],
    },
    n_paths: form.nPaths,
  };
  if (form.masterSeed.trim() !== "") request.master_seed = Number(form.masterSeed);
  if (form.advanced) {
    request.factor_overrides = {
      vol: form.vol,
      rate: form.rate,
      spread: form.spread,
      valuation: form.valuation,
    };
  }
  return request;
}

/** True when the server's echoed config matches what the form sent.
 *
 * The server fills in `master_seed` when the form left it blank and
 * always echoes `allow_nonstationary`; everything else must round-trip
 * exactly.
 */
export function echoMatchesForm(form: ScenarioForm, echoed: SimulateRequest): boolean {
  const sent = toRequest(form) as unknown as Record<string, unknown>;
  const got = { ...echoed } as unknown as Record<string, unknown>;
  delete got.allow_nonstationary;
  if (!("master_seed" in sent)) delete got.master_seed;
  return deepEqual(sent, got);
}

function deepEqual(a: unknown, b: unknown): boolean {
  if (Object.is(a, b)) return true;
  if (typeof a !== "object" || typeof b !== "object" || a === null || b === null) return false;
  const keysA = Object.keys(a as object).sort();
  const keysB = Object.keys(b as object).sort();
  if (keysA.length !== keysB.length || keysA.some((k, i) => k !== keysB[i])) return false;
  return keysA.every((k) =>
    deepEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]),
  );
}
