import { describe, expect, it } from "vitest";

import type { SimulateResponse } from "../src/api";
import {
  FREQUENCY_BY_LABEL,
  echoMatchesForm,
  initialForm,
  toRequest,
  validateScenario,
  type ScenarioForm,
} from "../src/scenario";
import planner from "./fixtures/planner_scenario.json";

const plannerResponse = planner as unknown as SimulateResponse;

function validForm(overrides: Partial<ScenarioForm> = {}): ScenarioForm {
  return { ...initialForm(), ...overrides };
}

describe("validateScenario", () => {
  it("accepts the default form", () => {
    expect(validateScenario(validForm())).toEqual({});
  });

  it("rejects a horizon outside 1..50", () => {
    expect(validateScenario(validForm({ horizon: 51 }))).toHaveProperty("horizon");
    expect(validateScenario(validForm({ horizon: 0 }))).toHaveProperty("horizon");
    expect(validateScenario(validForm({ horizon: 12.5 }))).toHaveProperty("horizon");
  });

  it("rejects shares outside [0, 1]", () => {
    for (const field of ["stockShareStart", "stockShareEnd", "domesticShare"] as const) {
      const errors = validateScenario(validForm({ [field]: 1.5 } as Partial<ScenarioForm>));
      expect(Object.keys(errors)).toHaveLength(1);
    }
  });

  it("rejects non-positive wealth and negative cashflow", () => {
    expect(validateScenario(validForm({ initialWealth: 0 }))).toHaveProperty("initial_wealth");
    expect(validateScenario(validForm({ cashflowAmount: -5 }))).toHaveProperty("cashflow.amount");
  });

  it("checks the seed only when present", () => {
    expect(validateScenario(validForm({ masterSeed: "" }))).toEqual({});
    expect(validateScenario(validForm({ masterSeed: "123" }))).toEqual({});
    expect(validateScenario(validForm({ masterSeed: "-1" }))).toHaveProperty("master_seed");
    expect(validateScenario(validForm({ masterSeed: "1.5" }))).toHaveProperty("master_seed");
  });

  it("checks factor overrides only in advanced mode", () => {
    expect(validateScenario(validForm({ vol: -2 }))).toEqual({});
    expect(validateScenario(validForm({ advanced: true, vol: -2 }))).toHaveProperty(
      "factor_overrides.vol",
    );
  });
});

describe("toRequest", () => {
  it("maps frequency labels to sub-period counts", () => {
    expect(FREQUENCY_BY_LABEL).toEqual({ annual: 1, quarterly: 4, monthly: 12 });
    const request = toRequest(validForm({ frequency: "monthly" }));
    expect(request.cashflow.frequency).toBe(12);
  });

  it("omits the seed and overrides unless provided", () => {
    const request = toRequest(validForm());
    expect(request).not.toHaveProperty("master_seed");
    expect(request).not.toHaveProperty("factor_overrides");
  });

  it("includes overrides in advanced mode", () => {
    const request = toRequest(validForm({ advanced: true, vol: 12, rate: 4, spread: 0.5, valuation: -0.2 }));
    expect(request.factor_overrides).toEqual({ vol: 12, rate: 4, spread: 0.5, valuation: -0.2 });
  });
});

describe("echoMatchesForm", () => {
  const plannerForm = validForm({
    initialWealth: 2_500_000,
    horizon: 30,
    stockShareStart: 0.6,
    stockShareEnd: 0.4,
    domesticShare: 0.7,
    cashflowAmount: 100_000,
    cashflowSign: "withdraw",
    cashflowGrowth: 0.03,
    frequency: "monthly",
    nPaths: 10_000,
    masterSeed: "77",
    advanced: true,
    vol: 10,
    rate: 3,
    spread: 1.5,
    valuation: -0.5,
  });

  it("round-trips losslessly against the engine-produced echo", () => {
    expect(echoMatchesForm(plannerForm, plannerResponse.config)).toBe(true);
  });

  it("detects any drifted field", () => {
    const drifted = { ...plannerForm, horizon: 29 };
    expect(echoMatchesForm(drifted, plannerResponse.config)).toBe(false);
  });

  it("tolerates a server-assigned seed when the form left it blank", () => {
    const blankSeed = { ...plannerForm, masterSeed: "" };
    expect(echoMatchesForm(blankSeed, plannerResponse.config)).toBe(true);
  });
});
