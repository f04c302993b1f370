import "./style.css";

import { ApiError, SimulationClient, fetchDefaults } from "./api";
import { createWealthChart } from "./chart";
import {
  FALLBACK_LIMITS,
  type Limits,
  echoMatchesForm,
  initialForm,
  limitsFromDefaults,
  toRequest,
  validateScenario,
} from "./scenario";
import {
  readForm,
  renderPage,
  renderResults,
  showApiErrors,
  showFieldErrors,
  syncAdvancedVisibility,
  writeForm,
} from "./view";

const root = document.querySelector<HTMLElement>("#app");
if (!root) throw new Error("missing #app element");

renderPage(root);
const form = root.querySelector<HTMLFormElement>("#scenario")!;
const status = root.querySelector<HTMLElement>("#status")!;
const client = new SimulationClient();
let limits: Limits = FALLBACK_LIMITS;

function revalidate(): void {
  showFieldErrors(root!, validateScenario(readForm(root!), limits));
}

fetchDefaults()
  .then((defaults) => {
    limits = limitsFromDefaults(defaults);
    writeForm(root!, initialForm(defaults));
    revalidate();
    if (!defaults.stationary) {
      status.textContent = "warning: the loaded model failed its stability check";
    }
  })
  .catch(() => {
    writeForm(root!, initialForm());
    revalidate();
  });

form.addEventListener("input", () => {
  syncAdvancedVisibility(root!);
  revalidate();
});

form.addEventListener("submit", (event) => {
  event.preventDefault();
  const scenario = readForm(root!);
  if (!showFieldErrors(root!, validateScenario(scenario, limits))) return;

  status.textContent = "simulating…";
  client
    .simulate(toRequest(scenario))
    .then((response) => {
      renderResults(root!, response, createWealthChart);
      const matched = echoMatchesForm(scenario, response.config);
      status.textContent = `done in ${response.elapsed_ms.toFixed(0)} ms (seed ${response.master_seed})${
        matched ? "" : " — server adjusted the scenario"
      }`;
    })
    .catch((error) => {
      if (error instanceof DOMException && error.name === "AbortError") return; // superseded
      if (error instanceof ApiError) {
        showApiErrors(root!, error.errors);
        status.textContent = "rejected by the server";
      } else {
        status.textContent = `request failed: ${error}`;
      }
    });
});
