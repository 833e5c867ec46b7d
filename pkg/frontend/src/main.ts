import { ApiClient, ServiceError } from "./api.js";
import { chartModel, renderChartSVG } from "./chart.js";
import { debounce } from "./debounce.js";
import { formatDailyDelta } from "./format.js";
import { buildCard, renderDegradedHTML, renderOverviewHTML } from "./overview.js";
import type { ForecastPayload, WhatIfPayload } from "./types.js";
import {
  WhatIfRunner,
  clampState,
  hasOverrides,
  initialState,
  meanDailyDelta,
  riskChangedSteps,
  type ZoneViewState,
} from "./whatif.js";

const api = new ApiClient("");

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

let state: ZoneViewState | null = null;
let baseline: ForecastPayload | null = null;

async function loadOverview(): Promise<string[]> {
  const grid = byId<HTMLDivElement>("overview");
  try {
    const zones = await api.getZones();
    const withModels = zones.zones.filter((z) => z.active_version !== null);
    const cards = await Promise.all(
      withModels.map((z) => api.getForecast(z.zone_id, "6d", "recursive").then(buildCard)),
    );
    grid.innerHTML = renderOverviewHTML(cards);
    for (const el of Array.from(grid.querySelectorAll<HTMLElement>(".zone-card"))) {
      el.addEventListener("click", () => selectZone(el.dataset["zone"] ?? ""));
    }
    return withModels.map((z) => z.zone_id);
  } catch (err) {
    grid.innerHTML = renderDegradedHTML(err instanceof Error ? err.message : String(err));
    return [];
  }
}

async function selectZone(zoneId: string): Promise<void> {
  if (!zoneId) return;
  state = initialState(zoneId);
  byId<HTMLHeadingElement>("detail-title").textContent = zoneId;
  byId<HTMLInputElement>("slider-temp").value = "0";
  byId<HTMLInputElement>("slider-wind").value = "0";
  byId<HTMLSpanElement>("delta-label").textContent = "";
  await refreshBaseline();
}

async function refreshBaseline(): Promise<void> {
  if (!state) return;
  try {
    baseline = await api.getForecast(state.zoneId, `${state.horizonDays}d`, state.strategy);
    byId<HTMLDivElement>("chart").innerHTML = renderChartSVG(chartModel(baseline, null));
  } catch (err) {
    const msg = err instanceof ServiceError ? err.message : String(err);
    byId<HTMLDivElement>("chart").innerHTML = renderDegradedHTML(msg);
  }
}

function renderScenario(payload: WhatIfPayload): void {
  byId<HTMLDivElement>("chart").innerHTML = renderChartSVG(
    chartModel(payload.baseline, payload.scenario),
  );
  const changed = riskChangedSteps(payload);
  const suffix = changed > 0 ? ` · risk changes at ${changed} steps` : "";
  byId<HTMLSpanElement>("delta-label").textContent =
    formatDailyDelta(meanDailyDelta(payload)) + suffix;
}

function wireControls(): void {
  const runner = new WhatIfRunner(api, renderScenario, (err) => {
    byId<HTMLSpanElement>("delta-label").textContent =
      err instanceof ServiceError ? err.message : String(err);
  });
  const debouncedRun = debounce((s: ZoneViewState) => void runner.run(s), 250);

  const onSlider = () => {
    if (!state) return;
    state = clampState({
      ...state,
      tempDeltaC: Number(byId<HTMLInputElement>("slider-temp").value),
      windDeltaMs: Number(byId<HTMLInputElement>("slider-wind").value),
    });
    byId<HTMLSpanElement>("temp-value").textContent = `${state.tempDeltaC} °C`;
    byId<HTMLSpanElement>("wind-value").textContent = `${state.windDeltaMs} m/s`;
    if (hasOverrides(state)) {
      debouncedRun(state);
    } else {
      debouncedRun.cancel();
      byId<HTMLSpanElement>("delta-label").textContent = "";
      void refreshBaseline();
    }
  };
  byId<HTMLInputElement>("slider-temp").addEventListener("input", onSlider);
  byId<HTMLInputElement>("slider-wind").addEventListener("input", onSlider);

  const horizon = byId<HTMLSelectElement>("horizon");
  horizon.addEventListener("change", () => {
    if (!state) return;
    state = clampState({ ...state, horizonDays: Number(horizon.value) });
    void refreshBaseline();
  });
  const strategy = byId<HTMLSelectElement>("strategy");
  strategy.addEventListener("change", () => {
    if (!state) return;
    state = { ...state, strategy: strategy.value === "direct" ? "direct" : "recursive" };
    void refreshBaseline();
  });
}

async function init(): Promise<void> {
  wireControls();
  const zones = await loadOverview();
  if (zones.length > 0 && zones[0]) await selectZone(zones[0]);
}

void init();
