import type { WeatherOverride, WhatIfPayload, WhatIfRequest } from "./types.js";

export interface WhatIfApi {
  postWhatIf(req: WhatIfRequest): Promise<WhatIfPayload>;
}

/** Slider state for one zone's what-if panel. */
export interface ZoneViewState {
  zoneId: string;
  horizonDays: number; // 1..10, default 6 (weekly planning cadence)
  strategy: "recursive" | "direct";
  tempDeltaC: number;
  windDeltaMs: number;
  precipProbPct: number | null; // replacement, null = leave forecast as-is
  cloudiness: number | null;
}

export function initialState(zoneId: string): ZoneViewState {
  return {
    zoneId,
    horizonDays: 6,
    strategy: "recursive",
    tempDeltaC: 0,
    windDeltaMs: 0,
    precipProbPct: null,
    cloudiness: null,
  };
}

export function clampState(state: ZoneViewState): ZoneViewState {
  return {
    ...state,
    horizonDays: Math.min(10, Math.max(1, Math.round(state.horizonDays))),
    tempDeltaC: Math.min(15, Math.max(-15, state.tempDeltaC)),
    windDeltaMs: Math.min(20, Math.max(-20, state.windDeltaMs)),
    precipProbPct:
      state.precipProbPct === null ? null : Math.min(100, Math.max(0, state.precipProbPct)),
    cloudiness: state.cloudiness === null ? null : Math.min(8, Math.max(0, state.cloudiness)),
  };
}

export function hasOverrides(state: ZoneViewState): boolean {
  return (
    state.tempDeltaC !== 0 ||
    state.windDeltaMs !== 0 ||
    state.precipProbPct !== null ||
    state.cloudiness !== null
  );
}

/** Translate slider state into the service's override list. */
export function buildWhatIfRequest(state: ZoneViewState): WhatIfRequest {
  const add: Record<string, number> = {};
  const set: Record<string, number> = {};
  if (state.tempDeltaC !== 0) add["temp_c"] = state.tempDeltaC;
  if (state.windDeltaMs !== 0) add["windspeed_ms"] = state.windDeltaMs;
  if (state.precipProbPct !== null) set["precip_prob_pct"] = state.precipProbPct;
  if (state.cloudiness !== null) set["cloudiness"] = state.cloudiness;
  const override: WeatherOverride = { steps: "all" };
  if (Object.keys(add).length) override.add = add;
  if (Object.keys(set).length) override.set = set;
  const overrides = Object.keys(add).length || Object.keys(set).length ? [override] : [];
  return {
    zone_id: state.zoneId,
    horizon: `${state.horizonDays}d`,
    overrides,
  };
}

/** Mean of the per-day deltas reported by the service (display only). */
export function meanDailyDelta(payload: WhatIfPayload): number {
  const deltas = payload.deltas.daily;
  if (deltas.length === 0) return 0;
  return deltas.reduce((acc, d) => acc + d.delta, 0) / deltas.length;
}

export function riskChangedSteps(payload: WhatIfPayload): number {
  return payload.deltas.risk.filter((r) => r.changed).length;
}

/**
 * Serialized what-if execution with last-writer-wins rendering: responses for
 * anything but the newest request are dropped, so a slider drag ends in
 * exactly one render matching the final position.
 */
export class WhatIfRunner {
  private seq = 0;

  constructor(
    private readonly api: WhatIfApi,
    private readonly render: (payload: WhatIfPayload) => void,
    private readonly onError: (err: unknown) => void = () => {},
  ) {}

  run(state: ZoneViewState): Promise<void> {
    const ticket = ++this.seq;
    return this.api
      .postWhatIf(buildWhatIfRequest(state))
      .then((payload) => {
        if (ticket === this.seq) this.render(payload);
      })
      .catch((err) => {
        if (ticket === this.seq) this.onError(err);
      });
  }
}
