/** Wire types mirrored from the service's versioned JSON schemas. */

export type RiskCategory = "low" | "elevated" | "high" | "critical";

export interface ZoneInfo {
  zone_id: string;
  active_version: string | null;
  kind: string | null;
}

export interface ZonesPayload {
  schema: "zones.v1";
  zones: ZoneInfo[];
}

export interface ForecastStep {
  timestamp: string;
  prediction: number;
  raw: number;
}

export interface DailyTotal {
  date: string;
  total: number;
  steps: number;
}

export interface RiskEntry {
  timestamp: string;
  category: RiskCategory;
  crowding_band: string;
  percentile: number;
  aggravation: number;
  explanation: string[];
}

export interface ForecastBody {
  origin: string;
  strategy: string;
  steps: ForecastStep[];
  daily: DailyTotal[];
  risk: RiskEntry[];
}

export interface ForecastPayload extends ForecastBody {
  schema: "forecast.v1";
  zone_id: string;
}

export interface StepDelta {
  timestamp: string;
  delta: number;
  raw_delta: number;
}

export interface DailyDelta {
  date: string;
  delta: number;
}

export interface RiskChange {
  timestamp: string;
  baseline: RiskCategory;
  scenario: RiskCategory;
  changed: boolean;
}

export interface WhatIfPayload {
  schema: "whatif.v1";
  zone_id: string;
  baseline: ForecastBody;
  scenario: ForecastBody;
  deltas: { steps: StepDelta[]; daily: DailyDelta[]; risk: RiskChange[] };
}

export interface WeatherOverride {
  steps: "all" | number[];
  add?: Record<string, number>;
  set?: Record<string, number>;
}

export interface WhatIfRequest {
  zone_id: string;
  horizon: string;
  overrides: WeatherOverride[];
}

export interface ErrorPayload {
  schema: "error.v1";
  error: string;
  zones?: string[];
}
