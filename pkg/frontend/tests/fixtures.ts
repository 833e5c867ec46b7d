import type {
  ForecastBody,
  ForecastPayload,
  RiskCategory,
  WhatIfPayload,
} from "../src/types.js";

export function forecastBody(
  predictions: number[],
  categories: RiskCategory[] = [],
  startHour = 0,
): ForecastBody {
  const stamp = (i: number) =>
    `2021-06-30T${String((startHour + i) % 24).padStart(2, "0")}:00:00+02:00`;
  return {
    origin: "2021-06-29T23:00:00+02:00",
    strategy: "recursive",
    steps: predictions.map((p, i) => ({ timestamp: stamp(i), prediction: p, raw: p })),
    daily: [{ date: "2021-06-30", total: predictions.reduce((a, b) => a + b, 0), steps: predictions.length }],
    risk: predictions.map((_, i) => ({
      timestamp: stamp(i),
      category: categories[i] ?? "low",
      crowding_band: "moderate",
      percentile: 55,
      aggravation: 0.1,
      explanation: ["crowding moderate (percentile 55.0)"],
    })),
  };
}

export function forecastPayload(
  zoneId: string,
  predictions: number[],
  categories: RiskCategory[] = [],
): ForecastPayload {
  return { schema: "forecast.v1", zone_id: zoneId, ...forecastBody(predictions, categories) };
}

export function whatifPayload(
  zoneId: string,
  dailyDeltas: number[],
  baselinePreds: number[] = [100, 110],
  scenarioPreds: number[] = [101, 111],
): WhatIfPayload {
  return {
    schema: "whatif.v1",
    zone_id: zoneId,
    baseline: forecastBody(baselinePreds),
    scenario: forecastBody(scenarioPreds),
    deltas: {
      steps: scenarioPreds.map((p, i) => ({
        timestamp: `2021-06-30T0${i}:00:00+02:00`,
        delta: p - (baselinePreds[i] ?? 0),
        raw_delta: p - (baselinePreds[i] ?? 0),
      })),
      daily: dailyDeltas.map((d, i) => ({ date: `2021-07-0${i + 1}`, delta: d })),
      risk: [],
    },
  };
}
