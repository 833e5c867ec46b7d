import { RISK_ORDER, riskColor } from "./colors.js";
import { formatTimestamp, formatVisitors } from "./format.js";
import type { ForecastPayload, RiskCategory } from "./types.js";

export interface OverviewCard {
  zoneId: string;
  category: RiskCategory;
  peakValue: number;
  peakTimestamp: string;
  dailyTotals: number[];
}

/**
 * One card per zone from its forecast payload. The "current" category is the
 * first forecast step's assessment; the peak is the largest predicted step.
 */
export function buildCard(forecast: ForecastPayload): OverviewCard {
  const firstRisk = forecast.risk[0];
  if (!firstRisk) throw new Error(`forecast for ${forecast.zone_id} carries no risk entries`);
  let peak = forecast.steps[0];
  if (!peak) throw new Error(`forecast for ${forecast.zone_id} has no steps`);
  for (const step of forecast.steps) {
    if (step.prediction > peak.prediction) peak = step;
  }
  return {
    zoneId: forecast.zone_id,
    category: firstRisk.category,
    peakValue: peak.prediction,
    peakTimestamp: peak.timestamp,
    dailyTotals: forecast.daily.map((d) => d.total),
  };
}

/** Highest risk first, then alphabetical for a stable grid. */
export function sortCards(cards: OverviewCard[]): OverviewCard[] {
  return [...cards].sort((a, b) => {
    const byRisk = RISK_ORDER[b.category] - RISK_ORDER[a.category];
    return byRisk !== 0 ? byRisk : a.zoneId.localeCompare(b.zoneId);
  });
}

function sparklinePoints(values: number[], width: number, height: number): string {
  if (values.length === 0) return "";
  const max = Math.max(...values, 1);
  const min = Math.min(...values, 0);
  const span = max - min || 1;
  const dx = values.length > 1 ? width / (values.length - 1) : 0;
  return values
    .map((v, i) => `${(i * dx).toFixed(1)},${(height - ((v - min) / span) * height).toFixed(1)}`)
    .join(" ");
}

export function renderCardHTML(card: OverviewCard): string {
  const color = riskColor(card.category);
  const spark = sparklinePoints(card.dailyTotals, 120, 28);
  return `
  <article class="zone-card" data-zone="${card.zoneId}" data-category="${card.category}">
    <header>
      <h3>${card.zoneId}</h3>
      <span class="risk-badge" style="background:${color}">${card.category}</span>
    </header>
    <p class="peak">peak ${formatVisitors(card.peakValue)} · ${formatTimestamp(card.peakTimestamp)}</p>
    <svg class="sparkline" viewBox="0 0 120 28" preserveAspectRatio="none">
      <polyline points="${spark}" fill="none" stroke="${color}" stroke-width="1.5"/>
    </svg>
  </article>`;
}

export function renderOverviewHTML(cards: OverviewCard[]): string {
  if (cards.length === 0) {
    return `<p class="empty-state">No zones available. Is the service running with trained models?</p>`;
  }
  return sortCards(cards).map(renderCardHTML).join("\n");
}

/** Explicit degraded state: never show stale cards as fresh. */
export function renderDegradedHTML(message: string): string {
  return `<p class="degraded-state">Service unreachable: ${message}</p>`;
}
