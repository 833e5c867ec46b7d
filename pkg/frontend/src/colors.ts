import type { RiskCategory } from "./types.js";

/** Single source of truth for the four risk colors used everywhere in the UI. */
export const RISK_COLORS: Record<RiskCategory, string> = {
  low: "#2e9e4f",
  elevated: "#d8a800",
  high: "#e86a1d",
  critical: "#c62828",
};

export const RISK_ORDER: Record<RiskCategory, number> = {
  low: 0,
  elevated: 1,
  high: 2,
  critical: 3,
};

export function riskColor(category: RiskCategory): string {
  return RISK_COLORS[category];
}
