import { riskColor } from "./colors.js";
import type { ForecastBody, RiskCategory } from "./types.js";

export interface ChartModel {
  baseline: number[];
  scenario: number[] | null;
  riskBands: RiskCategory[];
  labels: string[];
}

export function chartModel(baseline: ForecastBody, scenario: ForecastBody | null): ChartModel {
  return {
    baseline: baseline.steps.map((s) => s.prediction),
    scenario: scenario ? scenario.steps.map((s) => s.prediction) : null,
    riskBands: (scenario ?? baseline).risk.map((r) => r.category),
    labels: baseline.steps.map((s) => s.timestamp),
  };
}

const W = 720;
const H = 220;
const BAND_H = 10;

function polyline(values: number[], max: number, color: string, dash: string): string {
  const dx = values.length > 1 ? W / (values.length - 1) : 0;
  const pts = values
    .map((v, i) => `${(i * dx).toFixed(1)},${(H - (v / max) * (H - 20)).toFixed(1)}`)
    .join(" ");
  return `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="2"${dash}/>`;
}

/**
 * Forecast chart as an SVG string: baseline curve, optional scenario overlay,
 * and a per-step risk band strip along the bottom.
 */
export function renderChartSVG(model: ChartModel): string {
  const all = model.scenario ? model.baseline.concat(model.scenario) : model.baseline;
  const max = Math.max(...all, 1);
  const parts: string[] = [];
  parts.push(
    `<svg class="forecast-chart" viewBox="0 0 ${W} ${H + BAND_H + 2}" preserveAspectRatio="none">`,
  );
  const n = model.riskBands.length;
  if (n > 0) {
    const bw = W / n;
    model.riskBands.forEach((category, i) => {
      parts.push(
        `<rect class="risk-band" x="${(i * bw).toFixed(1)}" y="${H + 2}" width="${bw.toFixed(1)}"` +
          ` height="${BAND_H}" fill="${riskColor(category)}"><title>${category}</title></rect>`,
      );
    });
  }
  parts.push(polyline(model.baseline, max, "#35507a", ""));
  if (model.scenario) {
    parts.push(polyline(model.scenario, max, "#c62878", ' stroke-dasharray="6 3"'));
  }
  parts.push("</svg>");
  return parts.join("\n");
}
