/** Number/label helpers; every value formatted here comes from a service field. */

export function formatVisitors(value: number): string {
  return Math.round(value).toLocaleString("en-US");
}

/** Signed per-day delta label, e.g. "+225 visitors/day". */
export function formatDailyDelta(delta: number): string {
  const rounded = Math.round(delta);
  const sign = rounded > 0 ? "+" : rounded < 0 ? "−" : "±";
  return `${sign}${Math.abs(rounded).toLocaleString("en-US")} visitors/day`;
}

export function formatPercentile(p: number): string {
  return `${p.toFixed(0)}th pct`;
}

/** "2021-06-30T14:00:00+02:00" -> "Jun 30 14:00" (wall clock as sent). */
export function formatTimestamp(iso: string): string {
  const [datePart, timePart] = iso.split("T");
  if (!datePart || !timePart) return iso;
  const [y, m, d] = datePart.split("-").map(Number);
  const months = ["Jan", "Feb", "Mar", "Apr", "May", "Jun",
                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];
  if (!y || !m || !d) return iso;
  return `${months[m - 1]} ${d} ${timePart.slice(0, 5)}`;
}

export function formatDate(isoDate: string): string {
  return formatTimestamp(`${isoDate}T00:00`).slice(0, -6);
}
