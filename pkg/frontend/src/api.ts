import type {
  ErrorPayload,
  ForecastPayload,
  WhatIfPayload,
  WhatIfRequest,
  ZonesPayload,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly payload: ErrorPayload | null,
  ) {
    super(payload?.error ?? `service responded with ${status}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(base + path, init);
  } catch (err) {
    throw new ServiceError(0, { schema: "error.v1", error: `service unreachable: ${err}` });
  }
  const body = (await resp.json().catch(() => null)) as T | ErrorPayload | null;
  if (!resp.ok) {
    throw new ServiceError(resp.status, body as ErrorPayload | null);
  }
  return body as T;
}

/** Thin typed client; the dashboard computes nothing the service already returns. */
export class ApiClient {
  constructor(readonly base: string = "") {}

  getZones(): Promise<ZonesPayload> {
    return request<ZonesPayload>(this.base, "/zones");
  }

  getForecast(zoneId: string, horizon: string, strategy: string): Promise<ForecastPayload> {
    const q = new URLSearchParams({ h: horizon, strategy });
    return request<ForecastPayload>(
      this.base,
      `/zones/${encodeURIComponent(zoneId)}/forecast?${q.toString()}`,
    );
  }

  postWhatIf(req: WhatIfRequest): Promise<WhatIfPayload> {
    return request<WhatIfPayload>(this.base, "/whatif", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
