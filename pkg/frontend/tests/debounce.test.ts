import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("a burst of calls collapses into one trailing call with the last args", () => {
    const calls: number[] = [];
    const run = debounce((v: number) => calls.push(v), 250);
    for (let position = 1; position <= 40; position++) {
      run(position);
      vi.advanceTimersByTime(10); // rapid slider movement, under the wait
    }
    expect(calls).toHaveLength(0);
    vi.advanceTimersByTime(250);
    expect(calls).toEqual([40]); // exactly one render, matching the final position
  });

  it("separate bursts each fire once", () => {
    const calls: string[] = [];
    const run = debounce((v: string) => calls.push(v), 100);
    run("a");
    vi.advanceTimersByTime(150);
    run("b");
    vi.advanceTimersByTime(150);
    expect(calls).toEqual(["a", "b"]);
  });

  it("cancel drops the pending call", () => {
    const calls: number[] = [];
    const run = debounce((v: number) => calls.push(v), 100);
    run(1);
    run.cancel();
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([]);
  });

  it("flush fires the pending call immediately", () => {
    const calls: number[] = [];
    const run = debounce((v: number) => calls.push(v), 100);
    run(7);
    run.flush();
    expect(calls).toEqual([7]);
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([7]); // no double fire
  });
});
