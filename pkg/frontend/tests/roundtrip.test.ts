// The round-trip contract: adopting a successful intervention as the current
// scenario and re-predicting must reproduce the reported p_after within 1e-9,
// and out-of-range edits must be rejected client-side without touching the
// service.
//
// Runs against the in-process contract fake by default; set API_BASE to a
// live service URL to exercise the real backend with the same flow.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ScenarioStore } from "../src/state.js";
import { ScenarioFeatures } from "../src/types.js";
import { makeFakeFetch } from "./fakeserver.js";

const RISKY: ScenarioFeatures = {
  democracy: -9,
  allies: 0,
  contingency: 1,
  distance: 2.2,
  capability: 2.7,
  dependency: 0.002,
  major_power: 1,
};

function riskyStore(client: ApiClient): ScenarioStore {
  const store = new ScenarioStore(client, 0);
  for (const [name, value] of Object.entries(RISKY)) {
    store.setFeature(name as keyof ScenarioFeatures, value);
  }
  return store;
}

async function roundTrip(client: ApiClient) {
  const store = riskyStore(client);
  const pBefore = await store.predictNow();
  expect(pBefore).not.toBeNull();
  expect(pBefore!).toBeGreaterThanOrEqual(0.5);

  const outcome = await store.requestIntervention();
  expect(outcome).not.toBeNull();
  expect(outcome!.success).toBe(true);
  expect(outcome!.p_after).toBeLessThan(0.5);

  const reproduced = await store.applyIntervention();
  expect(reproduced).not.toBeNull();
  expect(Math.abs(reproduced! - outcome!.p_after)).toBeLessThanOrEqual(1e-9);

  // the gauge now sits below the threshold marker
  expect(store.snapshot().pConflict!).toBeLessThan(store.snapshot().threshold);
}

describe("intervention round trip (contract fake)", () => {
  it("re-predicting the adopted scenario reproduces p_after within 1e-9", async () => {
    await roundTrip(new ApiClient("http://fake", makeFakeFetch()));
  });

  it("multi-strategy deltas are confined to the four controllables", async () => {
    const client = new ApiClient("http://fake", makeFakeFetch());
    const store = riskyStore(client);
    await store.predictNow();
    const outcome = await store.requestIntervention();
    for (const name of ["contingency", "distance", "major_power"] as const) {
      expect(Math.abs(outcome!.adjusted[name] - RISKY[name])).toBeLessThan(1e-9);
    }
  });

  it("peace-predicted scenarios come back as no-ops", async () => {
    const client = new ApiClient("http://fake", makeFakeFetch());
    const store = new ScenarioStore(client, 0);
    store.setFeature("democracy", 9);
    store.setFeature("allies", 1);
    store.setFeature("dependency", 0.35);
    store.setFeature("capability", 0.1);
    store.setFeature("contingency", 0);
    store.setFeature("major_power", 0);
    await store.predictNow();
    const outcome = await store.requestIntervention();
    expect(outcome!.success).toBe(true);
    expect(outcome!.evaluations).toBe(0);
    expect(outcome!.adjusted).toEqual(store.snapshot().features);
  });
});

describe("client-side validation", () => {
  it("rejects out-of-range edits without calling the service", () => {
    const fetchImpl = makeFakeFetch();
    const store = new ScenarioStore(new ApiClient("http://fake", fetchImpl), 0);

    expect(store.setFeature("democracy", 12)).toBe(false);
    expect(store.setFeature("allies", 0.5)).toBe(false);
    expect(store.setFeature("dependency", -1)).toBe(false);

    expect(store.snapshot().fieldError).toMatch(/dependency/);
    expect(store.snapshot().features.democracy).not.toBe(12);
    expect(fetchImpl.calls).toEqual([]);
  });

  it("blocks predictNow when the scenario is invalid", async () => {
    const fetchImpl = makeFakeFetch();
    const store = new ScenarioStore(new ApiClient("http://fake", fetchImpl), 0);
    // bypass setFeature to simulate a corrupted state
    (store as unknown as { state: { features: ScenarioFeatures } }).state.features.democracy = 50;
    const result = await store.predictNow();
    expect(result).toBeNull();
    expect(fetchImpl.calls).toEqual([]);
  });
});

const LIVE = process.env.API_BASE;

describe.skipIf(!LIVE)("intervention round trip (live service)", () => {
  it("reproduces p_after within 1e-9 against the real backend", async () => {
    await roundTrip(new ApiClient(LIVE!));
  }, 120_000);
});
