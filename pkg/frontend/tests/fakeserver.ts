// In-process stand-in for the model service, implementing the same JSON
// contract: raw-scale inputs, stored normalization, a real (tiny) network
// forward pass, and a grid-search "optimizer" for /api/control.

import { FetchLike } from "../src/api.js";
import { ScenarioFeatures, VariableName, VARIABLE_NAMES } from "../src/types.js";

const BOUNDS: Record<VariableName, [number, number]> = {
  democracy: [-10, 10],
  allies: [0, 1],
  contingency: [0, 1],
  distance: [2.0, 4.3],
  capability: [0, 3],
  dependency: [0, 0.4],
  major_power: [0, 1],
};

// 7 -> 3 tanh -> logistic, weights fixed so that autocracy, low dependency,
// high capability asymmetry, and contiguity raise the conflict probability.
const W1 = [
  [-1.6, -0.7, 0.9, -0.5, 1.4, -1.8, 0.4],
  [-0.8, -1.1, 0.5, -0.9, 0.8, -0.6, 0.6],
  [0.7, 0.2, -0.3, 0.4, -1.0, 1.2, -0.2],
];
const B1 = [0.3, -0.1, 0.2];
const W2 = [1.9, 1.3, -1.5];
const B2 = -0.15;

const CONTROLLABLE: VariableName[] = ["democracy", "allies", "capability", "dependency"];

function normalizeRow(features: ScenarioFeatures): number[] {
  return VARIABLE_NAMES.map((name) => {
    const [lo, hi] = BOUNDS[name];
    return Math.min(1, Math.max(0, (features[name] - lo) / (hi - lo)));
  });
}

function denormalizeRow(x: number[]): ScenarioFeatures {
  const out = {} as ScenarioFeatures;
  VARIABLE_NAMES.forEach((name, i) => {
    const [lo, hi] = BOUNDS[name];
    out[name] = lo + x[i] * (hi - lo);
  });
  return out;
}

export function forward(x: number[]): number {
  let a2 = B2;
  for (let j = 0; j < W1.length; j++) {
    let a1 = B1[j];
    for (let i = 0; i < x.length; i++) {
      a1 += W1[j][i] * x[i];
    }
    a2 += W2[j] * Math.tanh(a1);
  }
  return 1 / (1 + Math.exp(-a2));
}

export function predictRaw(features: ScenarioFeatures): number {
  return forward(normalizeRow(features));
}

function gridControl(
  x0: number[],
  columns: number[],
  points = 13,
): { x: number[]; p: number } {
  let best = { x: x0.slice(), p: forward(x0) };
  const grid = Array.from({ length: points }, (_, i) => i / (points - 1));
  const walk = (x: number[], depth: number) => {
    if (depth === columns.length) {
      const p = forward(x);
      if (p < best.p) {
        best = { x: x.slice(), p };
      }
      return;
    }
    for (const v of grid) {
      x[columns[depth]] = v;
      walk(x, depth + 1);
    }
  };
  walk(x0.slice(), 0);
  return best;
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function makeFakeFetch(): FetchLike & { calls: string[] } {
  const handler = (async (input: string, init?: RequestInit) => {
    handler.calls.push(input);
    const url = new URL(input);
    const body = init?.body ? JSON.parse(init.body as string) : null;

    if (url.pathname === "/api/predict") {
      for (const name of VARIABLE_NAMES) {
        if (typeof body[name] !== "number") {
          return json({ errors: [{ field: name, message: "missing" }] }, 400);
        }
      }
      if (body.democracy < -10 || body.democracy > 10) {
        return json({ errors: [{ field: "democracy", message: "out of range" }] }, 400);
      }
      return json({ p_conflict: predictRaw(body) });
    }

    if (url.pathname === "/api/control") {
      const x0 = normalizeRow(body);
      const pBefore = forward(x0);
      const threshold = body.threshold ?? 0.5;
      if (pBefore < threshold) {
        return json({
          p_before: pBefore,
          p_after: pBefore,
          success: true,
          adjusted: denormalizeRow(x0),
          evaluations: 0,
          rounded_allies_variant: null,
        });
      }
      const columns =
        body.strategy === "multi"
          ? CONTROLLABLE.map((n) => VARIABLE_NAMES.indexOf(n))
          : [VARIABLE_NAMES.indexOf(body.strategy.split(":")[1] as VariableName)];
      const best = gridControl(x0, columns);
      const alliesCol = VARIABLE_NAMES.indexOf("allies");
      const touchedAllies = columns.includes(alliesCol);
      let variant = null;
      if (touchedAllies) {
        const rounded = best.x.slice();
        rounded[alliesCol] = rounded[alliesCol] >= 0.5 ? 1 : 0;
        const pRounded = forward(rounded);
        variant = {
          adjusted: denormalizeRow(rounded),
          p_after: pRounded,
          success: pRounded < threshold,
        };
      }
      return json({
        p_before: pBefore,
        p_after: best.p,
        success: best.p < threshold,
        adjusted: denormalizeRow(best.x),
        evaluations: 0,
        rounded_allies_variant: variant,
      });
    }

    if (url.pathname === "/api/ard") {
      const relevances = VARIABLE_NAMES.map((variable, i) => ({
        variable,
        relevance: 1 / (i + 1),
      }));
      const total = relevances.reduce((s, e) => s + e.relevance, 0);
      return json({
        relevances: relevances.map((e) => ({ ...e, normalized: e.relevance / total })),
      });
    }

    if (url.pathname === "/api/model") {
      return json({
        method: "hmc",
        architecture: { d: 7, M: 3, K: 1, f_inner: "tanh", f_outer: "logistic" },
        metadata: {},
      });
    }

    return json({ detail: "not found" }, 404);
  }) as FetchLike & { calls: string[] };
  handler.calls = [];
  return handler;
}
