// Client-side range checks mirroring the service's validation, so the UI
// never sends an out-of-range scenario.

import { BINARY, ScenarioFeatures, VariableName, VARIABLE_NAMES } from "./types.js";

export interface RangeSpec {
  min?: number;
  max?: number;
  binary?: boolean;
}

export const RANGES: Record<VariableName, RangeSpec> = {
  democracy: { min: -10, max: 10 },
  allies: { binary: true },
  contingency: { binary: true },
  distance: {},
  capability: {},
  dependency: { min: 0 },
  major_power: { binary: true },
};

export function validateValue(name: VariableName, value: number): string | null {
  if (!Number.isFinite(value)) {
    return `${name} must be a finite number`;
  }
  const spec = RANGES[name];
  if (spec.binary && value !== 0 && value !== 1) {
    return `${name} must be 0 or 1`;
  }
  if (spec.min !== undefined && value < spec.min) {
    return `${name} must be >= ${spec.min}`;
  }
  if (spec.max !== undefined && value > spec.max) {
    return `${name} must be <= ${spec.max}`;
  }
  return null;
}

export function validateFeatures(features: ScenarioFeatures): string[] {
  const problems: string[] = [];
  for (const name of VARIABLE_NAMES) {
    const err = validateValue(name, features[name]);
    if (err !== null) {
      problems.push(err);
    }
  }
  return problems;
}

export function isBinary(name: VariableName): boolean {
  return BINARY.includes(name);
}
