export const VARIABLE_NAMES = [
  "democracy",
  "allies",
  "contingency",
  "distance",
  "capability",
  "dependency",
  "major_power",
] as const;

export type VariableName = (typeof VARIABLE_NAMES)[number];

export type ScenarioFeatures = Record<VariableName, number>;

export const CONTROLLABLE: readonly VariableName[] = [
  "democracy",
  "allies",
  "capability",
  "dependency",
];

export const BINARY: readonly VariableName[] = ["allies", "contingency", "major_power"];

export interface PredictResponse {
  p_conflict: number;
}

export interface RoundedAlliesVariant {
  adjusted: ScenarioFeatures;
  p_after: number;
  success: boolean;
}

export interface ControlResponse {
  p_before: number;
  p_after: number;
  success: boolean;
  adjusted: ScenarioFeatures;
  evaluations: number;
  rounded_allies_variant: RoundedAlliesVariant | null;
  diagnostics?: string;
}

export interface ArdEntry {
  variable: VariableName;
  relevance: number;
  normalized: number;
}

export interface ModelInfo {
  method: "gaussian" | "hmc";
  architecture: {
    d: number;
    M: number;
    K: number;
    f_inner: string;
    f_outer: string;
  };
  metadata: Record<string, unknown>;
}

export type Strategy =
  | "multi"
  | `single:${"democracy" | "allies" | "capability" | "dependency"}`;
