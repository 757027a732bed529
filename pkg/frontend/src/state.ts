// Scenario store: the current feature values, the live prediction, the last
// intervention, and the relevance bars.  Pure of DOM concerns so it can be
// tested headlessly.

import { ApiClient } from "./api.js";
import {
  ArdEntry,
  ControlResponse,
  ScenarioFeatures,
  Strategy,
  VariableName,
} from "./types.js";
import { validateFeatures, validateValue } from "./validate.js";

export const DEFAULT_SCENARIO: ScenarioFeatures = {
  democracy: -5,
  allies: 0,
  contingency: 1,
  distance: 2.5,
  capability: 2.0,
  dependency: 0.01,
  major_power: 1,
};

export interface ScenarioState {
  features: ScenarioFeatures;
  pConflict: number | null;
  stale: boolean;
  serviceError: string | null;
  fieldError: string | null;
  strategy: Strategy;
  outcome: ControlResponse | null;
  controlling: boolean;
  ard: ArdEntry[] | null;
  threshold: number;
}

type Listener = (state: ScenarioState) => void;

export class ScenarioStore {
  private state: ScenarioState = {
    features: { ...DEFAULT_SCENARIO },
    pConflict: null,
    stale: false,
    serviceError: null,
    fieldError: null,
    strategy: "multi",
    outcome: null,
    controlling: false,
    ard: null,
    threshold: 0.5,
  };

  private listeners: Listener[] = [];
  private debounceHandle: ReturnType<typeof setTimeout> | null = null;
  private predictSequence = 0;

  constructor(
    private readonly client: ApiClient,
    private readonly debounceMs = 150,
  ) {}

  snapshot(): ScenarioState {
    return {
      ...this.state,
      features: { ...this.state.features },
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) {
      listener(snap);
    }
  }

  /** Change one variable; rejects out-of-range values without touching the service. */
  setFeature(name: VariableName, value: number): boolean {
    const problem = validateValue(name, value);
    if (problem !== null) {
      this.state.fieldError = problem;
      this.emit();
      return false;
    }
    this.state.fieldError = null;
    this.state.features[name] = value;
    this.emit();
    this.schedulePredict();
    return true;
  }

  setStrategy(strategy: Strategy): void {
    this.state.strategy = strategy;
    this.emit();
  }

  private schedulePredict(): void {
    if (this.debounceHandle !== null) {
      clearTimeout(this.debounceHandle);
    }
    this.debounceHandle = setTimeout(() => {
      void this.predictNow();
    }, this.debounceMs);
  }

  async predictNow(): Promise<number | null> {
    const problems = validateFeatures(this.state.features);
    if (problems.length > 0) {
      this.state.fieldError = problems.join("; ");
      this.emit();
      return null;
    }
    const ticket = ++this.predictSequence;
    try {
      const response = await this.client.predict({ ...this.state.features });
      if (ticket !== this.predictSequence) {
        return null; // a newer request superseded this one
      }
      this.state.pConflict = response.p_conflict;
      this.state.stale = false;
      this.state.serviceError = null;
      this.emit();
      return response.p_conflict;
    } catch (err) {
      if ((err as Error).name === "AbortError") {
        return null;
      }
      this.state.serviceError = (err as Error).message;
      this.state.stale = this.state.pConflict !== null;
      this.emit();
      return null;
    }
  }

  async requestIntervention(seed = 0): Promise<ControlResponse | null> {
    this.state.controlling = true;
    this.emit();
    try {
      const outcome = await this.client.control(
        { ...this.state.features },
        this.state.strategy,
        this.state.threshold,
        seed,
      );
      this.state.outcome = outcome;
      this.state.serviceError = null;
      return outcome;
    } catch (err) {
      this.state.serviceError = (err as Error).message;
      this.state.outcome = null;
      return null;
    } finally {
      this.state.controlling = false;
      this.emit();
    }
  }

  /** Adopt the last intervention's adjusted values as the current scenario. */
  async applyIntervention(): Promise<number | null> {
    if (this.state.outcome === null) {
      return null;
    }
    this.state.features = { ...this.state.outcome.adjusted };
    this.state.fieldError = null;
    this.emit();
    return this.predictNow();
  }

  async loadArd(): Promise<void> {
    try {
      this.state.ard = await this.client.ard();
      this.emit();
    } catch {
      this.state.ard = null; // model without per-input groups; hide the panel
      this.emit();
    }
  }
}
