/** Session state and the derived view model.
 *
 * Everything shown is taken verbatim from server responses: node statuses
 * come from the latest report plus the observation log, never from any
 * client-side inference.
 */

import {
  ConflictInfo,
  ContradictionInfo,
  Diagnosis,
  GraphDocument,
  ObservationOut,
  Status,
} from "./types.js";

export type NodeStatus =
  | "observed-available"
  | "observed-unavailable"
  | "derived-available"
  | "derived-unavailable"
  | "unknown";

export interface NodeView {
  id: string;
  status: NodeStatus;
  causeRisks: string[]; // proposed-cause badge contents
}

export interface SessionState {
  modelId: string | null;
  sessionId: string | null;
  graph: GraphDocument | null;
  observations: ObservationOut[];
  report: Diagnosis | null;
  history: Diagnosis[];
  contradiction: ContradictionInfo | null;
  conflict: ConflictInfo | null;
  sessionExpired: boolean;
  error: string | null;
}

export function initialState(): SessionState {
  return {
    modelId: null,
    sessionId: null,
    graph: null,
    observations: [],
    report: null,
    history: [],
    contradiction: null,
    conflict: null,
    sessionExpired: false,
    error: null,
  };
}

export function applyReport(state: SessionState, report: Diagnosis): SessionState {
  return {
    ...state,
    report,
    history: [...state.history, report],
    contradiction: null,
    conflict: null,
    error: null,
  };
}

export function applyObservations(state: SessionState, observations: ObservationOut[]): SessionState {
  return { ...state, observations, conflict: null, error: null };
}

export function applyConflict(state: SessionState, conflict: ConflictInfo): SessionState {
  return { ...state, conflict };
}

export function applyContradiction(state: SessionState, info: ContradictionInfo): SessionState {
  return { ...state, contradiction: info, report: null };
}

export function observedStatuses(state: SessionState): Map<string, Status> {
  const map = new Map<string, Status>();
  for (const o of state.observations) {
    map.set(o.component, o.status);
  }
  return map;
}

export function nodeViews(state: SessionState): NodeView[] {
  if (!state.graph) {
    return [];
  }
  const observed = observedStatuses(state);
  const derivedDown = new Set(state.report?.derivedUnavailable ?? []);
  const derivedUp = new Set(state.report?.derivedAvailable ?? []);
  const badges = new Map<string, string[]>();
  for (const cause of state.report?.causes ?? []) {
    const risks = badges.get(cause.component) ?? [];
    risks.push(cause.risk);
    badges.set(cause.component, risks);
  }
  return state.graph.nodes.map((node) => {
    const seen = observed.get(node.id);
    let status: NodeStatus = "unknown";
    if (seen === "available") {
      status = "observed-available";
    } else if (seen === "unavailable") {
      status = "observed-unavailable";
    } else if (derivedDown.has(node.id)) {
      status = "derived-unavailable";
    } else if (derivedUp.has(node.id)) {
      status = "derived-available";
    }
    return { id: node.id, status, causeRisks: badges.get(node.id) ?? [] };
  });
}

/** Edges on explanation chains of the latest report, keyed "from->to". */
export function chainEdgeKeys(state: SessionState): Set<string> {
  const keys = new Set<string>();
  for (const explanation of state.report?.explanations ?? []) {
    for (const chain of explanation.chains) {
      for (const step of chain.steps) {
        keys.add(`${step.from}->${step.to}`);
      }
    }
  }
  return keys;
}
