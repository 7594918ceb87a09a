/** Documents exchanged with the diagnosis server; shapes mirror its JSON. */

export interface ModelSummary {
  id: string;
  components: string[];
  risks: string[];
}

export interface GraphRisk {
  risk: string;
  weight: number;
}

export interface GraphNode {
  id: string;
  risks: GraphRisk[];
}

export type EdgeKind = "specific" | "generic" | "redundancy";

export interface GraphEdge {
  source: string;
  target: string;
  kind: EdgeKind;
}

export interface GraphDocument {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export type Status = "available" | "unavailable";

export interface ObservationIn {
  component: string;
  status: Status;
  source?: string;
}

export interface ObservationOut {
  component: string;
  status: Status;
  source: string;
  timestamp: number;
}

export interface Cause {
  component: string;
  risk: string;
}

export interface Alternative {
  causes: Cause[];
  score: number;
}

export interface ChainStep {
  from: string;
  to: string;
  kind: string;
}

export interface Chain {
  observed: string;
  steps: ChainStep[];
}

export interface Explanation {
  cause: Cause;
  derived: boolean;
  chains: Chain[];
}

export interface Diagnosis {
  causes: Cause[];
  derivedUnavailable: string[];
  derivedAvailable: string[];
  score: number;
  alternatives: Alternative[] | null;
  explanations: Explanation[];
}

export interface SessionSummary {
  sessionId: string;
  modelId: string;
}

export interface SessionDetail extends SessionSummary {
  observations: ObservationOut[];
  reports: Diagnosis[];
}

export interface ConflictInfo {
  component: string;
  earlier: { component: string; status: Status };
  later: { component: string; status: Status };
}

export interface ContradictionInfo {
  conflictingObservations: { component: string; status: Status }[];
}

/** Raised by the API client for structured server errors. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: Record<string, unknown>,
  ) {
    super(typeof body.detail === "string" ? body.detail : `server error ${status}`);
  }
}
