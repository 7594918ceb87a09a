/** The console controller: wires API calls to state transitions.
 *
 * The browser layer and the scripted tests both drive this class; it owns no
 * DOM. Each mutation refreshes the diagnosis so the rendered state always
 * equals the latest server report.
 */

import { ApiClient } from "./api.js";
import { renderGraphSvg } from "./graph.js";
import { renderBanner, renderCausePanel, renderHistory, renderObservationLog } from "./panels.js";
import {
  SessionState,
  applyConflict,
  applyContradiction,
  applyObservations,
  applyReport,
  initialState,
} from "./state.js";
import { ApiError, ConflictInfo, ContradictionInfo, ModelSummary, Status } from "./types.js";

export interface ConsoleView {
  banner: string;
  graphSvg: string;
  causePanel: string;
  observationLog: string;
  history: string;
}

export class Console {
  state: SessionState = initialState();

  constructor(
    private readonly api: ApiClient,
    private readonly k: number = 1,
  ) {}

  async uploadModel(dsl: string): Promise<ModelSummary> {
    const summary = await this.api.uploadModel(dsl);
    return summary;
  }

  async openSession(modelId: string): Promise<void> {
    const graph = await this.api.modelGraph(modelId);
    const session = await this.api.createSession(modelId);
    this.state = {
      ...initialState(),
      modelId,
      sessionId: session.sessionId,
      graph,
    };
    await this.refresh();
  }

  /** Reattach to an existing session, e.g. after a page reload. */
  async attachSession(sessionId: string): Promise<void> {
    const detail = await this.api.sessionDetail(sessionId);
    const graph = await this.api.modelGraph(detail.modelId);
    this.state = {
      ...initialState(),
      modelId: detail.modelId,
      sessionId,
      graph,
      observations: detail.observations,
      history: detail.reports,
      report: detail.reports.at(-1) ?? null,
    };
    await this.refresh();
  }

  async submitObservation(component: string, status: Status): Promise<void> {
    if (!this.state.sessionId) {
      throw new Error("no active session");
    }
    try {
      const log = await this.api.postObservations(this.state.sessionId, [
        { component, status, source: "manual" },
      ]);
      this.state = applyObservations(this.state, log.observations);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state = applyConflict(this.state, err.body.conflict as unknown as ConflictInfo);
        return; // rejected: no state change, no refresh
      }
      if (err instanceof ApiError && err.status === 404) {
        this.state = { ...this.state, sessionExpired: true };
        return;
      }
      this.state = { ...this.state, error: String(err instanceof Error ? err.message : err) };
      return;
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.state.sessionId) {
      return;
    }
    try {
      const report = await this.api.diagnosis(this.state.sessionId, this.k);
      this.state = applyReport(this.state, report);
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.state = applyContradiction(this.state, err.body as unknown as ContradictionInfo);
        return;
      }
      if (err instanceof ApiError && err.status === 404) {
        this.state = { ...this.state, sessionExpired: true };
        return;
      }
      this.state = { ...this.state, error: String(err instanceof Error ? err.message : err) };
    }
  }

  /** The full rendered console; every number shown comes from a server field. */
  view(): ConsoleView {
    return {
      banner: renderBanner(this.state),
      graphSvg: renderGraphSvg(this.state),
      causePanel: renderCausePanel(this.state),
      observationLog: renderObservationLog(this.state),
      history: renderHistory(this.state),
    };
  }

  /** Round-trip check: local log equals the server log after normalization. */
  async observationsMatchServer(): Promise<boolean> {
    if (!this.state.sessionId) {
      return false;
    }
    const detail = await this.api.sessionDetail(this.state.sessionId);
    return JSON.stringify(detail.observations) === JSON.stringify(this.state.observations);
  }
}
