/**
 * Solve coordination for a device view.
 *
 * At most one solve per device is live at a time: submitting again while an
 * earlier request is in flight supersedes it, and the superseded response is
 * dropped on arrival (never rendered, never recorded). History only ever
 * sees requests whose outcome was actually shown.
 */

import type { CsxClient, SolveRequest, SolveResponse } from "./api.js";
import type { ExplorationHistory } from "./history.js";

export class SolveCoordinator {
  private tickets = 0;
  private readonly inflight = new Map<string, number>();

  constructor(
    private readonly client: CsxClient,
    private readonly history: ExplorationHistory,
  ) {}

  /** True while a solve for this device has not settled or been superseded. */
  busy(device: string): boolean {
    return this.inflight.has(device);
  }

  /**
   * Run one solve. Resolves to the response, or null if a newer submission
   * for the same device superseded this one while it was in flight.
   */
  async solve(
    workspaceId: string,
    req: SolveRequest,
  ): Promise<SolveResponse | null> {
    const ticket = ++this.tickets;
    this.inflight.set(req.device, ticket);
    let res: SolveResponse;
    try {
      res = await this.client.solve(workspaceId, req);
    } catch (err) {
      if (this.inflight.get(req.device) === ticket) {
        this.inflight.delete(req.device);
        throw err;
      }
      return null; // superseded; a stale failure is not this view's problem
    }
    if (this.inflight.get(req.device) !== ticket) {
      return null; // a newer request owns this view now
    }
    this.inflight.delete(req.device);
    this.history.record(req, res);
    return res;
  }
}
