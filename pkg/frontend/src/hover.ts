/**
 * Hover value queries. Hovering a leaf or typing an ad hoc expression asks
 * the service to evaluate it against the device's last found configuration;
 * ints come back dual-displayed, bools plain, and anything the service
 * cannot determine (nothing solved yet, leaf missing from a partial
 * witness) reads "not determined".
 */

import { ApiError, type CsxClient } from "./api.js";
import { hoverText } from "./units.js";

export async function hoverValue(
  client: CsxClient,
  workspaceId: string,
  device: string,
  expr: string,
): Promise<string> {
  try {
    const res = await client.evalExpr(workspaceId, device, expr);
    return hoverText(res.value, res.sort);
  } catch (err) {
    if (err instanceof ApiError && err.status === 422) {
      return "not determined";
    }
    throw err;
  }
}
