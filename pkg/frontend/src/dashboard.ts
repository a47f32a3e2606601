import { Api } from "./api.js";
import { AgreementPayload, RoundProgress } from "./types.js";

/** Coordinator view of a running round. Both blocks are the service's
 * payloads verbatim: the dashboard performs no arithmetic of its own,
 * so every number on screen is attributable to the agreement endpoint. */
export interface DashboardState {
  progress: RoundProgress;
  agreement: AgreementPayload;
}

export async function loadDashboard(
  api: Api,
  roundId: string,
): Promise<DashboardState> {
  const [progress, agreement] = await Promise.all([
    api.getRound(roundId),
    api.getAgreement(roundId),
  ]);
  return { progress, agreement };
}

/** Rows for the per-category table, in the payload's own key order;
 * values are passed through untouched. */
export function categoryRows(
  state: DashboardState,
): Array<{ category: string; full_agreement_rate: number;
           prevalence_majority: number; prevalence_full: number }> {
  return Object.entries(state.agreement.per_category).map(
    ([category, a]) => ({ category, ...a }),
  );
}
