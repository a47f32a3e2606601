import { NEGATIVE, POSITIVE, RATIONALE } from "./types.js";

export interface GatedLabels {
  labels: Record<string, 0 | 1>;
  rationaleEnabled: boolean;
}

/** The conditional-category rule: a rationale mark only exists relative
 * to a positive or negative statement. When neither is marked the
 * rationale toggle is forced to 0 and disabled; otherwise it is enabled
 * and keeps whatever value it had. */
export function gateRationale(labels: Record<string, 0 | 1>): GatedLabels {
  const evaluative = labels[POSITIVE] === 1 || labels[NEGATIVE] === 1;
  const gated: Record<string, 0 | 1> = { ...labels };
  if (!evaluative) {
    gated[RATIONALE] = 0;
  }
  return { labels: gated, rationaleEnabled: evaluative };
}

/** Mirror of the server's acceptance rule, used by tests to show the
 * gate can never emit a payload the service rejects. */
export function serverWouldAccept(labels: Record<string, 0 | 1>): boolean {
  return (
    labels[RATIONALE] !== 1 ||
    labels[POSITIVE] === 1 ||
    labels[NEGATIVE] === 1
  );
}
