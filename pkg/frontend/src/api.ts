import { BASE_URL } from "./config.js";
import {
  AgreementPayload,
  AnnotationPayload,
  AssignmentsPayload,
  CategoryDescriptor,
  RoundProgress,
} from "./types.js";

export interface SubmitResult {
  status: number; // 201 accepted, 409 duplicate, 422 rejected
  detail: string | null;
}

/** The service surface the UI depends on; tests substitute fakes. */
export interface Api {
  createRound(
    roundId: string,
    spec: Record<string, unknown>,
    panel: string[],
  ): Promise<RoundProgress>;
  getRound(roundId: string): Promise<RoundProgress>;
  getAssignments(
    roundId: string,
    annotator: string,
    n: number,
  ): Promise<AssignmentsPayload>;
  submitAnnotation(
    roundId: string,
    payload: AnnotationPayload,
  ): Promise<SubmitResult>;
  getAgreement(roundId: string): Promise<AgreementPayload>;
  getExport(roundId: string): Promise<string>;
  getCategories(): Promise<CategoryDescriptor[]>;
}

/** Thin fetch wrapper over the service's /api/v1 endpoints; the only
 * network surface of the UI. */
export class ApiClient implements Api {
  constructor(readonly baseUrl: string = BASE_URL) {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.url(path));
    if (!res.ok) {
      throw new Error(`GET ${path} failed: ${res.status}`);
    }
    return (await res.json()) as T;
  }

  async createRound(
    roundId: string,
    spec: Record<string, unknown>,
    panel: string[],
  ): Promise<RoundProgress> {
    const res = await fetch(this.url("/rounds"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ round_id: roundId, spec, panel }),
    });
    if (res.status !== 201) {
      throw new Error(`round creation failed: ${res.status}`);
    }
    return (await res.json()) as RoundProgress;
  }

  getRound(roundId: string): Promise<RoundProgress> {
    return this.getJson(`/rounds/${roundId}`);
  }

  getAssignments(
    roundId: string,
    annotator: string,
    n: number,
  ): Promise<AssignmentsPayload> {
    return this.getJson(
      `/rounds/${roundId}/assignments?annotator=${encodeURIComponent(
        annotator,
      )}&n=${n}`,
    );
  }

  async submitAnnotation(
    roundId: string,
    payload: AnnotationPayload,
  ): Promise<SubmitResult> {
    const res = await fetch(this.url(`/rounds/${roundId}/annotations`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (res.status === 201) {
      return { status: 201, detail: null };
    }
    let detail: string | null = null;
    try {
      const body = (await res.json()) as { detail?: string };
      detail = body.detail ?? null;
    } catch {
      detail = null;
    }
    return { status: res.status, detail };
  }

  getAgreement(roundId: string): Promise<AgreementPayload> {
    return this.getJson(`/rounds/${roundId}/agreement`);
  }

  async getExport(roundId: string): Promise<string> {
    const res = await fetch(this.url(`/rounds/${roundId}/export`));
    if (!res.ok) {
      throw new Error(`export failed: ${res.status}`);
    }
    return res.text();
  }

  getCategories(): Promise<CategoryDescriptor[]> {
    return this.getJson("/categories");
  }
}
