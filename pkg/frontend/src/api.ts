// Typed client for the rating-service HTTP API. The UI talks to the
// service only through these five calls; no other endpoints exist.

export interface SessionInfo {
    session_id: string;
    instructions: string;
    total_units: number;
}

export interface ItemView {
    item_id: string;
    text: string;
    dimension: string;
    inverted: boolean;
}

export interface UnitPayload {
    session_id: string;
    served_position: number;
    remaining: number;
    unit: {
        unit_id: string;
        interaction_id: string;
        technique: string;
        start: number;
        end: number;
    };
    clip_uri: string;
    focus_image_uri: string;
    items: ItemView[];
    honey_pot: { item_id: string; text: string; position: number } | null;
}

export interface SubmitAck {
    stored: boolean;
    session_id: string;
    unit_id: string;
}

export type Demographics = { age_band: string; gender: string };

export class ApiError extends Error {
    constructor(readonly status: number, message: string) {
        super(message);
    }
}

export const STUDY_COMPLETE = Symbol("study-complete");

export class ApiClient {
    constructor(
        private readonly baseUrl: string,
        private readonly fetchImpl: typeof fetch = fetch,
    ) {}

    private async request(path: string, init?: RequestInit): Promise<unknown> {
        const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
        if (!res.ok) {
            const body = await res.text();
            throw new ApiError(res.status, body || res.statusText);
        }
        return res.json();
    }

    async openSession(demographics: Demographics): Promise<SessionInfo> {
        return (await this.request("/sessions", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(demographics),
        })) as SessionInfo;
    }

    /** Next unserved unit, or STUDY_COMPLETE once the pool is exhausted. */
    async nextUnit(sessionId: string): Promise<UnitPayload | typeof STUDY_COMPLETE> {
        try {
            return (await this.request(`/sessions/${sessionId}/next`)) as UnitPayload;
        } catch (err) {
            if (err instanceof ApiError && err.status === 410) return STUDY_COMPLETE;
            throw err;
        }
    }

    async submitRating(
        sessionId: string,
        unitId: string,
        scores: Record<string, number>,
        submissionToken: string,
        viewCount: number,
    ): Promise<SubmitAck> {
        return (await this.request(`/sessions/${sessionId}/ratings`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({
                unit_id: unitId,
                scores,
                submission_token: submissionToken,
                view_count: viewCount,
            }),
        })) as SubmitAck;
    }

    async health(): Promise<{ status: string; units: number }> {
        return (await this.request("/healthz")) as { status: string; units: number };
    }
}
