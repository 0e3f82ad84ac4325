// Session state machine: welcome -> demographics -> rating loop -> done.
// Session identity and the per-unit submission token survive a page
// refresh through the injected storage, so a resubmit after reload reuses
// the same token and the server keeps a single row.

import {
    ApiClient,
    Demographics,
    STUDY_COMPLETE,
    SubmitAck,
    UnitPayload,
} from "./api";

export type Screen = "welcome" | "demographics" | "rating" | "complete" | "left";

export interface KeyValueStorage {
    getItem(key: string): string | null;
    setItem(key: string, value: string): void;
    removeItem(key: string): void;
}

const KEY = "rater-ui.session";

interface PersistedSession {
    sessionId: string;
    instructions: string;
    totalUnits: number;
    submitted: number;
}

export class SessionController {
    screen: Screen = "welcome";
    instructions = "";
    totalUnits = 0;
    submitted = 0;
    viewCount = 0;
    current: UnitPayload | null = null;
    private sessionId: string | null = null;
    private answers = new Map<string, number>();

    constructor(
        private readonly api: ApiClient,
        private readonly storage: KeyValueStorage,
    ) {}

    /** Restore a persisted session after a refresh; false if none exists. */
    resume(): boolean {
        const raw = this.storage.getItem(KEY);
        if (raw === null) return false;
        const saved = JSON.parse(raw) as PersistedSession;
        this.sessionId = saved.sessionId;
        this.instructions = saved.instructions;
        this.totalUnits = saved.totalUnits;
        this.submitted = saved.submitted;
        this.screen = "rating";
        return true;
    }

    acknowledgeWelcome(): void {
        if (this.screen === "welcome") this.screen = "demographics";
    }

    /** Demographics are sent once; the form is never rendered again. */
    async start(demographics: Demographics): Promise<void> {
        const info = await this.api.openSession(demographics);
        this.sessionId = info.session_id;
        this.instructions = info.instructions;
        this.totalUnits = info.total_units;
        this.submitted = 0;
        this.screen = "rating";
        this.persist();
    }

    /** Fetch (or re-fetch) the pending unit; advances to "complete" at the end. */
    async loadUnit(): Promise<UnitPayload | null> {
        const payload = await this.api.nextUnit(this.requireSession());
        if (payload === STUDY_COMPLETE) {
            this.current = null;
            this.screen = "complete";
            return null;
        }
        if (this.current?.unit.unit_id !== payload.unit.unit_id) {
            this.answers.clear();
            this.viewCount = 0;
        }
        this.current = payload;
        return payload;
    }

    recordView(): void {
        this.viewCount += 1;
    }

    setAnswer(itemId: string, score: number): void {
        if (score < 1 || score > 5) throw new Error(`score out of range: ${score}`);
        this.answers.set(itemId, score);
    }

    answerFor(itemId: string): number | undefined {
        return this.answers.get(itemId);
    }

    /** Submit stays disabled until every displayed item has a selection. */
    canSubmit(): boolean {
        if (this.current === null) return false;
        return this.current.items.every((item) => this.answers.has(item.item_id));
    }

    async submit(): Promise<SubmitAck> {
        const unit = this.current;
        if (unit === null || !this.canSubmit()) {
            throw new Error("all displayed items must be answered before submitting");
        }
        const scores: Record<string, number> = {};
        for (const item of unit.items) scores[item.item_id] = this.answers.get(item.item_id)!;
        const token = `${this.requireSession()}:${unit.unit.unit_id}`;
        const ack = await this.api.submitRating(
            this.requireSession(),
            unit.unit.unit_id,
            scores,
            token,
            Math.max(this.viewCount, 1),
        );
        if (ack.stored) {
            this.submitted += 1;
            this.persist();
        }
        this.answers.clear();
        this.viewCount = 0;
        this.current = null;
        if (this.submitted >= this.totalUnits) this.screen = "complete";
        return ack;
    }

    /** Always-available exit; reports how many ratings were persisted. */
    leave(): number {
        this.screen = "left";
        this.storage.removeItem(KEY);
        return this.submitted;
    }

    private requireSession(): string {
        if (this.sessionId === null) throw new Error("no active session");
        return this.sessionId;
    }

    private persist(): void {
        const saved: PersistedSession = {
            sessionId: this.requireSession(),
            instructions: this.instructions,
            totalUnits: this.totalUnits,
            submitted: this.submitted,
        };
        this.storage.setItem(KEY, JSON.stringify(saved));
    }
}
