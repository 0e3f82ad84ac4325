import { spawn, ChildProcess } from "node:child_process";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api";
import { KeyValueStorage } from "../src/session";

const HERE = dirname(fileURLToPath(import.meta.url));

export class MemoryStorage implements KeyValueStorage {
    private store = new Map<string, string>();

    getItem(key: string): string | null {
        return this.store.get(key) ?? null;
    }

    setItem(key: string, value: string): void {
        this.store.set(key, value);
    }

    removeItem(key: string): void {
        this.store.delete(key);
    }
}

export interface LiveService {
    baseUrl: string;
    stop(): void;
}

/** Spawn the python fixture service and wait until /healthz answers. */
export async function startService(port: number, nUnits: number): Promise<LiveService> {
    const proc: ChildProcess = spawn(
        "python3",
        [join(HERE, "serve_fixture.py"), String(port), String(nUnits)],
        { stdio: "ignore" },
    );
    const baseUrl = `http://127.0.0.1:${port}`;
    const api = new ApiClient(baseUrl);
    for (let attempt = 0; attempt < 100; attempt++) {
        try {
            await api.health();
            return { baseUrl, stop: () => proc.kill() };
        } catch {
            await new Promise((resolve) => setTimeout(resolve, 100));
        }
    }
    proc.kill();
    throw new Error(`service on port ${port} never became healthy`);
}

/** Parse the known answer out of an attention-check text ("... select N."). */
export function honeyAnswer(text: string): number {
    const match = text.match(/(\d)\.?\s*$/);
    if (match === null) throw new Error(`no expected answer in: ${text}`);
    return Number(match[1]);
}

/** Count distinct (rater, unit) rows in the admin ratings export. */
export async function submittedUnits(baseUrl: string): Promise<number> {
    const res = await fetch(`${baseUrl}/export/ratings`);
    const lines = (await res.text()).trim().split("\n").slice(1);
    const keys = new Set(
        lines.filter((l) => l.length > 0).map((l) => l.split(",").slice(0, 2).join("|")),
    );
    return keys.size;
}
