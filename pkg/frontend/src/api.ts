// Thin client for the artwork service's v1 HTTP API. Every network
// interaction in the studio goes through this module, so the rest of the
// code never touches fetch or endpoint paths directly.

export interface ArtworkSummary {
    artwork_id: string;
    byte_len: number;
    created_at: number;
    author: string;
    title: string;
    /** CRC-32 of the stored payload, as a raw integer. */
    checksum: number;
}

export interface ArtworkPage {
    items: ArtworkSummary[];
    next: string | null;
}

export class ApiError extends Error {
    constructor(message: string, readonly status: number) {
        super(message);
        this.name = "ApiError";
    }
}

function isSummary(x: unknown): x is ArtworkSummary {
    if (typeof x !== "object" || x === null) {
        return false;
    }
    const o = x as Record<string, unknown>;
    return (
        typeof o.artwork_id === "string" &&
        typeof o.byte_len === "number" &&
        typeof o.created_at === "number" &&
        typeof o.author === "string" &&
        typeof o.title === "string" &&
        typeof o.checksum === "number"
    );
}

async function errorFrom(resp: Response): Promise<ApiError> {
    let detail = "";
    try {
        const body = (await resp.json()) as { detail?: unknown };
        if (typeof body.detail === "string") {
            detail = body.detail;
        }
    } catch {
        // non-JSON error body; fall through to the status line
    }
    return new ApiError(detail || `request failed with status ${resp.status}`, resp.status);
}

export class StudioApi {
    constructor(readonly baseUrl: string) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
    }

    async createSession(author: string): Promise<string> {
        const resp = await fetch(`${this.baseUrl}/v1/sessions`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ author }),
        });
        if (resp.status !== 201) {
            throw await errorFrom(resp);
        }
        const body = (await resp.json()) as { token?: unknown };
        if (typeof body.token !== "string") {
            throw new ApiError("session response missing token", resp.status);
        }
        return body.token;
    }

    async uploadArtwork(token: string, data: Uint8Array): Promise<string> {
        // Copy into a plain ArrayBuffer; fetch's BodyInit typing rejects a
        // Uint8Array view under recent lib definitions.
        const payload = data.slice().buffer;
        const resp = await fetch(`${this.baseUrl}/v1/artworks`, {
            method: "POST",
            headers: {
                "Content-Type": "application/octet-stream",
                Authorization: `Bearer ${token}`,
            },
            body: payload,
        });
        if (resp.status !== 201) {
            throw await errorFrom(resp);
        }
        const body = (await resp.json()) as { artwork_id?: unknown };
        if (typeof body.artwork_id !== "string") {
            throw new ApiError("upload response missing artwork_id", resp.status);
        }
        return body.artwork_id;
    }

    async fetchArtwork(artworkId: string): Promise<{ data: Uint8Array; checksum: string | null }> {
        const resp = await fetch(`${this.baseUrl}/v1/artworks/${encodeURIComponent(artworkId)}`);
        if (!resp.ok) {
            throw await errorFrom(resp);
        }
        const data = new Uint8Array(await resp.arrayBuffer());
        return { data, checksum: resp.headers.get("X-Checksum-CRC32") };
    }

    async listArtworks(
        opts: { author?: string; limit?: number; after?: string } = {},
    ): Promise<ArtworkPage> {
        const params = new URLSearchParams();
        if (opts.author !== undefined) {
            params.set("author", opts.author);
        }
        if (opts.limit !== undefined) {
            params.set("limit", String(opts.limit));
        }
        if (opts.after !== undefined) {
            params.set("after", opts.after);
        }
        const qs = params.toString();
        const resp = await fetch(`${this.baseUrl}/v1/artworks${qs ? `?${qs}` : ""}`);
        if (!resp.ok) {
            throw await errorFrom(resp);
        }
        const body = (await resp.json()) as { items?: unknown; next?: unknown };
        if (!Array.isArray(body.items) || !body.items.every(isSummary)) {
            throw new ApiError("malformed artwork listing", resp.status);
        }
        return { items: body.items, next: typeof body.next === "string" ? body.next : null };
    }

    async deleteArtwork(token: string, artworkId: string): Promise<void> {
        const resp = await fetch(`${this.baseUrl}/v1/artworks/${encodeURIComponent(artworkId)}`, {
            method: "DELETE",
            headers: { Authorization: `Bearer ${token}` },
        });
        if (resp.status !== 204) {
            throw await errorFrom(resp);
        }
    }

    async health(): Promise<{ status: string; artworks: number }> {
        const resp = await fetch(`${this.baseUrl}/v1/health`);
        if (!resp.ok) {
            throw await errorFrom(resp);
        }
        return (await resp.json()) as { status: string; artworks: number };
    }
}
