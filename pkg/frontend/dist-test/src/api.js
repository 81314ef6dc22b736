/**
 * Client for the /v1 suggestion service, plus the debounced latest-wins
 * scheduler the viewfinder uses: at most one suggestion request is in
 * flight; moving the viewport cancels the pending one.
 */
export class ApiClient {
    baseUrl;
    fetchFn;
    constructor(baseUrl, fetchFn = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
    }
    async post(path, body, contentType, signal) {
        const resp = await this.fetchFn(this.baseUrl + path, {
            method: "POST",
            body,
            headers: { "Content-Type": contentType },
            signal,
        });
        const payload = await resp.json();
        if (!resp.ok) {
            throw new Error(payload?.error ?? `HTTP ${resp.status}`);
        }
        return payload;
    }
    async health() {
        try {
            const resp = await this.fetchFn(this.baseUrl + "/v1/health");
            return resp.ok;
        }
        catch {
            return false;
        }
    }
    /** Upload raw image bytes; identical bytes land on the same content-hash id. */
    uploadSource(data, contentType = "image/png") {
        return this.post("/v1/sources", data, contentType);
    }
    suggest(sourceId, viewport, signal) {
        return this.post("/v1/suggest", JSON.stringify({ source_id: sourceId, viewport }), "application/json", signal);
    }
    refine(sourceId, viewport, maxSteps = 3) {
        return this.post("/v1/refine", JSON.stringify({ source_id: sourceId, viewport, max_steps: maxSteps }), "application/json");
    }
}
export function debounce(fn, waitMs) {
    let timer;
    return (...args) => {
        clearTimeout(timer);
        timer = setTimeout(() => fn(...args), waitMs);
    };
}
/**
 * Debounced suggestion fetcher with latest-wins cancellation: a new request
 * aborts the in-flight one, and responses that arrive out of order are
 * dropped by generation counting.
 */
export class SuggestScheduler {
    client;
    onResult;
    onError;
    generation = 0;
    controller = null;
    debounced;
    constructor(client, onResult, onError, waitMs = 250) {
        this.client = client;
        this.onResult = onResult;
        this.onError = onError;
        this.debounced = debounce((sourceId, viewport) => {
            void this.fire(sourceId, viewport);
        }, waitMs);
    }
    /** Call on every viewport settle; collapses bursts into one request. */
    request(sourceId, viewport) {
        this.debounced(sourceId, viewport);
    }
    async fire(sourceId, viewport) {
        const mine = ++this.generation;
        this.controller?.abort();
        this.controller = new AbortController();
        try {
            const result = await this.client.suggest(sourceId, viewport, this.controller.signal);
            if (mine === this.generation) {
                this.onResult(result, viewport);
            }
        }
        catch (error) {
            if (mine === this.generation && !isAbort(error)) {
                this.onError(error);
            }
        }
    }
}
function isAbort(error) {
    return error instanceof DOMException
        ? error.name === "AbortError"
        : error instanceof Error && error.name === "AbortError";
}
