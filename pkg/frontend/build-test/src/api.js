// Typed client for the workbench service. Every state change goes
// through here; the UI never computes validation results itself.
export class ServiceError extends Error {
    constructor(status, body) {
        super(body.message);
        this.status = status;
        this.code = body.code;
        this.subjects = body.subjects ?? [];
    }
}
async function throwFailure(response) {
    let body = { code: "UNKNOWN", message: response.statusText, subjects: [] };
    try {
        body = (await response.json());
    }
    catch {
        // non-JSON failure body; keep the status text
    }
    throw new ServiceError(response.status, body);
}
export class ApiClient {
    constructor(base = "") {
        this.base = base;
    }
    async getJson(path) {
        const response = await fetch(this.base + path);
        if (!response.ok)
            await throwFailure(response);
        return (await response.json());
    }
    async postJson(path, body) {
        const response = await fetch(this.base + path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body ?? {}),
        });
        if (!response.ok)
            await throwFailure(response);
        return (await response.json());
    }
    catalogFragments() {
        return this.getJson("/catalog/fragments");
    }
    listMethods() {
        return this.getJson("/methods");
    }
    getMethod(id) {
        return this.getJson(`/methods/${encodeURIComponent(id)}`);
    }
    createMethod(input) {
        return this.postJson("/methods", input);
    }
    applyAction(methodId, action) {
        return this.postJson(`/methods/${encodeURIComponent(methodId)}/actions`, action);
    }
    validate(methodId) {
        return this.postJson(`/methods/${encodeURIComponent(methodId)}/validate`, {});
    }
    async exportXml(methodId) {
        const response = await fetch(`${this.base}/methods/${encodeURIComponent(methodId)}/export.xml`);
        if (!response.ok)
            await throwFailure(response);
        return await response.text();
    }
    async importXml(document) {
        const response = await fetch(`${this.base}/methods/import`, {
            method: "POST",
            headers: { "Content-Type": "application/xml" },
            body: document,
        });
        if (!response.ok)
            await throwFailure(response);
        return (await response.json());
    }
    createInstance(methodId, chosen, notes) {
        return this.postJson(`/methods/${encodeURIComponent(methodId)}/instances`, {
            chosen_techniques: chosen,
            enactment_notes: notes,
        });
    }
    async ping() {
        try {
            const response = await fetch(`${this.base}/catalog/rules`);
            return response.ok;
        }
        catch {
            return false;
        }
    }
}
