// End-to-end: drive the client workflow against a live service started
// with `serve`. The tree shown to the user is always rebuilt from
// confirmed server state, so these tests assert on exactly what the
// workbench renders.
import assert from "node:assert/strict";
import { spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { after, before, test } from "node:test";
import { ApiClient } from "../src/api.js";
import { buildTree, structuralDiff } from "../src/tree.js";
import { emptyWizard, submitWizard, toggle } from "../src/wizard.js";
let server;
let storeDir;
let api;
let catalog;
before(async () => {
    storeDir = mkdtempSync(join(tmpdir(), "workbench-e2e-"));
    server = spawn("python3", ["-m", "mlsac.cli", "serve", "--addr", "127.0.0.1:0", "--store", join(storeDir, "store")], { stdio: ["ignore", "pipe", "inherit"] });
    const base = await new Promise((resolve, reject) => {
        let buffered = "";
        const timer = setTimeout(() => reject(new Error("service did not start")), 30000);
        server.stdout?.on("data", (chunk) => {
            buffered += chunk.toString();
            const match = buffered.match(/serving on (http:\/\/[^/]+)\//);
            if (match) {
                clearTimeout(timer);
                resolve(match[1]);
            }
        });
        server.on("exit", (code) => reject(new Error(`service exited early (${code})`)));
    });
    api = new ApiClient(base);
    assert.equal(await api.ping(), true);
    catalog = (await api.catalogFragments()).fragments;
});
after(() => {
    server.kill();
    rmSync(storeDir, { recursive: true, force: true });
});
function renderedTree(response) {
    return buildTree(response.method, catalog, response.issues);
}
test("wizard (type II, all phases) renders the tenant-isolation tasks", async () => {
    const wizard = emptyWizard();
    wizard.name = "Hackystat to SaaS";
    wizard.types = toggle(wizard.types, "II");
    for (const phase of catalog.filter((f) => f.kind === "phase")) {
        wizard.phases = toggle(wizard.phases, phase.id);
    }
    const response = await submitWizard(api, wizard);
    const tree = renderedTree(response);
    assert.deepEqual(tree.phases.map((p) => p.id), ["plan", "design", "enable", "maintain"]);
    const enable = tree.phases.find((p) => p.id === "enable");
    assert.ok(enable);
    const enableIds = new Set(enable.fragments.flatMap((f) => [f.id, ...f.children.map((c) => c.id)]));
    for (const expected of [
        "isolate-tenant-availability",
        "isolate-tenant-customizability",
        "isolate-tenant-data",
        "isolate-tenant-performance",
    ]) {
        assert.ok(enableIds.has(expected), `missing ${expected}`);
    }
    const availability = enable.fragments.find((f) => f.id === "isolate-tenant-availability");
    assert.equal(availability?.badge, "mandatory");
    // The rendered tree always equals a fresh GET of the method.
    const fresh = await api.getMethod(response.method.id);
    assert.deepEqual(renderedTree(fresh), tree);
});
test("drag-reversing a catalog Follows edge surfaces the warning", async () => {
    const methodId = "hackystat-to-saas";
    const before = await api.getMethod(methodId);
    assert.deepEqual(before.method.sequences, [
        { from: "choose-cloud-platform-provider", to: "identify-incompatibilities" },
    ]);
    // Drop "choose cloud platform/provider" onto "identify
    // incompatibilities": place it after, reversing the usual order.
    // Like the app's drag handler, the reorder supersedes any existing
    // edge between the pair.
    const pair = new Set(["identify-incompatibilities", "choose-cloud-platform-provider"]);
    const edges = before.method.sequences
        .filter((e) => !(pair.has(e.from) && pair.has(e.to)))
        .concat([{ from: "identify-incompatibilities", to: "choose-cloud-platform-provider" }]);
    const response = await api.applyAction(methodId, { op: "set-sequence", edges });
    const tree = renderedTree(response);
    const warnings = tree.issues.filter((i) => i.code === "ILLOGICAL_SEQUENCE");
    assert.equal(warnings.length, 1);
    assert.match(warnings[0].message, /reverses/);
    const reversed = tree.edges.find((e) => e.from === "identify-incompatibilities" && e.to === "choose-cloud-platform-provider");
    assert.ok(reversed?.warning, "edge should carry the inline warning");
    // Read-after-write: the warning persists on a fresh fetch.
    const fresh = await api.getMethod(methodId);
    assert.equal(fresh.issues.filter((i) => i.code === "ILLOGICAL_SEQUENCE").length, 1);
});
test("tailoring round trip: extend, bind, and re-render from server state", async () => {
    const methodId = "hackystat-to-saas";
    let response = await api.applyAction(methodId, {
        op: "extend-fragment",
        parent: "define-plan",
        name: "Plan migration waves",
        definition: "Split the migration into waves.",
    });
    response = await api.applyAction(methodId, {
        op: "bind-technique",
        task: "enable-elasticity",
        technique: "hybrid-scaling",
    });
    const tree = renderedTree(response);
    const plan = tree.phases.find((p) => p.id === "plan");
    const definePlan = plan?.fragments.find((f) => f.id === "define-plan");
    assert.deepEqual(definePlan?.children.map((c) => c.id), ["plan-migration-waves"]);
    const enable = tree.phases.find((p) => p.id === "enable");
    const elasticity = enable?.fragments.find((f) => f.id === "enable-elasticity");
    assert.deepEqual(elasticity?.techniques, ["hybrid-scaling"]);
    const failed = await api
        .applyAction(methodId, { op: "remove-fragment", fragment: "ghost" })
        .catch((err) => err);
    assert.equal(failed.code, "UNKNOWN_TARGET");
    assert.equal(failed.status, 422);
});
test("export then import preserves the rendered tree exactly", async () => {
    const methodId = "hackystat-to-saas";
    const original = await api.getMethod(methodId);
    const xml = await api.exportXml(methodId);
    assert.match(xml, /^<\?xml version="1\.0" encoding="UTF-8"\?>/);
    const reimported = await api.importXml(xml);
    const diff = structuralDiff(renderedTree(original), renderedTree(reimported));
    assert.deepEqual(diff, []);
    // Byte-stable export after the round trip.
    assert.equal(await api.exportXml(methodId), xml);
});
test("empty method still exports a valid document", async () => {
    const wizard = emptyWizard();
    wizard.name = "Skeleton";
    wizard.types = toggle(wizard.types, "V");
    wizard.phases = toggle(wizard.phases, "plan");
    const created = await submitWizard(api, wizard);
    let current = created;
    for (const member of created.method.members) {
        current = await api.applyAction(created.method.id, {
            op: "remove-fragment",
            fragment: member.fragment,
        });
    }
    assert.equal(current.method.members.length, 0);
    const xml = await api.exportXml(created.method.id);
    assert.match(xml, /<phase id="plan" name="Plan">/);
    const reimported = await api.importXml(xml);
    assert.deepEqual(structuralDiff(renderedTree(current), renderedTree(reimported)), []);
});
