import assert from "node:assert/strict";
import { test } from "node:test";
import { MIGRATION_TYPE_LABELS, canSubmit, emptyWizard, toggle } from "../src/wizard.js";
test("submit stays disabled until name, types and phases are all set", () => {
    const wizard = emptyWizard();
    assert.equal(canSubmit(wizard), false);
    wizard.name = "Hackystat to SaaS";
    assert.equal(canSubmit(wizard), false);
    wizard.types = toggle(wizard.types, "II");
    assert.equal(canSubmit(wizard), false);
    wizard.phases = toggle(wizard.phases, "plan");
    assert.equal(canSubmit(wizard), true);
    wizard.phases = toggle(wizard.phases, "plan"); // deselect again
    assert.equal(canSubmit(wizard), false);
});
test("a whitespace-only name does not enable submit", () => {
    const wizard = emptyWizard();
    wizard.name = "   ";
    wizard.types = toggle(wizard.types, "V");
    wizard.phases = toggle(wizard.phases, "plan");
    assert.equal(canSubmit(wizard), false);
});
test("toggle returns a fresh selection set", () => {
    const original = new Set(["plan"]);
    const next = toggle(original, "design");
    assert.deepEqual([...original], ["plan"]);
    assert.deepEqual([...next].sort(), ["design", "plan"]);
});
test("all five migration types carry labels", () => {
    assert.deepEqual(Object.keys(MIGRATION_TYPE_LABELS), ["I", "II", "III", "IV", "V"]);
});
