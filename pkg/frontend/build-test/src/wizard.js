// Creation-wizard state: name/description, migration types, phases.
// Submit stays disabled until the selection is complete.
export const MIGRATION_TYPE_LABELS = {
    I: "I — business logic onto IaaS",
    II: "II — replace/reengineer as SaaS",
    III: "III — database onto cloud storage",
    IV: "IV — database converted to a cloud database",
    V: "V — whole stack onto IaaS",
};
export function emptyWizard() {
    return { name: "", description: "", types: new Set(), phases: new Set() };
}
export function toggle(selection, value) {
    const next = new Set(selection);
    if (next.has(value)) {
        next.delete(value);
    }
    else {
        next.add(value);
    }
    return next;
}
export function canSubmit(state) {
    return state.name.trim().length > 0 && state.types.size > 0 && state.phases.size > 0;
}
export function submitWizard(api, state) {
    if (!canSubmit(state)) {
        return Promise.reject(new Error("wizard is incomplete"));
    }
    return api.createMethod({
        name: state.name.trim(),
        description: state.description,
        migration_types: [...state.types].sort(),
        phases: [...state.phases],
    });
}
