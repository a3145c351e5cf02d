// Creation-wizard state: name/description, migration types, phases.
// Submit stays disabled until the selection is complete.

import type { ApiClient } from "./api.js";
import type { MethodResponse, MigrationType } from "./types.js";

export const MIGRATION_TYPE_LABELS: Record<MigrationType, string> = {
  I: "I — business logic onto IaaS",
  II: "II — replace/reengineer as SaaS",
  III: "III — database onto cloud storage",
  IV: "IV — database converted to a cloud database",
  V: "V — whole stack onto IaaS",
};

export interface WizardState {
  name: string;
  description: string;
  types: Set<MigrationType>;
  phases: Set<string>;
}

export function emptyWizard(): WizardState {
  return { name: "", description: "", types: new Set(), phases: new Set() };
}

export function toggle<T>(selection: Set<T>, value: T): Set<T> {
  const next = new Set(selection);
  if (next.has(value)) {
    next.delete(value);
  } else {
    next.add(value);
  }
  return next;
}

export function canSubmit(state: WizardState): boolean {
  return state.name.trim().length > 0 && state.types.size > 0 && state.phases.size > 0;
}

export function submitWizard(api: ApiClient, state: WizardState): Promise<MethodResponse> {
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
