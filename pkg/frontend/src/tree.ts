// Pure view-model: project a method (plus the catalog and the service's
// validation issues) into the phase-rooted tree the workbench renders.
// No business decisions happen here; levels, notes and warnings all come
// from server data.

import type {
  ApplicabilityLevel,
  Fragment,
  Issue,
  Method,
  SequenceEdge,
} from "./types.js";

export interface TreeNode {
  id: string;
  name: string;
  kind: string;
  provenance: string;
  definition: string;
  overridden: boolean;
  badge?: "mandatory" | "situational";
  situationNotes: string[];
  techniques: string[];
  warnings: string[];
  waived: boolean;
  waiverText?: string;
  children: TreeNode[];
}

export interface PhaseNode {
  id: string;
  name: string;
  fragments: TreeNode[];
}

export interface DisplayEdge {
  from: string;
  to: string;
  warning?: string;
}

export interface MethodTree {
  methodId: string;
  phases: PhaseNode[];
  edges: DisplayEdge[];
  issues: Issue[];
}

export function buildTree(method: Method, catalog: Fragment[], issues: Issue[]): MethodTree {
  const catalogIndex = new Map(catalog.map((f) => [f.id, f]));
  const catalogOrder = new Map(catalog.map((f, i) => [f.id, i]));
  const userIndex = new Map(method.user_fragments.map((f) => [f.id, f]));
  const overrides = new Map(
    method.members
      .filter((m) => m.definition_override !== undefined)
      .map((m) => [m.fragment, m.definition_override as string]),
  );
  const bindings = new Map<string, string[]>();
  for (const b of method.technique_bindings) {
    const list = bindings.get(b.task) ?? [];
    list.push(b.technique);
    bindings.set(b.task, list);
  }
  const warningsBySubject = new Map<string, string[]>();
  for (const issue of issues) {
    for (const subject of issue.subjects) {
      const list = warningsBySubject.get(subject) ?? [];
      list.push(issue.message);
      warningsBySubject.set(subject, list);
    }
  }

  const resolve = (id: string): Fragment | undefined => catalogIndex.get(id) ?? userIndex.get(id);

  const methodIds = new Set<string>([
    ...method.members.map((m) => m.fragment),
    ...method.waivers.map((w) => w.fragment),
  ]);

  const makeNode = (id: string, waiverText?: string): TreeNode => {
    const fragment = resolve(id);
    const levels = applicabilityFor(fragment, method);
    return {
      id,
      name: fragment?.name ?? id,
      kind: fragment?.kind ?? "task",
      provenance: fragment?.provenance ?? "user-defined",
      definition: overrides.get(id) ?? fragment?.definition ?? "",
      overridden: overrides.has(id),
      badge: badgeFor(levels),
      situationNotes: levels
        .filter((l) => l.level === "situational" && l.note)
        .map((l) => l.note as string),
      techniques: (bindings.get(id) ?? []).slice().sort(),
      warnings: warningsBySubject.get(id) ?? [],
      waived: waiverText !== undefined,
      waiverText,
      children: [],
    };
  };

  // Parent/child nesting: a member nests under another included fragment
  // when its (catalog or user) parent is part of the method.
  const parentOf = (id: string): string | undefined => {
    const parent = resolve(id)?.parent;
    return parent !== undefined && methodIds.has(parent) ? parent : undefined;
  };

  const waiverByFragment = new Map(method.waivers.map((w) => [w.fragment, w.justification]));
  const nodes = new Map<string, TreeNode>();
  for (const id of methodIds) {
    nodes.set(id, makeNode(id, waiverByFragment.get(id)));
  }
  const roots: TreeNode[] = [];
  for (const [id, node] of nodes) {
    const parent = parentOf(id);
    if (parent !== undefined && nodes.has(parent)) {
      (nodes.get(parent) as TreeNode).children.push(node);
    } else {
      roots.push(node);
    }
  }

  // Display order: sequence edges where defined, catalog order otherwise
  // (user fragments sort after catalog ones, by id).
  const baseRank = (id: string): [number, string] => [
    catalogOrder.get(id) ?? catalog.length,
    id,
  ];
  const orderSiblings = (siblings: TreeNode[]): TreeNode[] => {
    const ids = new Set(siblings.map((s) => s.id));
    const constraints = method.sequences.filter((e) => ids.has(e.from) && ids.has(e.to));
    return stableTopoSort(siblings, constraints, baseRank);
  };
  const orderDeep = (list: TreeNode[]): TreeNode[] => {
    const ordered = orderSiblings(list);
    for (const node of ordered) {
      node.children = orderDeep(node.children);
    }
    return ordered;
  };

  const phaseRank = new Map(
    catalog.filter((f) => f.kind === "phase").map((f, i) => [f.id, i]),
  );
  const orderedPhases = method.phases
    .slice()
    .sort((a, b) => (phaseRank.get(a) ?? 99) - (phaseRank.get(b) ?? 99) || a.localeCompare(b));

  const phases: PhaseNode[] = orderedPhases.map((phaseId) => {
    const phase = resolve(phaseId);
    const inPhase = roots.filter((node) => resolve(node.id)?.phase === phaseId);
    return {
      id: phaseId,
      name: phase?.name ?? phaseId,
      fragments: orderDeep(inPhase),
    };
  });

  const edges: DisplayEdge[] = method.sequences.map((edge) => ({
    from: edge.from,
    to: edge.to,
    warning: issues.find(
      (i) =>
        i.code === "ILLOGICAL_SEQUENCE" &&
        i.subjects.includes(edge.from) &&
        i.subjects.includes(edge.to),
    )?.message,
  }));

  return { methodId: method.id, phases, edges, issues };
}

function applicabilityFor(
  fragment: Fragment | undefined,
  method: Method,
): { level: ApplicabilityLevel; note?: string }[] {
  if (!fragment?.applicability) return [];
  return fragment.applicability
    .filter((entry) => method.migration_types.includes(entry.migration_type))
    .map((entry) => ({ level: entry.level, note: entry.situation_note }));
}

function badgeFor(
  levels: { level: ApplicabilityLevel }[],
): "mandatory" | "situational" | undefined {
  if (levels.some((l) => l.level === "mandatory")) return "mandatory";
  if (levels.some((l) => l.level === "situational")) return "situational";
  return undefined;
}

// Kahn's algorithm with a stable priority: among ready nodes, the one
// with the smallest base rank goes first. Nodes stuck on a cycle fall
// back to base order (the cycle itself is flagged by the validator).
function stableTopoSort(
  siblings: TreeNode[],
  constraints: SequenceEdge[],
  baseRank: (id: string) => [number, string],
): TreeNode[] {
  const byId = new Map(siblings.map((s) => [s.id, s]));
  const incoming = new Map<string, number>(siblings.map((s) => [s.id, 0]));
  const out = new Map<string, string[]>();
  for (const edge of constraints) {
    if (edge.from === edge.to) continue;
    incoming.set(edge.to, (incoming.get(edge.to) ?? 0) + 1);
    const list = out.get(edge.from) ?? [];
    list.push(edge.to);
    out.set(edge.from, list);
  }
  const compare = (a: string, b: string): number => {
    const [ra, ia] = baseRank(a);
    const [rb, ib] = baseRank(b);
    return ra - rb || ia.localeCompare(ib);
  };
  const ready = siblings
    .map((s) => s.id)
    .filter((id) => (incoming.get(id) ?? 0) === 0)
    .sort(compare);
  const result: TreeNode[] = [];
  const placed = new Set<string>();
  while (ready.length > 0) {
    const id = ready.shift() as string;
    result.push(byId.get(id) as TreeNode);
    placed.add(id);
    for (const next of out.get(id) ?? []) {
      const remaining = (incoming.get(next) ?? 0) - 1;
      incoming.set(next, remaining);
      if (remaining === 0) {
        ready.push(next);
        ready.sort(compare);
      }
    }
  }
  const leftovers = siblings
    .map((s) => s.id)
    .filter((id) => !placed.has(id))
    .sort(compare);
  for (const id of leftovers) {
    result.push(byId.get(id) as TreeNode);
  }
  return result;
}

// Normalized projection for structural comparison (used by the
// export/import panel and the end-to-end tests).
export function treeFingerprint(tree: MethodTree): string {
  const projectNode = (node: TreeNode): unknown => ({
    id: node.id,
    kind: node.kind,
    definition: node.definition,
    techniques: node.techniques,
    waived: node.waived,
    children: node.children.map(projectNode),
  });
  return JSON.stringify({
    phases: tree.phases.map((p) => ({ id: p.id, fragments: p.fragments.map(projectNode) })),
    edges: tree.edges.map((e) => ({ from: e.from, to: e.to })),
  });
}

export function structuralDiff(a: MethodTree, b: MethodTree): string[] {
  const diffs: string[] = [];
  const phasesA = a.phases.map((p) => p.id).join(",");
  const phasesB = b.phases.map((p) => p.id).join(",");
  if (phasesA !== phasesB) diffs.push(`phases: ${phasesA} != ${phasesB}`);
  for (let i = 0; i < Math.max(a.phases.length, b.phases.length); i++) {
    const pa = a.phases[i];
    const pb = b.phases[i];
    if (!pa || !pb) continue;
    const fa = JSON.stringify(pa.fragments.map(flatten));
    const fb = JSON.stringify(pb.fragments.map(flatten));
    if (fa !== fb) diffs.push(`phase ${pa.id}: fragments differ`);
  }
  const ea = JSON.stringify(a.edges.map((e) => [e.from, e.to]));
  const eb = JSON.stringify(b.edges.map((e) => [e.from, e.to]));
  if (ea !== eb) diffs.push(`edges: ${ea} != ${eb}`);
  return diffs;
}

function flatten(node: TreeNode): unknown {
  return {
    id: node.id,
    definition: node.definition,
    techniques: node.techniques,
    waived: node.waived,
    children: node.children.map(flatten),
  };
}
