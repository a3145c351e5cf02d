// Wire types mirroring the service's JSON schemas (schemas/ in the
// repository root).

export type MigrationType = "I" | "II" | "III" | "IV" | "V";
export type FragmentKind = "phase" | "task" | "work-product" | "principle" | "technique";
export type ApplicabilityLevel = "mandatory" | "situational" | "unnecessary";

export interface ApplicabilityEntry {
  migration_type: MigrationType;
  level: ApplicabilityLevel;
  situation_note?: string;
}

export interface Fragment {
  id: string;
  name: string;
  kind: FragmentKind;
  definition: string;
  provenance: "catalog" | "user-defined";
  phase?: string;
  parent?: string;
  definition_note?: string;
  applicability?: ApplicabilityEntry[];
}

export interface Member {
  fragment: string;
  definition_override?: string;
}

export interface SequenceEdge {
  from: string;
  to: string;
}

export interface TechniqueBinding {
  task: string;
  technique: string;
}

export interface Waiver {
  fragment: string;
  justification: string;
}

export interface Method {
  id: string;
  name: string;
  description: string;
  metamodel_version: string;
  migration_types: MigrationType[];
  phases: string[];
  members: Member[];
  user_fragments: Fragment[];
  sequences: SequenceEdge[];
  technique_bindings: TechniqueBinding[];
  waivers: Waiver[];
}

export interface Issue {
  severity: "error" | "warning";
  code: string;
  message: string;
  subjects: string[];
}

export interface MethodResponse {
  method: Method;
  issues: Issue[];
}

export interface MethodIndexEntry {
  id: string;
  name: string;
  migration_types: MigrationType[];
  fragment_count: number;
}

export interface ApiError {
  code: string;
  message: string;
  subjects: string[];
}

export type TailoringAction =
  | { op: "add-fragment"; name: string; kind: FragmentKind; phase: string; definition: string; id?: string }
  | { op: "extend-fragment"; parent: string; name: string; definition: string; id?: string }
  | { op: "remove-fragment"; fragment: string; waiver?: string }
  | { op: "set-sequence"; edges: SequenceEdge[] }
  | { op: "bind-technique"; task: string; technique: string }
  | { op: "unbind-technique"; task: string; technique: string }
  | { op: "edit-definition"; fragment: string; definition: string };
