// Wire-format types shared with the service (/api/v1).

export type Mode = "design" | "offdesign";
export type PortKind = "fluid" | "mech";
export type PortDirection = "in" | "out" | "mech";

export interface PortDef {
  name: string;
  kind: PortKind;
  direction: PortDirection;
}

export interface ParamDef {
  name: string;
  role: "calibration" | "geometry" | "operational" | "design_value" | "structural";
  unit: string;
  default: unknown;
  required: boolean;
  kind: "float" | "mixture" | "vector" | "name" | "int";
}

export interface PaletteEntry {
  family: string;
  doc: string;
  ports: PortDef[];
  dynamic_ports: boolean;
  params: ParamDef[];
  spec_quantities: string[];
}

export type ParamValue = number | string | number[] | "free";

export interface ComponentEntry {
  family: string;
  name: string;
  params: Record<string, ParamValue>;
}

export interface SpecEntry {
  component: string;
  quantity: string;
  value: number;
  mode?: string;
}

export interface ModelFile {
  format_version: number;
  name: string;
  description?: string;
  mode: Mode;
  components: ComponentEntry[];
  connections: [string, string][];
  design_specs?: SpecEntry[];
  initial_guesses?: Record<string, number>;
  solver?: Record<string, unknown>;
  sized?: {
    provenance: Record<string, string>;
    design_refs: Record<string, Record<string, number>>;
    design_solution: Record<string, number>;
  };
}

export interface DofReport {
  n_vars: number;
  n_eqs: number;
  status: "well_posed" | "under_determined" | "over_determined";
  deficit: number;
  diagnostics: string[];
  per_component: Record<string, {
    family: string;
    equations: number;
    free_params: string[];
    specs: string[];
  }>;
}

export interface Metrics {
  thrust: number;
  isp: number;
  of_ratio: number | null;
  power_balance_residual: number;
  mdot_total: number;
  warnings: string[];
}

export interface SolveBody {
  status: string;
  iterations: number;
  residual_norm: number;
  values: Record<string, number>;
  message: string;
}

export interface DesignResponse {
  result: SolveBody;
  metrics: Metrics;
  provenance: Record<string, string>;
  sized_model: ModelFile;
}

export interface SimulateResponse {
  result: SolveBody;
  metrics: Metrics;
}

export interface SweepPointBody {
  value: number;
  status: "converged" | "failed";
  solution: Record<string, number> | null;
  metrics: Metrics | null;
  residual_norm: number | null;
  error: string | null;
}

export interface SweepResponse {
  param: string;
  points: SweepPointBody[];
  all_converged: boolean;
}

export interface JobStatus {
  job_id: string;
  done: boolean;
  progress: { completed: number; total: number };
  points: SweepPointBody[];
  error: string | null;
}
