// Canvas-side model state: placed components with positions, wires, and
// parameter edits. Serializes losslessly to the service's model-file
// schema (positions are a canvas concern; imports are auto-laid out).

import { checkPortPair, type WireCheck } from "./portrules";
import type {
  ComponentEntry,
  ModelFile,
  Mode,
  PaletteEntry,
  ParamValue,
  PortDef,
  SpecEntry,
} from "./types";

export interface Placed {
  family: string;
  name: string;
  params: Record<string, ParamValue>;
  x: number;
  y: number;
}

export interface Wire {
  from: string; // "component.port"
  to: string;
}

const GRID_X = 190;
const GRID_Y = 120;
const COLUMNS = 5;

export class CanvasModel {
  name = "untitled";
  description = "";
  mode: Mode = "design";
  components: Placed[] = [];
  wires: Wire[] = [];
  designSpecs: SpecEntry[] = [];
  initialGuesses: Record<string, number> = {};
  solverOptions: Record<string, unknown> = {};
  sized: ModelFile["sized"] | undefined;

  constructor(private palette: Map<string, PaletteEntry>) {}

  static fromPalette(entries: PaletteEntry[]): CanvasModel {
    return new CanvasModel(new Map(entries.map((e) => [e.family, e])));
  }

  family(name: string): PaletteEntry {
    const entry = this.palette.get(name);
    if (!entry) throw new Error(`unknown component family '${name}'`);
    return entry;
  }

  component(name: string): Placed {
    const c = this.components.find((c) => c.name === name);
    if (!c) throw new Error(`no component named '${name}'`);
    return c;
  }

  /** Ports of a placed component; the shaft generates ports from n_ports. */
  portsOf(comp: Placed): PortDef[] {
    const entry = this.family(comp.family);
    if (entry.dynamic_ports) {
      const n = Number(comp.params["n_ports"] ?? 2);
      return Array.from({ length: n }, (_, i) => ({
        name: `mech${i + 1}`,
        kind: "mech" as const,
        direction: "mech" as const,
      }));
    }
    return entry.ports;
  }

  resolvePort(ref: string): { comp: Placed; port: PortDef } {
    const dot = ref.indexOf(".");
    if (dot < 0) throw new Error(`port reference '${ref}' must be component.port`);
    const comp = this.component(ref.slice(0, dot));
    const portName = ref.slice(dot + 1);
    const port = this.portsOf(comp).find((p) => p.name === portName);
    if (!port) throw new Error(`component '${comp.name}' has no port '${portName}'`);
    return { comp, port };
  }

  place(family: string, name: string, params: Record<string, ParamValue> = {},
        x?: number, y?: number): Placed {
    this.family(family);
    if (this.components.some((c) => c.name === name)) {
      throw new Error(`duplicate component name '${name}'`);
    }
    const i = this.components.length;
    const placed: Placed = {
      family,
      name,
      params: { ...params },
      x: x ?? 60 + (i % COLUMNS) * GRID_X,
      y: y ?? 60 + Math.floor(i / COLUMNS) * GRID_Y,
    };
    this.components.push(placed);
    return placed;
  }

  remove(name: string): void {
    this.components = this.components.filter((c) => c.name !== name);
    this.wires = this.wires.filter(
      (w) => !w.from.startsWith(name + ".") && !w.to.startsWith(name + "."));
    this.designSpecs = this.designSpecs.filter((s) => s.component !== name);
  }

  portInUse(ref: string): boolean {
    return this.wires.some((w) => w.from === ref || w.to === ref);
  }

  /** Kind/direction/occupancy check without mutating anything. */
  checkWire(a: string, b: string): WireCheck {
    let pa, pb;
    try {
      pa = this.resolvePort(a);
      pb = this.resolvePort(b);
    } catch (err) {
      return { ok: false, reason: String((err as Error).message) };
    }
    const pair = checkPortPair(pa.port, pb.port);
    if (!pair.ok) return pair;
    for (const ref of [a, b]) {
      if (this.portInUse(ref)) {
        return { ok: false, reason: `port ${ref} is already wired` };
      }
    }
    return { ok: true };
  }

  wire(a: string, b: string): Wire {
    const check = this.checkWire(a, b);
    if (!check.ok) throw new Error(check.reason);
    // canonical order: fluid outlet first, matching the file convention
    const pa = this.resolvePort(a);
    const w = pa.port.direction === "in" ? { from: b, to: a } : { from: a, to: b };
    this.wires.push(w);
    return w;
  }

  unwire(a: string, b: string): void {
    this.wires = this.wires.filter(
      (w) => !((w.from === a && w.to === b) || (w.from === b && w.to === a)));
  }

  setParam(comp: string, key: string, value: ParamValue): void {
    this.component(comp).params[key] = value;
  }

  addSpec(component: string, quantity: string, value: number, mode?: string): void {
    this.designSpecs.push(mode ? { component, quantity, value, mode }
                               : { component, quantity, value });
  }

  // --- model-file (de)serialization --------------------------------------

  toModelFile(): ModelFile {
    const file: ModelFile = {
      format_version: 1,
      name: this.name,
      description: this.description,
      mode: this.mode,
      components: this.components.map((c): ComponentEntry => ({
        family: c.family,
        name: c.name,
        params: { ...c.params },
      })),
      connections: this.wires.map((w) => [w.from, w.to] as [string, string]),
    };
    if (this.designSpecs.length) file.design_specs = this.designSpecs.map((s) => ({ ...s }));
    if (Object.keys(this.initialGuesses).length) file.initial_guesses = { ...this.initialGuesses };
    if (Object.keys(this.solverOptions).length) file.solver = { ...this.solverOptions };
    if (this.sized) file.sized = this.sized;
    return file;
  }

  static fromModelFile(file: ModelFile, palette: PaletteEntry[]): CanvasModel {
    const m = CanvasModel.fromPalette(palette);
    m.name = file.name ?? "untitled";
    m.description = file.description ?? "";
    m.mode = file.mode;
    for (const entry of file.components) {
      m.place(entry.family, entry.name, entry.params);
    }
    for (const [from, to] of file.connections) {
      // validated on the way in so corrupt files surface immediately
      const check = m.checkWire(from, to);
      if (!check.ok) throw new Error(`connection ${from} -> ${to}: ${check.reason}`);
      m.wires.push({ from, to });
    }
    m.designSpecs = (file.design_specs ?? []).map((s) => ({ ...s }));
    m.initialGuesses = { ...(file.initial_guesses ?? {}) };
    m.solverOptions = { ...(file.solver ?? {}) };
    m.sized = file.sized;
    return m;
  }
}
