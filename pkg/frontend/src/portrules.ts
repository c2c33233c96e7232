// Client-side port compatibility, mirroring the server's connection rules:
// kinds must match, fluid wires join exactly one outlet to one inlet, and a
// port participates in at most one wire. Invalid wires are refused before
// the server is ever called.

import type { PortDef } from "./types";

export interface WireCheck {
  ok: boolean;
  reason?: string;
}

export function checkPortPair(a: PortDef, b: PortDef): WireCheck {
  if (a.kind !== b.kind) {
    return { ok: false, reason: `cannot connect ${a.kind} to ${b.kind}` };
  }
  if (a.kind === "fluid") {
    const dirs = new Set([a.direction, b.direction]);
    if (!(dirs.has("in") && dirs.has("out"))) {
      return { ok: false, reason: "fluid wires join an outlet to an inlet" };
    }
  }
  return { ok: true };
}

// Every (kind, direction) shape a port can have; used to cross-check the
// client rule table against the server's behavior.
export const PORT_SHAPES: PortDef[] = [
  { name: "f_in", kind: "fluid", direction: "in" },
  { name: "f_out", kind: "fluid", direction: "out" },
  { name: "m", kind: "mech", direction: "mech" },
];

export function compatibilityMatrix(): Record<string, Record<string, boolean>> {
  const matrix: Record<string, Record<string, boolean>> = {};
  for (const a of PORT_SHAPES) {
    matrix[shapeKey(a)] = {};
    for (const b of PORT_SHAPES) {
      matrix[shapeKey(a)][shapeKey(b)] = checkPortPair(a, b).ok;
    }
  }
  return matrix;
}

export function shapeKey(p: PortDef): string {
  return p.kind === "mech" ? "mech" : `fluid-${p.direction}`;
}
