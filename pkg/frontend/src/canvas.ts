// SVG schematic editor: draggable component boxes, port dots, rubber-band
// wiring with inline refusal hints, and per-component diagnostic badges.

import type { CanvasModel, Placed } from "./model";
import type { PortDef } from "./types";

const BOX_W = 132;
const BOX_H = 64;
const NS = "http://www.w3.org/2000/svg";

export interface CanvasCallbacks {
  onSelect(name: string | null): void;
  onChange(): void;
  onHint(message: string): void;
}

interface PortPin {
  ref: string;
  x: number;
  y: number;
  port: PortDef;
}

export class SchematicCanvas {
  selected: string | null = null;
  private badges = new Map<string, string>();
  private dragging: { comp: Placed; dx: number; dy: number } | null = null;
  private wiring: { from: PortPin; x: number; y: number } | null = null;

  constructor(
    private svg: SVGSVGElement,
    public model: CanvasModel,
    private callbacks: CanvasCallbacks,
  ) {
    svg.addEventListener("pointermove", (e) => this.pointerMove(e));
    svg.addEventListener("pointerup", (e) => this.pointerUp(e));
    svg.addEventListener("pointerdown", (e) => {
      if (e.target === svg) {
        this.select(null);
        this.render();
      }
    });
  }

  setModel(model: CanvasModel): void {
    this.model = model;
    this.selected = null;
    this.badges.clear();
    this.render();
  }

  select(name: string | null): void {
    this.selected = name;
    this.callbacks.onSelect(name);
  }

  /** Attach diagnostic texts next to the components they mention. */
  setDiagnostics(diagnostics: string[]): void {
    this.badges.clear();
    for (const comp of this.model.components) {
      const hits = diagnostics.filter((d) => d.includes(comp.name));
      if (hits.length) this.badges.set(comp.name, hits.join("\n"));
    }
    this.render();
  }

  private pins(comp: Placed): PortPin[] {
    const ports = this.model.portsOf(comp);
    const ins = ports.filter((p) => p.kind === "fluid" && p.direction === "in");
    const outs = ports.filter((p) => p.kind === "fluid" && p.direction === "out");
    const mechs = ports.filter((p) => p.kind === "mech");
    const pins: PortPin[] = [];
    ins.forEach((p, i) => pins.push({
      ref: `${comp.name}.${p.name}`, port: p,
      x: comp.x, y: comp.y + ((i + 1) * BOX_H) / (ins.length + 1),
    }));
    outs.forEach((p, i) => pins.push({
      ref: `${comp.name}.${p.name}`, port: p,
      x: comp.x + BOX_W, y: comp.y + ((i + 1) * BOX_H) / (outs.length + 1),
    }));
    mechs.forEach((p, i) => pins.push({
      ref: `${comp.name}.${p.name}`, port: p,
      x: comp.x + ((i + 1) * BOX_W) / (mechs.length + 1), y: comp.y + BOX_H,
    }));
    return pins;
  }

  private pinByRef(ref: string): PortPin | null {
    for (const comp of this.model.components) {
      for (const pin of this.pins(comp)) {
        if (pin.ref === ref) return pin;
      }
    }
    return null;
  }

  private svgPoint(e: PointerEvent): { x: number; y: number } {
    const rect = this.svg.getBoundingClientRect();
    const vb = this.svg.viewBox.baseVal;
    const sx = vb && vb.width ? vb.width / rect.width : 1;
    const sy = vb && vb.height ? vb.height / rect.height : 1;
    return { x: (e.clientX - rect.left) * sx, y: (e.clientY - rect.top) * sy };
  }

  private pointerMove(e: PointerEvent): void {
    const pt = this.svgPoint(e);
    if (this.dragging) {
      this.dragging.comp.x = pt.x - this.dragging.dx;
      this.dragging.comp.y = pt.y - this.dragging.dy;
      this.render();
    } else if (this.wiring) {
      this.wiring.x = pt.x;
      this.wiring.y = pt.y;
      this.render();
    }
  }

  private pointerUp(e: PointerEvent): void {
    if (this.dragging) {
      this.dragging = null;
      this.callbacks.onChange();
    }
    if (this.wiring) {
      const pt = this.svgPoint(e);
      const target = this.hitPort(pt.x, pt.y);
      const from = this.wiring.from;
      this.wiring = null;
      if (target && target.ref !== from.ref) {
        const check = this.model.checkWire(from.ref, target.ref);
        if (check.ok) {
          this.model.wire(from.ref, target.ref);
          this.callbacks.onChange();
        } else {
          this.callbacks.onHint(`refused: ${check.reason}`);
        }
      }
      this.render();
    }
  }

  private hitPort(x: number, y: number): PortPin | null {
    for (const comp of this.model.components) {
      for (const pin of this.pins(comp)) {
        if (Math.hypot(pin.x - x, pin.y - y) < 12) return pin;
      }
    }
    return null;
  }

  render(): void {
    this.svg.textContent = "";
    const defs = document.createElementNS(NS, "defs");
    defs.innerHTML =
      '<marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4" markerWidth="7" markerHeight="7" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#69707d"/></marker>';
    this.svg.appendChild(defs);

    for (const w of this.model.wires) {
      const a = this.pinByRef(w.from);
      const b = this.pinByRef(w.to);
      if (!a || !b) continue;
      const path = document.createElementNS(NS, "path");
      const mid = (a.x + b.x) / 2;
      path.setAttribute("d",
        `M${a.x},${a.y} C${mid},${a.y} ${mid},${b.y} ${b.x},${b.y}`);
      path.setAttribute("class",
        a.port.kind === "mech" ? "wire wire-mech" : "wire wire-fluid");
      if (a.port.kind === "fluid") path.setAttribute("marker-end", "url(#arrow)");
      path.addEventListener("dblclick", () => {
        this.model.unwire(w.from, w.to);
        this.callbacks.onChange();
        this.render();
      });
      this.svg.appendChild(path);
    }

    if (this.wiring) {
      const ghost = document.createElementNS(NS, "line");
      ghost.setAttribute("x1", String(this.wiring.from.x));
      ghost.setAttribute("y1", String(this.wiring.from.y));
      ghost.setAttribute("x2", String(this.wiring.x));
      ghost.setAttribute("y2", String(this.wiring.y));
      ghost.setAttribute("class", "wire wire-ghost");
      this.svg.appendChild(ghost);
    }

    for (const comp of this.model.components) {
      const g = document.createElementNS(NS, "g");
      g.setAttribute("class", "component" +
        (comp.name === this.selected ? " selected" : "") +
        (this.badges.has(comp.name) ? " flagged" : ""));
      const rect = document.createElementNS(NS, "rect");
      rect.setAttribute("x", String(comp.x));
      rect.setAttribute("y", String(comp.y));
      rect.setAttribute("width", String(BOX_W));
      rect.setAttribute("height", String(BOX_H));
      rect.setAttribute("rx", "8");
      g.appendChild(rect);

      const label = document.createElementNS(NS, "text");
      label.setAttribute("x", String(comp.x + BOX_W / 2));
      label.setAttribute("y", String(comp.y + 26));
      label.setAttribute("class", "comp-name");
      label.textContent = comp.name;
      g.appendChild(label);
      const fam = document.createElementNS(NS, "text");
      fam.setAttribute("x", String(comp.x + BOX_W / 2));
      fam.setAttribute("y", String(comp.y + 44));
      fam.setAttribute("class", "comp-family");
      fam.textContent = comp.family;
      g.appendChild(fam);

      const badge = this.badges.get(comp.name);
      if (badge) {
        const warn = document.createElementNS(NS, "text");
        warn.setAttribute("x", String(comp.x + BOX_W - 8));
        warn.setAttribute("y", String(comp.y + 14));
        warn.setAttribute("class", "comp-warning");
        warn.textContent = "!";
        const tip = document.createElementNS(NS, "title");
        tip.textContent = badge;
        warn.appendChild(tip);
        g.appendChild(warn);
      }

      rect.addEventListener("pointerdown", (e) => {
        e.stopPropagation();
        const pt = this.svgPoint(e as PointerEvent);
        this.dragging = { comp, dx: pt.x - comp.x, dy: pt.y - comp.y };
        this.select(comp.name);
        this.render();
      });

      for (const pin of this.pins(comp)) {
        const dot = document.createElementNS(NS, "circle");
        dot.setAttribute("cx", String(pin.x));
        dot.setAttribute("cy", String(pin.y));
        dot.setAttribute("r", "6");
        dot.setAttribute("class", `port port-${pin.port.kind}${
          this.model.portInUse(pin.ref) ? " port-used" : ""}`);
        const tip = document.createElementNS(NS, "title");
        tip.textContent = pin.ref;
        dot.appendChild(tip);
        dot.addEventListener("pointerdown", (e) => {
          e.stopPropagation();
          this.wiring = { from: pin, x: pin.x, y: pin.y };
        });
        g.appendChild(dot);
      }
      this.svg.appendChild(g);
    }
  }
}
