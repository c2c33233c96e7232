// Studio application: palette sidebar, schematic canvas, inspector,
// run controls (validate / design / simulate / sweep) and result plots.
// The client performs no physics; every number shown comes from the service.

import { ApiError, Client } from "./api";
import { SchematicCanvas } from "./canvas";
import { CanvasModel } from "./model";
import {
  ISP_SERIES,
  THRUST_SERIES,
  pressureSeries,
  renderSweepPlot,
  type Series,
} from "./plots";
import type {
  DofReport,
  Metrics,
  ModelFile,
  PaletteEntry,
  SweepPointBody,
} from "./types";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class StudioApp {
  client = new Client("");
  palette: PaletteEntry[] = [];
  model!: CanvasModel;
  canvas!: SchematicCanvas;
  lastSized: ModelFile | null = null;
  lastProvenance: Record<string, string> = {};
  lastSweep: SweepPointBody[] | null = null;
  previousSweep: SweepPointBody[] | null = null;
  sweepSeries: Series = THRUST_SERIES;
  sweepParamLabel = "";
  busy = false;

  async boot(): Promise<void> {
    try {
      this.palette = await this.client.components();
      el("offline-banner").hidden = true;
    } catch (err) {
      el("offline-banner").hidden = false;
      this.status(`service unreachable: ${(err as Error).message}`, "error");
      return;
    }
    this.model = CanvasModel.fromPalette(this.palette);
    this.canvas = new SchematicCanvas(
      el<HTMLElement>("canvas") as unknown as SVGSVGElement, this.model, {
        onSelect: () => this.renderInspector(),
        onChange: () => {
          this.renderInspector();
          this.status("model edited", "info");
        },
        onHint: (message) => this.status(message, "warn"),
      });
    this.renderPalette();
    this.canvas.render();
    await this.renderExamples();
    this.bindToolbar();
    this.status("ready", "info");
  }

  status(message: string, level: "info" | "warn" | "error"): void {
    const node = el("status-line");
    node.textContent = message;
    node.dataset.level = level;
  }

  renderPalette(): void {
    const list = el("palette-list");
    list.textContent = "";
    for (const entry of this.palette) {
      const li = document.createElement("li");
      const button = document.createElement("button");
      button.textContent = entry.family;
      button.title = entry.doc;
      button.addEventListener("click", () => {
        const name = this.freshName(entry.family);
        const params: Record<string, number | string> = {};
        for (const p of entry.params) {
          if (p.default !== null && p.default !== undefined
              && !Array.isArray(p.default)) {
            params[p.name] = p.default as number | string;
          }
        }
        this.model.place(entry.family, name, params);
        this.canvas.select(name);
        this.canvas.render();
        this.renderInspector();
      });
      li.appendChild(button);
      list.appendChild(li);
    }
  }

  freshName(family: string): string {
    let i = 1;
    while (this.model.components.some((c) => c.name === `${family}_${i}`)) i += 1;
    return `${family}_${i}`;
  }

  async renderExamples(): Promise<void> {
    const select = el<HTMLSelectElement>("example-select");
    const examples = await this.client.examples();
    for (const ex of examples) {
      const option = document.createElement("option");
      option.value = ex.name;
      option.textContent = ex.name;
      option.title = ex.description;
      select.appendChild(option);
    }
    el("load-example").addEventListener("click", async () => {
      if (!select.value) return;
      await this.guard(async () => {
        const file = await this.client.example(select.value);
        this.loadFile(file);
        this.status(`loaded example ${select.value}`, "info");
      });
    });
  }

  loadFile(file: ModelFile): void {
    this.model = CanvasModel.fromModelFile(file, this.palette);
    this.canvas.setModel(this.model);
    this.lastSized = file.sized ? file : null;
    this.lastProvenance = file.sized?.provenance ?? {};
    el<HTMLInputElement>("model-name").value = this.model.name;
    el<HTMLSelectElement>("mode-select").value = this.model.mode;
    this.renderInspector();
  }

  bindToolbar(): void {
    el<HTMLInputElement>("model-name").addEventListener("change", (e) => {
      this.model.name = (e.target as HTMLInputElement).value || "untitled";
    });
    el<HTMLSelectElement>("mode-select").addEventListener("change", (e) => {
      this.model.mode = (e.target as HTMLSelectElement).value as ModelFile["mode"];
    });
    el("btn-validate").addEventListener("click", () => this.doValidate());
    el("btn-design").addEventListener("click", () => this.doDesign());
    el("btn-simulate").addEventListener("click", () => this.doSimulate());
    el("btn-sweep").addEventListener("click", () => this.doSweep());
    el("btn-save").addEventListener("click", () => this.download());
    el<HTMLInputElement>("file-input").addEventListener("change", (e) => {
      const input = e.target as HTMLInputElement;
      const file = input.files?.[0];
      if (!file) return;
      file.text().then((text) => {
        this.loadFile(JSON.parse(text) as ModelFile);
        this.status(`loaded ${file.name}`, "info");
      }).catch((err) => this.status(String(err), "error"));
      input.value = "";
    });
    el<HTMLSelectElement>("series-select").addEventListener("change", (e) => {
      const v = (e.target as HTMLSelectElement).value;
      if (v === "thrust") this.sweepSeries = THRUST_SERIES;
      else if (v === "isp") this.sweepSeries = ISP_SERIES;
      else this.sweepSeries = pressureSeries(v);
      this.renderPlot();
    });
  }

  async guard(work: () => Promise<void>): Promise<void> {
    if (this.busy) {
      this.status("a solve is already running", "warn");
      return;
    }
    this.busy = true;
    try {
      await work();
      el("offline-banner").hidden = true;
    } catch (err) {
      if (err instanceof ApiError) {
        if (err.status === 0) el("offline-banner").hidden = false;
        const detail = err.diagnostics.length
          ? `${err.message}: ${err.diagnostics[0]}` : err.message;
        this.status(detail, "error");
        this.renderDiagnostics(err.diagnostics);
        this.canvas.setDiagnostics(err.diagnostics);
      } else {
        this.status((err as Error).message, "error");
      }
    } finally {
      this.busy = false;
    }
  }

  async doValidate(): Promise<void> {
    await this.guard(async () => {
      const report = await this.client.validate(this.model.toModelFile());
      this.renderReport(report);
      this.canvas.setDiagnostics(report.diagnostics);
      this.status(`${report.status} (${report.n_vars} unknowns, `
        + `${report.n_eqs} equations)`,
        report.status === "well_posed" ? "info" : "warn");
    });
  }

  async doDesign(): Promise<void> {
    await this.guard(async () => {
      const body = await this.client.design(this.model.toModelFile());
      this.lastSized = body.sized_model;
      this.lastProvenance = body.provenance;
      this.renderMetrics(body.metrics,
        `design converged in ${body.result.iterations} iterations`);
      this.canvas.setDiagnostics([]);
      this.renderInspector();
      this.status("design complete; geometry sized and frozen", "info");
    });
  }

  async doSimulate(): Promise<void> {
    await this.guard(async () => {
      const file = this.simulationModel();
      const body = await this.client.simulate(file);
      this.renderMetrics(body.metrics,
        `off-design converged in ${body.result.iterations} iterations`);
      this.status("simulation complete", "info");
    });
  }

  simulationModel(): ModelFile {
    if (this.model.mode === "offdesign") return this.model.toModelFile();
    if (this.lastSized) return this.lastSized;
    throw new Error("design first (or switch the canvas to off-design mode)");
  }

  async doSweep(): Promise<void> {
    await this.guard(async () => {
      const param = el<HTMLInputElement>("sweep-param").value.trim();
      const from = Number(el<HTMLInputElement>("sweep-from").value);
      const to = Number(el<HTMLInputElement>("sweep-to").value);
      const steps = Number(el<HTMLInputElement>("sweep-steps").value);
      const free = el<HTMLInputElement>("sweep-free").value.trim() || undefined;
      if (!param || !Number.isFinite(from) || !Number.isFinite(to)
          || !Number.isInteger(steps) || steps < 1) {
        throw new Error("sweep needs a parameter, numeric bounds and steps >= 1");
      }
      const values = steps === 1 ? [from]
        : Array.from({ length: steps },
                     (_, i) => from + (i * (to - from)) / (steps - 1));
      const { job_id } = await this.client.sweepAsync(
        this.simulationModel(), param, values, free);
      const progress = el("sweep-progress");
      let job = await this.client.job(job_id);
      while (!job.done) {
        progress.textContent =
          `sweeping ${job.progress.completed}/${job.progress.total}`;
        await new Promise((resolve) => setTimeout(resolve, 150));
        job = await this.client.job(job_id);
      }
      progress.textContent = "";
      if (job.error) throw new Error(job.error);
      this.previousSweep = this.lastSweep;
      this.lastSweep = job.points;
      this.sweepParamLabel = param;
      const failed = job.points.filter((p) => p.status !== "converged").length;
      this.renderPlot();
      this.status(failed
        ? `sweep done: ${failed} of ${job.points.length} points failed`
        : `sweep done: ${job.points.length} points converged`,
        failed ? "warn" : "info");
    });
  }

  renderPlot(): void {
    if (!this.lastSweep) return;
    el("plot-container").innerHTML = renderSweepPlot({
      points: this.lastSweep,
      series: this.sweepSeries,
      paramLabel: this.sweepParamLabel,
      overlay: this.previousSweep ?? undefined,
    });
  }

  renderMetrics(metrics: Metrics, heading: string): void {
    const target = el("results-body");
    const rows: [string, string][] = [
      ["thrust", `${metrics.thrust.toFixed(1)} N`],
      ["specific impulse", `${metrics.isp.toFixed(1)} s`],
      ["mixture ratio", metrics.of_ratio === null ? "n/a"
        : metrics.of_ratio.toFixed(3)],
      ["total mass flow", `${metrics.mdot_total.toFixed(3)} kg/s`],
      ["shaft imbalance", `${metrics.power_balance_residual.toExponential(2)} W`],
    ];
    target.innerHTML = `<h3>${heading}</h3><table>` + rows
      .map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`).join("")
      + "</table>" + (metrics.warnings.length
        ? `<ul class="warnings">${metrics.warnings
            .map((w) => `<li>${w}</li>`).join("")}</ul>` : "");
  }

  renderReport(report: DofReport): void {
    this.renderDiagnostics(report.diagnostics);
  }

  renderDiagnostics(diagnostics: string[]): void {
    el("results-body").innerHTML = diagnostics.length
      ? `<ul class="diagnostics">${diagnostics
          .map((d) => `<li>${d}</li>`).join("")}</ul>`
      : "<p>no diagnostics</p>";
  }

  renderInspector(): void {
    const box = el("inspector");
    const comp = this.model.components.find(
      (c) => c.name === this.canvas.selected) ?? null;
    if (!comp) {
      box.innerHTML = "<p>select a component</p>";
      return;
    }
    const entry = this.model.family(comp.family);
    const rows = entry.params.map((p) => {
      const value = comp.params[p.name];
      const shown = value === undefined ? "" : Array.isArray(value)
        ? JSON.stringify(value) : String(value);
      const badge = this.lastProvenance[`${comp.name}.${p.name}`];
      return `<tr><td title="${p.role}, ${p.unit}">${p.name}</td>`
        + `<td><input data-param="${p.name}" value="${shown}"`
        + ` placeholder="${p.required ? "required" : ""}"/></td>`
        + `<td>${badge ? `<span class="badge badge-${badge}">${badge}</span>` : ""}</td></tr>`;
    }).join("");
    box.innerHTML = `<h3>${comp.name} <small>${comp.family}</small></h3>`
      + `<p class="doc">${entry.doc}</p><table>${rows}</table>`
      + `<button id="inspector-remove">remove component</button>`;
    box.querySelectorAll<HTMLInputElement>("input[data-param]").forEach((input) => {
      input.addEventListener("change", () => {
        const key = input.dataset.param as string;
        const text = input.value.trim();
        if (!text) {
          delete comp.params[key];
        } else if (text === "free") {
          comp.params[key] = "free";
        } else if (text.startsWith("[")) {
          comp.params[key] = JSON.parse(text) as number[];
        } else if (!Number.isNaN(Number(text))) {
          comp.params[key] = Number(text);
        } else {
          comp.params[key] = text;
        }
        this.status(`${comp.name}.${key} updated`, "info");
      });
    });
    el("inspector-remove").addEventListener("click", () => {
      this.model.remove(comp.name);
      this.canvas.select(null);
      this.canvas.render();
      this.renderInspector();
    });
  }

  download(): void {
    const blob = new Blob(
      [JSON.stringify(this.model.toModelFile(), null, 2) + "\n"],
      { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `${this.model.name}.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  }
}
