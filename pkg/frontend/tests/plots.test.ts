import { describe, expect, it } from "vitest";

import { ISP_SERIES, pressureSeries, renderSweepPlot, THRUST_SERIES } from "../src/plots";
import type { Metrics, SweepPointBody } from "../src/types";

function metrics(thrust: number, isp: number): Metrics {
  return { thrust, isp, of_ratio: 2.3, power_balance_residual: 0,
           mdot_total: 10, warnings: [] };
}

function converged(value: number, thrust: number): SweepPointBody {
  return { value, status: "converged", residual_norm: 1e-12, error: null,
           metrics: metrics(thrust, thrust / 98.0665),
           solution: { "chamber.out.p0": 2e6 * (value / 2.4e6) } };
}

function failed(value: number): SweepPointBody {
  return { value, status: "failed", solution: null, metrics: null,
           residual_norm: null, error: "line_search_stall" };
}

describe("sweep plot rendering", () => {
  const points = [
    converged(1.0, 100), converged(2.0, 120), failed(3.0),
    converged(4.0, 160), converged(5.0, 180),
  ];

  it("marks every converged point and each failure distinctly", () => {
    const svg = renderSweepPlot({ points, series: THRUST_SERIES,
                                  paramLabel: "tank pressure" });
    expect(svg.match(/class="series-point"/g)?.length).toBe(4);
    expect(svg.match(/class="failed-point"/g)?.length).toBe(1);
    expect(svg).toContain("line_search_stall");
  });

  it("renders nine points with failures visibly marked", () => {
    const nine = Array.from({ length: 9 }, (_, i) =>
      i === 4 ? failed(i + 1) : converged(i + 1, 100 + 10 * i));
    const svg = renderSweepPlot({ points: nine, series: THRUST_SERIES,
                                  paramLabel: "p" });
    expect(svg.match(/class="series-point"/g)?.length).toBe(8);
    expect(svg.match(/class="failed-point"/g)?.length).toBe(1);
  });

  it("plots alternative series", () => {
    for (const series of [ISP_SERIES, pressureSeries("chamber.out.p0")]) {
      const svg = renderSweepPlot({ points, series, paramLabel: "x" });
      expect(svg).toContain(series.label);
      expect(svg.match(/class="series-point"/g)?.length).toBe(4);
    }
  });

  it("draws the previous run as a dashed overlay", () => {
    const previous = points.map((p) => p.status === "converged"
      ? converged(p.value, (p.metrics as Metrics).thrust * 0.9) : p);
    const svg = renderSweepPlot({ points, series: THRUST_SERIES,
                                  paramLabel: "x", overlay: previous });
    expect(svg.match(/class="overlay-point"/g)?.length).toBe(4);
    expect(svg).toContain("stroke-dasharray");
  });

  it("is deterministic", () => {
    const a = renderSweepPlot({ points, series: THRUST_SERIES, paramLabel: "x" });
    const b = renderSweepPlot({ points, series: THRUST_SERIES, paramLabel: "x" });
    expect(a).toBe(b);
  });
});
