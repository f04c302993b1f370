/** Log-scale wealth chart built on uPlot, with ruin-year markers. */

import uPlot from "uplot";
import "uplot/dist/uPlot.min.css";

import type { ChartData, RuinMarker } from "./results";
import { compactMoney } from "./results";

const SERIES_COLORS = ["#c0392b", "#e67e22", "#2c3e50", "#27ae60", "#2980b9"];

export interface WealthChart {
  destroy(): void;
}

export function createWealthChart(
  host: HTMLElement,
  data: ChartData,
  markers: RuinMarker[],
): WealthChart {
  const width = Math.max(host.clientWidth || 720, 320);
  const markerYears = new Set(markers.map((m) => m.year));

  const options: uPlot.Options = {
    width,
    height: 420,
    scales: {
      x: { time: false },
      y: { distr: 3 }, // log10: final wealth spans orders of magnitude
    },
    axes: [
      { label: "year" },
      {
        label: "wealth",
        values: (_u, ticks) => ticks.map(compactMoney),
      },
    ],
    series: [
      { label: "year" },
      ...data.labels.map((label, i) => ({
        label,
        stroke: SERIES_COLORS[i % SERIES_COLORS.length],
        width: i === 2 ? 2.5 : 1.5, // median emphasized
        points: { show: false },
      })),
    ],
    hooks: {
      draw: [
        (u) => {
          if (!markerYears.size) return;
          const ctx = u.ctx;
          ctx.save();
          ctx.strokeStyle = "#c0392b";
          ctx.setLineDash([6, 6]);
          for (const year of markerYears) {
            const x = u.valToPos(year, "x", true);
            ctx.beginPath();
            ctx.moveTo(x, u.bbox.top);
            ctx.lineTo(x, u.bbox.top + u.bbox.height);
            ctx.stroke();
          }
          ctx.restore();
        },
      ],
    },
  };

  const aligned: uPlot.AlignedData = [data.years, ...data.series] as uPlot.AlignedData;
  const plot = new uPlot(options, aligned, host);
  return { destroy: () => plot.destroy() };
}
