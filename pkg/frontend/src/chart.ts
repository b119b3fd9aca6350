/**
 * Minimal canvas line chart for the best-fitness-per-generation series.
 * No interaction, no dependencies: the chart is passive progress
 * feedback and freezes where the run stops.
 */

export interface ChartPoint {
  generation: number;
  fitness: number;
}

export class ProgressChart {
  private ctx: CanvasRenderingContext2D;

  constructor(
    private canvas: HTMLCanvasElement,
    private targetFitness: number | null = null,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  render(series: ChartPoint[]): void {
    const { width: w, height: h } = this.canvas;
    const ctx = this.ctx;
    const pad = 34;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#fafafa";
    ctx.fillRect(0, 0, w, h);
    ctx.strokeStyle = "#999";
    ctx.strokeRect(pad, pad / 2, w - pad - 8, h - pad - pad / 2);
    if (series.length === 0) return;
    const maxGen = Math.max(series[series.length - 1].generation, 1);
    const maxFit = this.targetFitness ?? Math.max(...series.map((p) => p.fitness), 1);
    const x = (g: number) => pad + ((w - pad - 8) * g) / maxGen;
    const y = (f: number) => h - pad - ((h - pad - pad / 2) * f) / maxFit;
    ctx.beginPath();
    ctx.strokeStyle = "#1668b4";
    ctx.lineWidth = 1.6;
    series.forEach((p, i) => {
      if (i === 0) ctx.moveTo(x(p.generation), y(p.fitness));
      else ctx.lineTo(x(p.generation), y(p.fitness));
    });
    ctx.stroke();
    if (this.targetFitness !== null) {
      ctx.strokeStyle = "#c33";
      ctx.setLineDash([4, 4]);
      ctx.beginPath();
      ctx.moveTo(pad, y(this.targetFitness));
      ctx.lineTo(w - 8, y(this.targetFitness));
      ctx.stroke();
      ctx.setLineDash([]);
    }
    ctx.fillStyle = "#333";
    ctx.font = "11px sans-serif";
    const last = series[series.length - 1];
    ctx.fillText(`gen ${last.generation}`, w - pad - 52, h - 6);
    ctx.fillText(`best ${last.fitness}`, 4, 14);
  }
}
