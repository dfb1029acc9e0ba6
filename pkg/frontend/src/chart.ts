// Overlaid two-line SVG chart for a reference/target pair. Both lines share
// one value scale so a baseline shift or noise difference stays visible.

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartSize {
  width: number;
  height: number;
  pad: number;
}

export const CARD_CHART: ChartSize = { width: 260, height: 72, pad: 4 };
export const DETAIL_CHART: ChartSize = { width: 560, height: 180, pad: 8 };

export function polylinePoints(values: number[], size: ChartSize, lo: number, hi: number): string {
  const { width, height, pad } = size;
  const span = hi - lo;
  const xStep = values.length > 1 ? (width - 2 * pad) / (values.length - 1) : 0;
  return values
    .map((value, i) => {
      const x = pad + i * xStep;
      // flat series (span 0) sits on the vertical midline
      const unit = span > 0 ? (value - lo) / span : 0.5;
      const y = height - pad - unit * (height - 2 * pad);
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
}

export function pairChart(ref: number[], tgt: number[], size: ChartSize = CARD_CHART): SVGSVGElement {
  const lo = Math.min(...ref, ...tgt);
  const hi = Math.max(...ref, ...tgt);

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${size.width} ${size.height}`);
  svg.setAttribute("preserveAspectRatio", "none");
  svg.setAttribute("class", "pair-chart");
  svg.setAttribute("role", "img");
  svg.setAttribute("aria-label", "reference and target series");

  for (const [cls, values] of [
    ["ref-line", ref],
    ["tgt-line", tgt],
  ] as const) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("class", cls);
    line.setAttribute("points", polylinePoints(values, size, lo, hi));
    line.setAttribute("fill", "none");
    svg.appendChild(line);
  }
  return svg;
}
