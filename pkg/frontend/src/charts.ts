// Hand-rolled SVG charts: every datum carries its payload value in data-x /
// data-y attributes, so tests (and humans) can check the rendered numbers
// against the report verbatim.

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartPoint {
  x: number;
  y: number;
}

export interface LineChartOptions {
  width?: number;
  height?: number;
  pad?: number;
  yMax?: number;
  title?: string;
  xLabel?: string;
}

export function svgLineChart(
  doc: Document,
  points: ChartPoint[],
  options: LineChartOptions = {},
): SVGSVGElement {
  const width = options.width ?? 360;
  const height = options.height ?? 220;
  const pad = options.pad ?? 32;
  const yMax = options.yMax ?? 100;
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "line-chart");

  const sorted = [...points].sort((a, b) => a.x - b.x);
  const xs = sorted.map((p) => p.x);
  const xMin = Math.min(...xs, 0);
  const xMax = Math.max(...xs, xMin + 1);
  const plotW = width - 2 * pad;
  const plotH = height - 2 * pad;
  const px = (x: number) => pad + ((x - xMin) / (xMax - xMin)) * plotW;
  const py = (y: number) => pad + (1 - y / yMax) * plotH;

  const axes = doc.createElementNS(SVG_NS, "path");
  axes.setAttribute(
    "d",
    `M ${pad} ${pad} L ${pad} ${height - pad} L ${width - pad} ${height - pad}`,
  );
  axes.setAttribute("class", "axes");
  axes.setAttribute("fill", "none");
  axes.setAttribute("stroke", "currentColor");
  svg.appendChild(axes);

  if (sorted.length > 1) {
    const line = doc.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", sorted.map((p) => `${px(p.x)},${py(p.y)}`).join(" "));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.appendChild(line);
  }
  for (const p of sorted) {
    const dot = doc.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(px(p.x)));
    dot.setAttribute("cy", String(py(p.y)));
    dot.setAttribute("r", "3.5");
    dot.setAttribute("class", "datum");
    dot.setAttribute("data-x", String(p.x));
    dot.setAttribute("data-y", String(p.y));
    svg.appendChild(dot);
  }
  if (options.title) {
    const title = doc.createElementNS(SVG_NS, "text");
    title.setAttribute("x", String(width / 2));
    title.setAttribute("y", "16");
    title.setAttribute("text-anchor", "middle");
    title.setAttribute("class", "chart-title");
    title.textContent = options.title;
    svg.appendChild(title);
  }
  if (options.xLabel) {
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(width / 2));
    label.setAttribute("y", String(height - 6));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "chart-xlabel");
    label.textContent = options.xLabel;
    svg.appendChild(label);
  }
  return svg;
}

/** y-pixel for a value with the same scale the chart uses; test helper. */
export function yPixelFor(value: number, options: LineChartOptions = {}): number {
  const height = options.height ?? 220;
  const pad = options.pad ?? 32;
  const yMax = options.yMax ?? 100;
  return pad + (1 - value / yMax) * (height - 2 * pad);
}
