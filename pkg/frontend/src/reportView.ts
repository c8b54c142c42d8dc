import { svgLineChart } from "./charts.js";
import type {
  BenchReportPayload,
  BenchRunStatus,
  MmmbAggregates,
  MsibAggregates,
} from "./types.js";
import { MSIB_DIMENSION_LABELS, MSIB_DIMENSIONS } from "./types.js";

export const ABSENT = "—";

const MEMORY_COLUMNS: [string, string][] = [
  ["TextMemory", "Text Memory"],
  ["ImageMemory", "Image Memory"],
  ["MixedMemory", "Mixed Memory"],
  ["Average", "Average"],
];

/**
 * Render a run: a progress view while it executes, an error panel when it
 * failed, otherwise the score grids and degradation charts. Every rendered
 * number is the report payload value, stringified verbatim.
 */
export function renderBenchRun(container: HTMLElement, run: BenchRunStatus): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (run.status === "running") {
    const progress = doc.createElement("div");
    progress.className = "progress-view";
    const completed = run.progress?.completed ?? 0;
    const total = run.progress?.total ?? 0;
    progress.textContent = `run ${run.run_id} in progress: ${completed} / ${total} items`;
    container.appendChild(progress);
    return;
  }
  if (run.status === "failed" || !run.report) {
    const err = doc.createElement("div");
    err.className = "error-banner";
    err.textContent = `run ${run.run_id} failed: ${run.error ?? "unknown error"}`;
    container.appendChild(err);
    return;
  }
  if (run.status === "partial") {
    const note = doc.createElement("div");
    note.className = "partial-note";
    note.textContent = `partial results: ${run.error ?? "run aborted"}`;
    container.appendChild(note);
  }
  if (run.report.kind === "mmmb") renderMmmbReport(container, run.report);
  else renderMsibReport(container, run.report);
}

export function renderMmmbReport(container: HTMLElement, report: BenchReportPayload): void {
  const doc = container.ownerDocument;
  const aggregates = report.aggregates as MmmbAggregates;
  const table = doc.createElement("table");
  table.className = "score-grid mmmb-grid";
  const head = doc.createElement("tr");
  for (const label of ["Model", ...MEMORY_COLUMNS.map(([, l]) => l)]) {
    const th = doc.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  const row = doc.createElement("tr");
  const model = doc.createElement("td");
  model.textContent = String(report.config["model_name"] ?? "model");
  row.appendChild(model);
  for (const [key] of MEMORY_COLUMNS) {
    const td = doc.createElement("td");
    td.setAttribute("data-column", key);
    const value = aggregates.scores?.[key];
    td.textContent = value === undefined ? ABSENT : String(value);
    row.appendChild(td);
  }
  table.appendChild(row);
  container.appendChild(table);

  const charts = doc.createElement("div");
  charts.className = "degradation-charts";
  charts.appendChild(
    svgLineChart(doc, binsToPoints(aggregates.degradation?.acc_by_turn_distance), {
      title: "accuracy vs turn distance",
      xLabel: "turn distance",
    }),
  );
  charts.appendChild(
    svgLineChart(doc, binsToPoints(aggregates.degradation?.acc_by_num_images), {
      title: "accuracy vs images to recall",
      xLabel: "historical images",
    }),
  );
  container.appendChild(charts);
}

export function renderMsibReport(container: HTMLElement, report: BenchReportPayload): void {
  const doc = container.ownerDocument;
  const aggregates = report.aggregates as MsibAggregates;
  const table = doc.createElement("table");
  table.className = "score-grid msib-grid";
  const head = doc.createElement("tr");
  for (const label of ["", ...MSIB_DIMENSIONS.map((d) => MSIB_DIMENSION_LABELS[d]), "Overall"]) {
    const th = doc.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  const rows: [keyof import("./types.js").MsibRow, string][] = [
    ["content", "Content Quality"],
    ["speech", "Speech Quality"],
    ["average", "Average"],
  ];
  for (const [key, label] of rows) {
    const tr = doc.createElement("tr");
    const name = doc.createElement("td");
    name.textContent = label;
    tr.appendChild(name);
    for (const dim of MSIB_DIMENSIONS) {
      const td = doc.createElement("td");
      td.setAttribute("data-dimension", dim);
      td.setAttribute("data-row", key);
      const row = aggregates.dimensions?.[dim];
      td.textContent = row === undefined ? ABSENT : String(row[key]);
      tr.appendChild(td);
    }
    const overall = doc.createElement("td");
    overall.setAttribute("data-dimension", "Overall");
    overall.setAttribute("data-row", key);
    overall.textContent = aggregates.overall ? String(aggregates.overall[key]) : ABSENT;
    tr.appendChild(overall);
    table.appendChild(tr);
  }
  container.appendChild(table);
}

function binsToPoints(bins: Record<string, number> | undefined): { x: number; y: number }[] {
  if (!bins) return [];
  return Object.entries(bins)
    .map(([x, y]) => ({ x: Number(x), y }))
    .sort((a, b) => a.x - b.x);
}
