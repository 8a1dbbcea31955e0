// Chart builders: pure functions from stats documents to SVG markup.
// No recomputation of GA math happens here; values are rendered verbatim
// (radar labels carry data-value attributes with the raw numbers to three
// decimals so tests can compare against the stats endpoint).

import type { BarDoc } from "./api";

const HUE_COLORS: Record<string, string> = {
  red: "#c3272b",
  yellow: "#e8b114",
  blue: "#2962b8",
  orange: "#e67e22",
  green: "#279a50",
  violet: "#7d3c98",
};

const FALLBACK_COLORS = [
  "#4c6ef5", "#12b886", "#e8590c", "#ae3ec9", "#f59f00",
  "#0ca678", "#d6336c", "#74b816", "#1098ad", "#7048e8",
];

export function colorFor(token: string, index = 0): string {
  return HUE_COLORS[token] ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length]!;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Radar of one attribute's normalized weights. */
export function radarSvg(attr: string, values: Record<string, number>, size = 230): string {
  const tokens = Object.keys(values);
  const cx = size / 2;
  const cy = size / 2 + 6;
  const radius = size / 2 - 34;
  const max = Math.max(...Object.values(values), 1e-9);

  const axisAngle = (k: number) => -Math.PI / 2 + (2 * Math.PI * k) / tokens.length;
  const parts: string[] = [
    `<svg class="chart radar" data-attr="${esc(attr)}" viewBox="0 0 ${size} ${size + 10}" role="img">`,
    `<text class="chart-title" x="${cx}" y="12" text-anchor="middle">${esc(attr)}</text>`,
  ];
  for (const ring of [0.25, 0.5, 0.75, 1.0]) {
    const pts = tokens
      .map((_, k) => {
        const a = axisAngle(k);
        return `${cx + radius * ring * Math.cos(a)},${cy + radius * ring * Math.sin(a)}`;
      })
      .join(" ");
    parts.push(`<polygon class="radar-ring" points="${pts}"/>`);
  }
  const dataPts: string[] = [];
  tokens.forEach((token, k) => {
    const a = axisAngle(k);
    const value = values[token] ?? 0;
    const r = (radius * value) / max;
    dataPts.push(`${cx + r * Math.cos(a)},${cy + r * Math.sin(a)}`);
    const lx = cx + (radius + 12) * Math.cos(a);
    const ly = cy + (radius + 12) * Math.sin(a);
    parts.push(
      `<line class="radar-axis" x1="${cx}" y1="${cy}" x2="${cx + radius * Math.cos(a)}" y2="${cy + radius * Math.sin(a)}"/>`,
      `<text class="radar-label" data-axis="${esc(token)}" data-value="${value.toFixed(3)}" ` +
        `x="${lx}" y="${ly}" text-anchor="middle" fill="${colorFor(token, k)}">` +
        `${esc(token)} ${value.toFixed(3)}</text>`,
    );
  });
  parts.push(`<polygon class="radar-data" points="${dataPts.join(" ")}"/>`, "</svg>");
  return parts.join("");
}

/** Bar panel for one continuous attribute: histogram + mean and sigma band. */
export function barSvg(attr: string, bar: BarDoc, labels: [string, string], size = 230): string {
  const width = size;
  const height = 110;
  const plotTop = 20;
  const plotBottom = height - 18;
  const plotHeight = plotBottom - plotTop;
  const maxCount = Math.max(...bar.hist, 1);
  const binWidth = width / bar.hist.length;
  const sigma = Math.sqrt(bar.var);

  const parts: string[] = [
    `<svg class="chart bars" data-attr="${esc(attr)}" viewBox="0 0 ${width} ${height}" role="img">`,
    `<text class="chart-title" x="${width / 2}" y="12" text-anchor="middle">` +
      `${esc(attr)}  mean ${bar.mean.toFixed(2)} sd ${sigma.toFixed(2)}</text>`,
  ];
  bar.hist.forEach((count, k) => {
    const h = (count / maxCount) * plotHeight;
    parts.push(
      `<rect class="hist-bin" data-bin="${k}" data-count="${count}" ` +
        `x="${k * binWidth + 1}" y="${plotBottom - h}" width="${binWidth - 2}" height="${h}"/>`,
    );
  });
  const bandX = Math.max(0, (bar.mean - sigma) * width);
  const bandW = Math.min(width, (bar.mean + sigma) * width) - bandX;
  parts.push(
    `<rect class="sigma-band" x="${bandX}" y="${plotTop}" width="${bandW}" height="${plotHeight}"/>`,
    `<line class="mean-line" data-mean="${bar.mean.toFixed(3)}" ` +
      `x1="${bar.mean * width}" y1="${plotTop}" x2="${bar.mean * width}" y2="${plotBottom}"/>`,
    `<text class="axis-label" x="2" y="${height - 4}">${esc(labels[0])}</text>`,
    `<text class="axis-label" x="${width - 2}" y="${height - 4}" text-anchor="end">${esc(labels[1])}</text>`,
    "</svg>",
  );
  return parts.join("");
}

/** Stacked stream of one attribute's normalized weights across iterations. */
export function streamSvg(
  attr: string,
  series: Record<string, number[]>,
  width = 480,
  height = 150,
): string {
  const tokens = Object.keys(series);
  const iterations = series[tokens[0]!]?.length ?? 0;
  const plotTop = 18;
  const plotHeight = height - plotTop - 16;
  const x = (t: number) => (iterations === 1 ? width / 2 : (t / (iterations - 1)) * width);

  const parts: string[] = [
    `<svg class="chart stream" data-attr="${esc(attr)}" data-iterations="${iterations}" ` +
      `viewBox="0 0 ${width} ${height}" role="img">`,
    `<text class="chart-title" x="${width / 2}" y="12" text-anchor="middle">${esc(attr)} over iterations</text>`,
  ];
  // cumulative stacking, bottom to top
  const base = new Array<number>(iterations).fill(0);
  tokens.forEach((token, k) => {
    const values = series[token]!;
    const lower = [...base];
    for (let t = 0; t < iterations; t++) base[t] = (base[t] ?? 0) + (values[t] ?? 0);
    const upperPts = Array.from({ length: iterations }, (_, t) =>
      `${x(t)},${plotTop + plotHeight * (1 - (base[t] ?? 0))}`);
    const lowerPts = Array.from({ length: iterations }, (_, t) =>
      `${x(iterations - 1 - t)},${plotTop + plotHeight * (1 - (lower[iterations - 1 - t] ?? 0))}`);
    parts.push(
      `<polygon class="stream-band" data-token="${esc(token)}" fill="${colorFor(token, k)}" ` +
        `points="${upperPts.join(" ")} ${lowerPts.join(" ")}"/>`,
    );
  });
  for (let t = 0; t < iterations; t++) {
    parts.push(
      `<text class="axis-label stream-tick" x="${x(t)}" y="${height - 2}" text-anchor="middle">${t}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
