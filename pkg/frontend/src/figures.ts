/**
 * The five figure kinds rendered from holder-hj CSV artifacts:
 *
 *   heatmap         u_<n>.csv            value-function heatmap
 *   arcs            arc_<n>.csv          extracted arcs against t^gamma
 *   lipschitz       lipschitz.csv        Lipschitz constant vs n bars
 *   holder-fit      holder_fit.csv       log-log increments + slope lines
 *   bridge-scaling  bridge_scaling.csv   bridge energy vs horizon, log-log
 *
 * Figures only read the documented schemas and re-plot stored numbers;
 * nothing numeric is recomputed here (reference slopes and fitted
 * exponents all arrive through the CSVs).
 */

import { existsSync, mkdirSync, readFileSync, readdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import { column, readNumericCsv, NumericTable } from './csv';
import { encodePng } from './png';
import {
  BLACK,
  Canvas,
  Color,
  GLYPH_H,
  GLYPH_W,
  GRAY,
  LIGHT_GRAY,
  SERIES_COLORS,
  viridis,
} from './raster';

export const FIGURE_KINDS = [
  'heatmap',
  'arcs',
  'lipschitz',
  'holder-fit',
  'bridge-scaling',
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface RenderResult {
  written: string[];
  skipped: { kind: FigureKind; reason: string }[];
}

const WIDTH = 900;
const HEIGHT = 640;
const MARGIN = { left: 80, right: 110, top: 50, bottom: 60 };

interface Frame {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  xLog: boolean;
  yLog: boolean;
}

function plotArea() {
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    w: WIDTH - MARGIN.left - MARGIN.right,
    h: HEIGHT - MARGIN.top - MARGIN.bottom,
  };
}

function mapX(frame: Frame, x: number): number {
  const { x0, w } = plotArea();
  const [lo, hi] = frame.xLog
    ? [Math.log(frame.xMin), Math.log(frame.xMax)]
    : [frame.xMin, frame.xMax];
  const v = frame.xLog ? Math.log(x) : x;
  return x0 + ((v - lo) / (hi - lo)) * w;
}

function mapY(frame: Frame, y: number): number {
  const { y0, h } = plotArea();
  const [lo, hi] = frame.yLog
    ? [Math.log(frame.yMin), Math.log(frame.yMax)]
    : [frame.yMin, frame.yMax];
  const v = frame.yLog ? Math.log(y) : y;
  return y0 + h - ((v - lo) / (hi - lo)) * h;
}

function fmt(v: number): string {
  if (v === 0) return '0';
  const abs = Math.abs(v);
  if (abs >= 0.01 && abs < 10000) {
    return String(Number(v.toPrecision(3)));
  }
  return v.toExponential(1).replace('e', 'E');
}

function ticks(lo: number, hi: number, log: boolean, count = 5): number[] {
  if (log) {
    const a = Math.log10(lo);
    const b = Math.log10(hi);
    const out: number[] = [];
    for (let i = 0; i < count; i++) {
      out.push(10 ** (a + ((b - a) * i) / (count - 1)));
    }
    return out;
  }
  const out: number[] = [];
  for (let i = 0; i < count; i++) {
    out.push(lo + ((hi - lo) * i) / (count - 1));
  }
  return out;
}

function drawFrame(
  canvas: Canvas,
  frame: Frame,
  title: string,
  xlabel: string,
  ylabel: string,
): void {
  const { x0, y0, w, h } = plotArea();
  canvas.text(x0, y0 - 3 * GLYPH_H, title, BLACK, 2);
  for (const tx of ticks(frame.xMin, frame.xMax, frame.xLog)) {
    const px = mapX(frame, tx);
    canvas.line(px, y0, px, y0 + h, LIGHT_GRAY);
    const label = fmt(tx);
    canvas.text(px - canvas.textWidth(label) / 2, y0 + h + 6, label);
  }
  for (const ty of ticks(frame.yMin, frame.yMax, frame.yLog)) {
    const py = mapY(frame, ty);
    canvas.line(x0, py, x0 + w, py, LIGHT_GRAY);
    const label = fmt(ty);
    canvas.text(x0 - canvas.textWidth(label) - 6, py - GLYPH_H / 2, label);
  }
  canvas.line(x0, y0, x0, y0 + h, BLACK);
  canvas.line(x0, y0 + h, x0 + w, y0 + h, BLACK);
  canvas.text(x0 + w / 2 - canvas.textWidth(xlabel) / 2, y0 + h + 3 * GLYPH_H, xlabel);
  canvas.text(x0, y0 - GLYPH_H - 4, ylabel);
}

// spread-based Math.min overflows the stack on large grids
function arrayMin(values: number[]): number {
  let out = Infinity;
  for (const v of values) if (v < out) out = v;
  return out;
}

function arrayMax(values: number[]): number {
  let out = -Infinity;
  for (const v of values) if (v > out) out = v;
  return out;
}

// ---------------------------------------------------------------------------
// individual figures

export function renderHeatmap(table: NumericTable, n: number): Buffer {
  const t = column(table, 't');
  const x = column(table, 'x');
  const u = column(table, 'u');
  const tVals = Array.from(new Set(t)).sort((a, b) => a - b);
  const xVals = Array.from(new Set(x)).sort((a, b) => a - b);
  const nt = tVals.length;
  const nx = xVals.length;
  const uMin = arrayMin(u);
  const uMax = arrayMax(u);
  const span = uMax > uMin ? uMax - uMin : 1;

  const canvas = new Canvas(WIDTH, HEIGHT);
  const frame: Frame = {
    xMin: xVals[0],
    xMax: xVals[nx - 1],
    yMin: tVals[0],
    yMax: tVals[nt - 1],
    xLog: false,
    yLog: false,
  };
  const { x0, y0, w, h } = plotArea();
  // rows arrive t-major: u[k * nx + i]
  for (let py = 0; py < h; py++) {
    const k = Math.min(nt - 1, Math.floor(((h - 1 - py) / h) * nt));
    for (let px = 0; px < w; px++) {
      const i = Math.min(nx - 1, Math.floor((px / w) * nx));
      const value = u[k * nx + i];
      canvas.set(x0 + px, y0 + py, viridis((value - uMin) / span));
    }
  }
  drawFrame(canvas, frame, `VALUE FUNCTION U_${n}`, 'X', 'T');

  // colorbar
  const cbX = x0 + w + 24;
  for (let py = 0; py < h; py++) {
    const v = (h - 1 - py) / (h - 1);
    for (let dx = 0; dx < 16; dx++) {
      canvas.set(cbX + dx, y0 + py, viridis(v));
    }
  }
  canvas.text(cbX, y0 - GLYPH_H - 4, fmt(uMax));
  canvas.text(cbX, y0 + h + 6, fmt(uMin));
  return encodePng(WIDTH, HEIGHT, canvas.data);
}

export function renderArcs(
  arcs: Map<number, { t: number[]; x: number[] }>,
  gamma: number,
): Buffer {
  const canvas = new Canvas(WIDTH, HEIGHT);
  const allX: number[] = [];
  for (const { x } of arcs.values()) allX.push(...x);
  const frame: Frame = {
    xMin: 0,
    xMax: 1,
    yMin: Math.min(0, arrayMin(allX)),
    yMax: Math.max(1, arrayMax(allX)) * 1.05,
    xLog: false,
    yLog: false,
  };
  drawFrame(canvas, frame, 'EXTRACTED ARCS VS T^GAMMA', 'T', 'X');

  // reference arc t^gamma, dashed
  const steps = 240;
  for (let i = 0; i < steps; i += 2) {
    const t0 = i / steps;
    const t1 = (i + 1) / steps;
    canvas.line(
      mapX(frame, t0),
      mapY(frame, t0 ** gamma),
      mapX(frame, t1),
      mapY(frame, t1 ** gamma),
      BLACK,
    );
  }

  const ns = Array.from(arcs.keys()).sort((a, b) => a - b);
  ns.forEach((n, idx) => {
    const color = SERIES_COLORS[idx % SERIES_COLORS.length];
    const { t, x } = arcs.get(n)!;
    for (let i = 1; i < t.length; i++) {
      canvas.line(
        mapX(frame, t[i - 1]),
        mapY(frame, x[i - 1]),
        mapX(frame, t[i]),
        mapY(frame, x[i]),
        color,
        2,
      );
    }
  });

  // legend
  const { x0, y0 } = plotArea();
  let ly = y0 + 10;
  ns.forEach((n, idx) => {
    const color = SERIES_COLORS[idx % SERIES_COLORS.length];
    canvas.fillRect(x0 + 12, ly, 18, 3, color);
    canvas.text(x0 + 36, ly - 2, `N=${n}`);
    ly += GLYPH_H + 4;
  });
  canvas.fillRect(x0 + 12, ly, 18, 3, BLACK);
  canvas.text(x0 + 36, ly - 2, `T^${fmt(gamma)} REFERENCE`);
  return encodePng(WIDTH, HEIGHT, canvas.data);
}

export function renderLipschitz(table: NumericTable): Buffer {
  const ns = column(table, 'n');
  const lips = column(table, 'lipschitz');
  const canvas = new Canvas(WIDTH, HEIGHT);
  const frame: Frame = {
    xMin: 0,
    xMax: ns.length,
    yMin: 0,
    yMax: arrayMax(lips) * 1.15,
    xLog: false,
    yLog: false,
  };
  const { x0, y0, w, h } = plotArea();
  canvas.text(x0, y0 - 3 * GLYPH_H, 'SPACE LIPSCHITZ CONSTANT VS N', BLACK, 2);
  for (const ty of ticks(frame.yMin, frame.yMax, false)) {
    const py = mapY(frame, ty);
    canvas.line(x0, py, x0 + w, py, LIGHT_GRAY);
    canvas.text(x0 - canvas.textWidth(fmt(ty)) - 6, py - GLYPH_H / 2, fmt(ty));
  }
  const slot = w / ns.length;
  ns.forEach((n, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const barW = slot * 0.6;
    const bx = x0 + i * slot + (slot - barW) / 2;
    const by = mapY(frame, lips[i]);
    canvas.fillRect(bx, by, barW, y0 + h - by, color);
    const label = `N=${n}`;
    canvas.text(bx + barW / 2 - canvas.textWidth(label) / 2, y0 + h + 6, label);
    const value = fmt(lips[i]);
    canvas.text(bx + barW / 2 - canvas.textWidth(value) / 2, by - GLYPH_H - 2, value);
  });
  canvas.line(x0, y0, x0, y0 + h, BLACK);
  canvas.line(x0, y0 + h, x0 + w, y0 + h, BLACK);
  canvas.text(x0 + w / 2 - canvas.textWidth('FAMILY INDEX N') / 2, y0 + h + 3 * GLYPH_H, 'FAMILY INDEX N');
  return encodePng(WIDTH, HEIGHT, canvas.data);
}

export function renderHolderFit(table: NumericTable): Buffer {
  const scale = column(table, 'scale');
  const delta = column(table, 'delta');
  const exponent = column(table, 'fit_exponent')[0];
  const constant = column(table, 'fit_constant')[0];
  const refSpace = column(table, 'ref_space')[0];
  const refTime = column(table, 'ref_time')[0];

  const canvas = new Canvas(WIDTH, HEIGHT);
  const frame: Frame = {
    xMin: arrayMin(scale) / 1.2,
    xMax: arrayMax(scale) * 1.2,
    yMin: arrayMin(delta) / 1.5,
    yMax: arrayMax(delta) * 1.5,
    xLog: true,
    yLog: true,
  };
  drawFrame(canvas, frame, 'MAX INCREMENT VS SCALE (LOG-LOG)', 'SCALE R', 'MAX DU');

  // fitted power law from the artifact
  const fitLine = (r: number) => constant * r ** exponent;
  canvas.line(
    mapX(frame, frame.xMin),
    mapY(frame, fitLine(frame.xMin)),
    mapX(frame, frame.xMax),
    mapY(frame, fitLine(frame.xMax)),
    SERIES_COLORS[1],
    2,
  );
  // theoretical slope references anchored through the data midpoint
  const mid = Math.floor(scale.length / 2);
  for (const [slope, color] of [
    [refSpace, SERIES_COLORS[2]],
    [refTime, SERIES_COLORS[3]],
  ] as [number, Color][]) {
    const anchor = delta[mid] / scale[mid] ** slope;
    canvas.dashedLine(
      mapX(frame, frame.xMin),
      mapY(frame, anchor * frame.xMin ** slope),
      mapX(frame, frame.xMax),
      mapY(frame, anchor * frame.xMax ** slope),
      color,
    );
  }
  scale.forEach((r, i) => {
    canvas.marker(mapX(frame, r), mapY(frame, delta[i]), SERIES_COLORS[0]);
  });

  const { x0, y0 } = plotArea();
  canvas.text(x0 + 12, y0 + 10, `FIT EXPONENT ${fmt(exponent)}`, SERIES_COLORS[1]);
  canvas.text(x0 + 12, y0 + 10 + GLYPH_H + 4, `REF SPACE ${fmt(refSpace)}`, SERIES_COLORS[2]);
  canvas.text(x0 + 12, y0 + 10 + 2 * (GLYPH_H + 4), `REF TIME ${fmt(refTime)}`, SERIES_COLORS[3]);
  return encodePng(WIDTH, HEIGHT, canvas.data);
}

export function renderBridgeScaling(table: NumericTable): Buffer {
  const horizon = column(table, 'T');
  const estimate = column(table, 'estimate');
  const stderr = column(table, 'stderr');
  const refSlope = column(table, 'ref_slope')[0];

  const canvas = new Canvas(WIDTH, HEIGHT);
  const frame: Frame = {
    xMin: arrayMin(horizon) / 1.3,
    xMax: arrayMax(horizon) * 1.3,
    yMin: arrayMin(estimate) / 1.3,
    yMax: arrayMax(estimate) * 1.3,
    xLog: true,
    yLog: true,
  };
  drawFrame(canvas, frame, 'BRIDGE CONTROL ENERGY VS HORIZON', 'HORIZON T', 'E INT');

  // reference slope anchored at the geometric middle point
  const mid = Math.floor(horizon.length / 2);
  const anchor = estimate[mid] / horizon[mid] ** refSlope;
  canvas.dashedLine(
    mapX(frame, frame.xMin),
    mapY(frame, anchor * frame.xMin ** refSlope),
    mapX(frame, frame.xMax),
    mapY(frame, anchor * frame.xMax ** refSlope),
    SERIES_COLORS[2],
  );

  horizon.forEach((T, i) => {
    const px = mapX(frame, T);
    canvas.marker(px, mapY(frame, estimate[i]), SERIES_COLORS[0]);
    const lo = Math.max(estimate[i] - 3 * stderr[i], frame.yMin);
    const hi = estimate[i] + 3 * stderr[i];
    canvas.line(px, mapY(frame, lo), px, mapY(frame, hi), SERIES_COLORS[0]);
  });
  const { x0, y0 } = plotArea();
  canvas.text(x0 + 12, y0 + 10, `REFERENCE SLOPE ${fmt(refSlope)}`, SERIES_COLORS[2]);
  canvas.text(x0 + 12, y0 + 10 + GLYPH_H + 4, 'ERROR BARS: 3 STDERR', SERIES_COLORS[0]);
  return encodePng(WIDTH, HEIGHT, canvas.data);
}

// ---------------------------------------------------------------------------
// orchestration

function arcFiles(dir: string): Map<number, string> {
  const out = new Map<number, string>();
  for (const name of readdirSync(dir)) {
    const match = /^arc_(\d+)\.csv$/.exec(name);
    if (match) out.set(Number(match[1]), join(dir, name));
  }
  return out;
}

function gridFiles(dir: string): Map<number, string> {
  const out = new Map<number, string>();
  for (const name of readdirSync(dir)) {
    const match = /^u_(\d+)\.csv$/.exec(name);
    if (match) out.set(Number(match[1]), join(dir, name));
  }
  return out;
}

/**
 * Render every figure kind whose inputs exist in artifactDir; missing
 * inputs skip the kind with a warning.  Malformed CSVs throw.  Rerunning
 * on the same inputs produces byte-identical images.
 */
export function renderAll(artifactDir: string, outDir: string): RenderResult {
  if (!existsSync(artifactDir)) {
    throw new Error(`artifact directory does not exist: ${artifactDir}`);
  }
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const skipped: { kind: FigureKind; reason: string }[] = [];

  const grids = gridFiles(artifactDir);
  if (grids.size > 0) {
    const n = Math.max(...grids.keys());
    const table = readNumericCsv(grids.get(n)!, ['t', 'x', 'u']);
    const path = join(outDir, `u_heatmap_n${n}.png`);
    writeFileSync(path, renderHeatmap(table, n));
    written.push(path);
  } else {
    skipped.push({ kind: 'heatmap', reason: 'no u_<n>.csv in artifact directory' });
  }

  const arcPaths = arcFiles(artifactDir);
  const manifestPath = join(artifactDir, 'manifest.json');
  if (arcPaths.size > 0 && existsSync(manifestPath)) {
    const manifest = JSON.parse(readFileSync(manifestPath, 'utf-8')) as { gamma?: number };
    if (typeof manifest.gamma === 'number') {
      const arcs = new Map<number, { t: number[]; x: number[] }>();
      for (const [n, path] of arcPaths) {
        const table = readNumericCsv(path, ['t', 'x']);
        arcs.set(n, { t: column(table, 't'), x: column(table, 'x') });
      }
      const path = join(outDir, 'arcs_vs_xi0.png');
      writeFileSync(path, renderArcs(arcs, manifest.gamma));
      written.push(path);
    } else {
      skipped.push({ kind: 'arcs', reason: 'manifest.json has no gamma' });
    }
  } else {
    skipped.push({
      kind: 'arcs',
      reason: arcPaths.size === 0 ? 'no arc_<n>.csv in artifact directory' : 'missing manifest.json',
    });
  }

  const lipschitzPath = join(artifactDir, 'lipschitz.csv');
  if (existsSync(lipschitzPath)) {
    const table = readNumericCsv(lipschitzPath, ['n', 'lipschitz']);
    const path = join(outDir, 'lipschitz_vs_n.png');
    writeFileSync(path, renderLipschitz(table));
    written.push(path);
  } else {
    skipped.push({ kind: 'lipschitz', reason: 'missing lipschitz.csv' });
  }

  const holderPath = join(artifactDir, 'holder_fit.csv');
  if (existsSync(holderPath)) {
    const table = readNumericCsv(holderPath, [
      'scale',
      'delta',
      'fit_exponent',
      'fit_constant',
      'ref_space',
      'ref_time',
    ]);
    const path = join(outDir, 'holder_loglog.png');
    writeFileSync(path, renderHolderFit(table));
    written.push(path);
  } else {
    skipped.push({ kind: 'holder-fit', reason: 'missing holder_fit.csv' });
  }

  const bridgePath = join(artifactDir, 'bridge_scaling.csv');
  if (existsSync(bridgePath)) {
    const table = readNumericCsv(bridgePath, ['T', 'estimate', 'stderr', 'ref_slope']);
    const path = join(outDir, 'bridge_scaling.png');
    writeFileSync(path, renderBridgeScaling(table));
    written.push(path);
  } else {
    skipped.push({ kind: 'bridge-scaling', reason: 'missing bridge_scaling.csv' });
  }

  return { written, skipped };
}
