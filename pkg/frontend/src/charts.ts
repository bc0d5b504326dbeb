/** Rose (polar-area) and horizontal bar charts, rendered as plain SVG.
 *
 * The rose gives every alpha the same angular slice; only the radius varies,
 * proportional to the alpha's completion percentage. The bar chart draws one
 * horizontal bar per concern. Neither chart computes a percentage itself:
 * both take values straight from a server snapshot.
 */

import { type KernelDefinition, type Snapshot, allAlphas, formatPercent } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Sector {
  alphaId: string;
  label: string;
  value: number;
  startAngle: number;
  endAngle: number;
  radius: number;
}

/** Clamp to the 0..100 range the charts can draw; NaN collapses to 0. */
export function clampPercent(value: number): number {
  if (Number.isNaN(value) || value < 0) return 0;
  return value > 100 ? 100 : value;
}

/**
 * Lay out equal-angle sectors for the given (id, label, value) triples.
 * Angles start at 12 o'clock and proceed clockwise; radius scales linearly
 * with value so 0 collapses the sector and 100 reaches maxRadius.
 */
export function layoutSectors(
  entries: { alphaId: string; label: string; value: number }[],
  maxRadius: number,
): Sector[] {
  const slice = entries.length > 0 ? (2 * Math.PI) / entries.length : 0;
  return entries.map((entry, i) => {
    const value = clampPercent(entry.value);
    return {
      alphaId: entry.alphaId,
      label: entry.label,
      value,
      startAngle: -Math.PI / 2 + i * slice,
      endAngle: -Math.PI / 2 + (i + 1) * slice,
      radius: (maxRadius * value) / 100,
    };
  });
}

/** SVG path for one filled sector (pie wedge) around (cx, cy). */
export function sectorPath(cx: number, cy: number, sector: Sector): string {
  const { startAngle, endAngle, radius } = sector;
  if (radius <= 0) return "";
  const x1 = cx + radius * Math.cos(startAngle);
  const y1 = cy + radius * Math.sin(startAngle);
  const x2 = cx + radius * Math.cos(endAngle);
  const y2 = cy + radius * Math.sin(endAngle);
  const large = endAngle - startAngle > Math.PI ? 1 : 0;
  return (
    `M ${cx.toFixed(2)} ${cy.toFixed(2)} ` +
    `L ${x1.toFixed(2)} ${y1.toFixed(2)} ` +
    `A ${radius.toFixed(2)} ${radius.toFixed(2)} 0 ${large} 1 ${x2.toFixed(2)} ${y2.toFixed(2)} Z`
  );
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

/** Replace the contents of `container` with the rose chart for `snapshot`. */
export function renderRose(
  container: HTMLElement,
  kernel: KernelDefinition,
  snapshot: Snapshot,
): void {
  const size = 260;
  const cx = size / 2;
  const cy = size / 2;
  const maxRadius = size / 2 - 28;
  const sectors = layoutSectors(
    allAlphas(kernel).map((alpha) => ({
      alphaId: alpha.id,
      label: alpha.name,
      value: snapshot.alpha_completion[alpha.id] ?? 0,
    })),
    maxRadius,
  );

  const svg = svgElement("svg", {
    viewBox: `0 0 ${size} ${size}`,
    class: "rose-chart",
    role: "img",
    "aria-label": "Alpha completion",
  });

  // reference rings at 25/50/75/100%
  for (const fraction of [0.25, 0.5, 0.75, 1]) {
    svg.append(
      svgElement("circle", {
        cx: String(cx),
        cy: String(cy),
        r: (maxRadius * fraction).toFixed(2),
        class: "rose-grid",
      }),
    );
  }

  for (const sector of sectors) {
    const path = sectorPath(cx, cy, sector);
    if (!path) continue;
    const el = svgElement("path", {
      d: path,
      class: "rose-sector",
      "data-alpha": sector.alphaId,
    });
    el.append(svgElement("title", {}));
    const title = el.firstChild as SVGTitleElement;
    title.textContent = `${sector.label}: ${formatPercent(sector.value)}`;
    svg.append(el);
  }

  // spoke labels sit just outside the outer ring
  for (const sector of sectors) {
    const mid = (sector.startAngle + sector.endAngle) / 2;
    const lx = cx + (maxRadius + 14) * Math.cos(mid);
    const ly = cy + (maxRadius + 14) * Math.sin(mid);
    const text = svgElement("text", {
      x: lx.toFixed(2),
      y: ly.toFixed(2),
      class: "rose-label",
      "text-anchor": "middle",
    });
    text.textContent = sector.label;
    svg.append(text);
  }

  container.replaceChildren(svg);
}

/** Replace the contents of `container` with one horizontal bar per concern. */
export function renderBars(
  container: HTMLElement,
  kernel: KernelDefinition,
  snapshot: Snapshot,
): void {
  const rowHeight = 34;
  const width = 260;
  const labelWidth = 84;
  const trackWidth = width - labelWidth - 56;
  const height = kernel.concerns.length * rowHeight;

  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "bar-chart",
    role: "img",
    "aria-label": "Concern completion",
  });

  kernel.concerns.forEach((concern, i) => {
    const value = clampPercent(snapshot.concern_completion[concern.id] ?? 0);
    const y = i * rowHeight;
    const label = svgElement("text", {
      x: String(labelWidth - 8),
      y: String(y + rowHeight / 2 + 4),
      class: "bar-label",
      "text-anchor": "end",
    });
    label.textContent = concern.name;
    svg.append(label);
    svg.append(
      svgElement("rect", {
        x: String(labelWidth),
        y: String(y + 8),
        width: String(trackWidth),
        height: String(rowHeight - 16),
        class: "bar-track",
      }),
    );
    svg.append(
      svgElement("rect", {
        x: String(labelWidth),
        y: String(y + 8),
        width: ((trackWidth * value) / 100).toFixed(2),
        height: String(rowHeight - 16),
        class: "bar-fill",
        "data-concern": concern.id,
      }),
    );
    const amount = svgElement("text", {
      x: String(labelWidth + trackWidth + 6),
      y: String(y + rowHeight / 2 + 4),
      class: "bar-value",
    });
    amount.textContent = formatPercent(value);
    svg.append(amount);
  });

  container.replaceChildren(svg);
}
