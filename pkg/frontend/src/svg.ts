/**
 * SVG assembly for a computed boxplot layout. Text only, no DOM: the output
 * must be a pure function of the layout so identical inputs give identical
 * files.
 */

import { Layout } from './boxplot';

const FONT = 'font-family="Helvetica, Arial, sans-serif"';

/** Fixed-precision coordinates keep the output stable and diffable. */
const px = (v: number): string => {
  const s = v.toFixed(2);
  return s === '-0.00' ? '0.00' : s;
};

export interface FigureText {
  title: string;
  xLabel: string;
  yLabel: string;
}

export function renderSvg(layout: Layout, text: FigureText): string {
  const { plot } = layout;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" height="${layout.height}" ` +
      `viewBox="0 0 ${layout.width} ${layout.height}">`,
  );
  parts.push(`<rect width="${layout.width}" height="${layout.height}" fill="white"/>`);
  parts.push(`<text x="${px(layout.width / 2)}" y="20" text-anchor="middle" font-size="14" ${FONT}>${text.title}</text>`);

  // decade gridlines and tick labels
  for (const t of layout.ticks) {
    parts.push(
      `<line x1="${px(plot.left)}" y1="${px(t.y)}" x2="${px(plot.right)}" y2="${px(t.y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${px(plot.left - 8)}" y="${px(t.y + 3.5)}" text-anchor="end" font-size="11" ${FONT}>` +
        `10<tspan baseline-shift="super" font-size="8">${t.exp}</tspan></text>`,
    );
  }

  // frame
  parts.push(
    `<rect x="${px(plot.left)}" y="${px(plot.top)}" width="${px(plot.right - plot.left)}" ` +
      `height="${px(plot.bottom - plot.top)}" fill="none" stroke="#333333" stroke-width="1"/>`,
  );

  // group labels
  for (const g of layout.groups) {
    parts.push(
      `<text x="${px(g.cx)}" y="${px(plot.bottom + 16)}" text-anchor="middle" font-size="11" ${FONT}>${g.label}</text>`,
    );
  }
  parts.push(
    `<text x="${px((plot.left + plot.right) / 2)}" y="${px(layout.height - 10)}" text-anchor="middle" ` +
      `font-size="12" ${FONT}>${text.xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${px((plot.top + plot.bottom) / 2)}" text-anchor="middle" font-size="12" ${FONT} ` +
      `transform="rotate(-90 16 ${px((plot.top + plot.bottom) / 2)})">${text.yLabel}</text>`,
  );

  // boxes: whiskers first so the box edge overdraws the whisker stem
  for (const b of layout.boxes) {
    const half = b.width / 2;
    const cap = b.width * 0.3;
    parts.push(`<g stroke="${b.color}" fill="none" stroke-width="1.4">`);
    parts.push(`<line x1="${px(b.cx)}" y1="${px(b.yLo)}" x2="${px(b.cx)}" y2="${px(b.yQ1)}"/>`);
    parts.push(`<line x1="${px(b.cx)}" y1="${px(b.yQ3)}" x2="${px(b.cx)}" y2="${px(b.yHi)}"/>`);
    parts.push(`<line x1="${px(b.cx - cap)}" y1="${px(b.yLo)}" x2="${px(b.cx + cap)}" y2="${px(b.yLo)}"/>`);
    parts.push(`<line x1="${px(b.cx - cap)}" y1="${px(b.yHi)}" x2="${px(b.cx + cap)}" y2="${px(b.yHi)}"/>`);
    parts.push(
      `<rect x="${px(b.cx - half)}" y="${px(b.yQ3)}" width="${px(b.width)}" ` +
        `height="${px(b.yQ1 - b.yQ3)}" fill="white"/>`,
    );
    parts.push(
      `<line x1="${px(b.cx - half)}" y1="${px(b.yMedian)}" x2="${px(b.cx + half)}" y2="${px(b.yMedian)}" ` +
        `stroke-width="2"/>`,
    );
    parts.push('</g>');
  }

  // legend, top right inside the frame; backdrop keeps it readable when a
  // whisker runs underneath
  const lx = plot.right - 108;
  parts.push(
    `<rect x="${px(lx - 6)}" y="${px(plot.top + 2)}" width="112" ` +
      `height="${px(layout.legend.length * 16 + 8)}" fill="white" fill-opacity="0.85" ` +
      `stroke="#cccccc" stroke-width="0.5"/>`,
  );
  layout.legend.forEach((item, i) => {
    const ly = plot.top + 12 + i * 16;
    parts.push(`<rect x="${px(lx)}" y="${px(ly - 8)}" width="18" height="9" fill="${item.color}"/>`);
    parts.push(`<text x="${px(lx + 24)}" y="${px(ly)}" font-size="11" ${FONT}>${item.label}</text>`);
  });

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
