// SVG goban: stones from the server's board rows, last-move marker,
// candidate badges with visit counts.  Pure render + click hit-testing;
// no rules knowledge.

import { COLS, vertexOf } from "./state.js";
import type { SearchStats } from "./api.js";

const CELL = 40;
const MARGIN = 30;

export interface BoardView {
  size: number;
  rows: string[] | null; // server board, 'x'/'o'/'.'
  lastMove: string | null;
  candidates: { move: string; visits: number }[];
}

export function boardExtent(size: number): number {
  return 2 * MARGIN + (size - 1) * CELL;
}

function coord(index: number): number {
  return MARGIN + index * CELL;
}

export function renderBoard(
  svg: SVGSVGElement,
  view: BoardView,
  onClick: (vertex: string) => void,
): void {
  const n = view.size;
  const extent = boardExtent(n);
  svg.setAttribute("viewBox", `0 0 ${extent} ${extent}`);
  svg.innerHTML = "";
  const ns = "http://www.w3.org/2000/svg";

  const bg = document.createElementNS(ns, "rect");
  bg.setAttribute("width", String(extent));
  bg.setAttribute("height", String(extent));
  bg.setAttribute("fill", "#d9b15e");
  svg.appendChild(bg);

  for (let i = 0; i < n; i++) {
    const h = document.createElementNS(ns, "line");
    h.setAttribute("x1", String(coord(0)));
    h.setAttribute("x2", String(coord(n - 1)));
    h.setAttribute("y1", String(coord(i)));
    h.setAttribute("y2", String(coord(i)));
    h.setAttribute("stroke", "#4a3b1e");
    svg.appendChild(h);
    const v = document.createElementNS(ns, "line");
    v.setAttribute("y1", String(coord(0)));
    v.setAttribute("y2", String(coord(n - 1)));
    v.setAttribute("x1", String(coord(i)));
    v.setAttribute("x2", String(coord(i)));
    v.setAttribute("stroke", "#4a3b1e");
    svg.appendChild(v);
  }

  const badge = new Map<string, number>();
  for (const c of view.candidates) {
    if (c.move.toLowerCase() !== "pass") badge.set(c.move.toUpperCase(), c.visits);
  }

  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      const vertex = vertexOf(r, c, n);
      const stone = view.rows ? view.rows[r][c] : ".";
      const group = document.createElementNS(ns, "g");
      group.setAttribute("data-vertex", vertex);
      group.setAttribute("class", "point");

      if (stone === "x" || stone === "o") {
        const circle = document.createElementNS(ns, "circle");
        circle.setAttribute("cx", String(coord(c)));
        circle.setAttribute("cy", String(coord(r)));
        circle.setAttribute("r", String(CELL * 0.45));
        circle.setAttribute("fill", stone === "x" ? "#1a1a1a" : "#f4f4f4");
        circle.setAttribute("stroke", "#333");
        circle.setAttribute("data-stone", stone);
        group.appendChild(circle);
        if (view.lastMove && view.lastMove.toUpperCase() === vertex) {
          const mark = document.createElementNS(ns, "circle");
          mark.setAttribute("cx", String(coord(c)));
          mark.setAttribute("cy", String(coord(r)));
          mark.setAttribute("r", String(CELL * 0.18));
          mark.setAttribute("fill", "none");
          mark.setAttribute("stroke", stone === "x" ? "#f4f4f4" : "#1a1a1a");
          mark.setAttribute("stroke-width", "2");
          mark.setAttribute("data-last-move", "1");
          group.appendChild(mark);
        }
      } else {
        // invisible hit target for empty intersections
        const hit = document.createElementNS(ns, "circle");
        hit.setAttribute("cx", String(coord(c)));
        hit.setAttribute("cy", String(coord(r)));
        hit.setAttribute("r", String(CELL * 0.45));
        hit.setAttribute("fill", "transparent");
        group.appendChild(hit);
        const visits = badge.get(vertex);
        if (visits !== undefined && visits > 0) {
          const label = document.createElementNS(ns, "text");
          label.setAttribute("x", String(coord(c)));
          label.setAttribute("y", String(coord(r) + 4));
          label.setAttribute("text-anchor", "middle");
          label.setAttribute("font-size", "11");
          label.setAttribute("fill", "#1d4ed8");
          label.setAttribute("data-candidate", vertex);
          label.textContent = String(visits);
          group.appendChild(label);
        }
      }
      group.addEventListener("click", () => onClick(vertex));
      svg.appendChild(group);
    }
  }
}
