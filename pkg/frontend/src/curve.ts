// SVG winrate curve: rho(x) over the komi-correction range, with a marker
// at x = 0 (the official-komi winrate) and one at the lambda extremum
// x-bar.  Marker positions are data-driven so tests can check consistency.

const WIDTH = 420;
const HEIGHT = 220;
const PAD = 34;

export interface CurveView {
  points: [number, number][];
  xbar: number | null;
  winrate: number | null;
  alpha: number | null;
  beta: number | null;
}

function sx(x: number, xmin: number, xmax: number): number {
  return PAD + ((x - xmin) / (xmax - xmin)) * (WIDTH - 2 * PAD);
}

function sy(y: number): number {
  return HEIGHT - PAD - y * (HEIGHT - 2 * PAD);
}

export function interpolate(points: [number, number][], x: number): number {
  if (points.length === 0) return NaN;
  if (x <= points[0][0]) return points[0][1];
  for (let i = 1; i < points.length; i++) {
    const [x1, y1] = points[i - 1];
    const [x2, y2] = points[i];
    if (x <= x2) {
      const t = (x - x1) / (x2 - x1 || 1);
      return y1 + t * (y2 - y1);
    }
  }
  return points[points.length - 1][1];
}

export function renderCurve(svg: SVGSVGElement, view: CurveView): void {
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.innerHTML = "";
  const ns = "http://www.w3.org/2000/svg";
  if (!view.points.length) {
    const empty = document.createElementNS(ns, "text");
    empty.setAttribute("x", String(WIDTH / 2));
    empty.setAttribute("y", String(HEIGHT / 2));
    empty.setAttribute("text-anchor", "middle");
    empty.setAttribute("fill", "#777");
    empty.textContent = "no analysis yet";
    svg.appendChild(empty);
    return;
  }
  const xmin = view.points[0][0];
  const xmax = view.points[view.points.length - 1][0];

  const frame = document.createElementNS(ns, "rect");
  frame.setAttribute("x", String(PAD));
  frame.setAttribute("y", String(PAD));
  frame.setAttribute("width", String(WIDTH - 2 * PAD));
  frame.setAttribute("height", String(HEIGHT - 2 * PAD));
  frame.setAttribute("fill", "none");
  frame.setAttribute("stroke", "#999");
  svg.appendChild(frame);

  const half = document.createElementNS(ns, "line");
  half.setAttribute("x1", String(PAD));
  half.setAttribute("x2", String(WIDTH - PAD));
  half.setAttribute("y1", String(sy(0.5)));
  half.setAttribute("y2", String(sy(0.5)));
  half.setAttribute("stroke", "#bbb");
  half.setAttribute("stroke-dasharray", "4 4");
  svg.appendChild(half);

  const path = document.createElementNS(ns, "polyline");
  path.setAttribute(
    "points",
    view.points.map(([x, y]) => `${sx(x, xmin, xmax)},${sy(y)}`).join(" "),
  );
  path.setAttribute("fill", "none");
  path.setAttribute("stroke", "#1a1a1a");
  path.setAttribute("stroke-width", "2");
  path.setAttribute("data-curve", "1");
  svg.appendChild(path);

  const zeroY = interpolate(view.points, 0);
  const zero = document.createElementNS(ns, "circle");
  zero.setAttribute("cx", String(sx(0, xmin, xmax)));
  zero.setAttribute("cy", String(sy(zeroY)));
  zero.setAttribute("r", "5");
  zero.setAttribute("fill", "#dc2626");
  zero.setAttribute("data-marker", "zero");
  zero.setAttribute("data-x", "0");
  zero.setAttribute("data-y", String(zeroY));
  svg.appendChild(zero);

  if (view.xbar !== null) {
    const xbarY = interpolate(view.points, view.xbar);
    const marker = document.createElementNS(ns, "line");
    marker.setAttribute("x1", String(sx(view.xbar, xmin, xmax)));
    marker.setAttribute("x2", String(sx(view.xbar, xmin, xmax)));
    marker.setAttribute("y1", String(sy(0)));
    marker.setAttribute("y2", String(sy(1)));
    marker.setAttribute("stroke", "#2563eb");
    marker.setAttribute("stroke-dasharray", "3 3");
    marker.setAttribute("data-marker", "xbar");
    marker.setAttribute("data-x", String(view.xbar));
    marker.setAttribute("data-y", String(xbarY));
    svg.appendChild(marker);
  }
}
