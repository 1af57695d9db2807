// Application wiring: DOM events -> state transitions -> render + service
// calls.  At most one analysis request is in flight; newer requests abort
// older ones (latest wins).  Slider-driven re-analysis is debounced.

import { ApiClient, ServiceError, type AnalyzeResponse } from "./api.js";
import { boardExtent, renderBoard } from "./board.js";
import { interpolate, renderCurve } from "./curve.js";
import {
  initialState,
  occupiedPoints,
  revertMove,
  toMove,
  withAnalysis,
  withBanner,
  withMove,
  withUndo,
  type UiState,
} from "./state.js";

const DEBOUNCE_MS = 150;

export class App {
  state: UiState;
  private controller: AbortController | null = null;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    size = 7,
    komi = 9.5,
  ) {
    this.state = initialState(size, komi);
    this.mount();
    this.render();
  }

  /** Resolves when no analysis request is pending (tests await this). */
  whenIdle(): Promise<void> {
    return this.inflight;
  }

  private mount(): void {
    this.root.innerHTML = `
      <div class="layout">
        <div>
          <svg id="board" width="340" height="340"></svg>
          <div class="controls">
            <button id="pass">pass</button>
            <button id="undo">undo</button>
            <button id="engine-move">engine move</button>
            <label><input type="checkbox" id="engine-replies"> engine answers</label>
          </div>
          <div id="banner" hidden></div>
        </div>
        <div>
          <svg id="curve" width="420" height="220"></svg>
          <div class="readout">
            <span>winrate <b id="winrate">-</b></span>
            <span>lead <b id="alpha">-</b></span>
            <span>scale <b id="beta">-</b></span>
          </div>
          <div class="sliders">
            <label>lambda <input type="range" id="lambda" min="0" max="1" step="0.05" value="0">
              <span id="lambda-value">0.00</span></label>
            <label>komi <input type="number" id="komi" step="1" value="${this.state.komi}"></label>
            <label>visits <input type="number" id="visits" min="1" step="50" value="${this.state.visits}"></label>
          </div>
        </div>
      </div>`;

    this.el<HTMLButtonElement>("pass").addEventListener("click", () => this.playMove("pass"));
    this.el<HTMLButtonElement>("undo").addEventListener("click", () => this.undo());
    this.el<HTMLButtonElement>("engine-move").addEventListener("click", () => this.engineMove());
    this.el<HTMLInputElement>("engine-replies").addEventListener("change", (e) => {
      this.state = { ...this.state, engineReplies: (e.target as HTMLInputElement).checked };
    });
    this.el<HTMLInputElement>("lambda").addEventListener("input", (e) => {
      const lam = parseFloat((e.target as HTMLInputElement).value);
      this.state = { ...this.state, lambda: lam };
      this.el<HTMLElement>("lambda-value").textContent = lam.toFixed(2);
      this.scheduleAnalysis();
    });
    this.el<HTMLInputElement>("komi").addEventListener("change", (e) => {
      const komi = parseFloat((e.target as HTMLInputElement).value);
      this.state = { ...this.state, komi };
      this.scheduleAnalysis();
    });
    this.el<HTMLInputElement>("visits").addEventListener("change", (e) => {
      this.state = { ...this.state, visits: parseInt((e.target as HTMLInputElement).value, 10) };
      this.scheduleAnalysis();
    });
  }

  private el<T extends Element>(id: string): T {
    return this.root.querySelector(`#${id}`) as unknown as T;
  }

  clickPoint(vertex: string): Promise<void> {
    const stones = occupiedPoints(this.state);
    const fromServer = this.state.analysis?.board ?? null;
    if (fromServer) {
      const point = this.pointFromVertex(vertex);
      if (point && fromServer[point.row][point.col] !== ".") {
        this.state = withBanner(this.state, `${vertex} is occupied`);
        this.render();
        return this.inflight;
      }
    } else if (stones.has(vertex.toUpperCase())) {
      this.state = withBanner(this.state, `${vertex} is occupied`);
      this.render();
      return this.inflight;
    }
    return this.playMove(vertex);
  }

  private pointFromVertex(vertex: string): { row: number; col: number } | null {
    const col = "ABCDEFGHJKLMNOPQRST".indexOf(vertex[0].toUpperCase());
    const num = parseInt(vertex.slice(1), 10);
    if (col < 0 || Number.isNaN(num)) return null;
    return { row: this.state.size - num, col };
  }

  playMove(vertex: string, engine = false): Promise<void> {
    this.state = withMove(this.state, vertex, engine);
    this.render();
    const run = this.analyzeNow().then(async () => {
      if (!engine && this.state.engineReplies && this.state.banner === null) {
        await this.engineMove();
      }
    });
    return (this.inflight = run);
  }

  undo(): void {
    this.state = withUndo(this.state);
    this.render();
    this.scheduleAnalysis(0);
  }

  async engineMove(): Promise<void> {
    const position = {
      moves: this.state.history,
      komi: this.state.komi,
      size: this.state.size,
    };
    const run = (async () => {
      try {
        const reply = await this.api.genmove(position, {
          visits: this.state.visits,
          lam: this.state.lambda,
        });
        this.state = withMove(this.state, reply.move, true);
        this.render();
        await this.analyzeNow();
      } catch (error) {
        this.showError(error);
      }
    })();
    return (this.inflight = run);
  }

  scheduleAnalysis(delay = DEBOUNCE_MS): Promise<void> {
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    let resolve: () => void;
    const done = new Promise<void>((r) => (resolve = r));
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      this.analyzeNow().then(() => resolve());
    }, delay);
    return (this.inflight = this.inflight.then(() => done));
  }

  async analyzeNow(): Promise<void> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const position = {
      moves: this.state.history,
      komi: this.state.komi,
      size: this.state.size,
    };
    try {
      const analysis = await this.api.analyze(
        position,
        {
          visits: this.state.visits,
          lambdas: this.state.lambda > 0 ? [this.state.lambda] : [],
          curveRange: 15,
        },
        controller.signal,
      );
      if (this.controller === controller) {
        this.state = withAnalysis(this.state, analysis);
        this.render();
      }
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      if (error instanceof ServiceError && error.status === 400) {
        // the move we optimistically added was illegal: roll it back
        this.state = withBanner(revertMove(this.state), error.message);
        this.render();
        return;
      }
      this.showError(error);
    }
  }

  private showError(error: unknown): void {
    const message = error instanceof Error ? error.message : String(error);
    this.state = withBanner(this.state, message);
    this.render();
  }

  xbarForDisplay(): number | null {
    if (!this.state.analysis) return null;
    if (this.state.lambda === 0) return 0;
    const info = this.state.analysis.lambda_info.find((l) => l.lam === this.state.lambda);
    return info ? info.xbar : null;
  }

  render(): void {
    const analysis = this.state.analysis;
    const board = this.el<SVGSVGElement>("board");
    const lastToken = this.state.history[this.state.history.length - 1];
    renderBoard(
      board,
      {
        size: this.state.size,
        rows: analysis?.board ?? null,
        lastMove: lastToken ? lastToken.split(" ")[1] : null,
        candidates: analysis ? analysis.search_stats.moves.slice(0, 5) : [],
      },
      (vertex) => void this.clickPoint(vertex),
    );
    board.setAttribute("width", "340");
    board.setAttribute("height", "340");
    board.setAttribute("data-extent", String(boardExtent(this.state.size)));

    renderCurve(this.el<SVGSVGElement>("curve"), {
      points: analysis ? analysis.winrate_curve : [],
      xbar: this.xbarForDisplay(),
      winrate: analysis ? analysis.winrate : null,
      alpha: analysis ? analysis.alpha : null,
      beta: analysis ? analysis.beta : null,
    });

    this.el<HTMLElement>("winrate").textContent = analysis
      ? analysis.winrate.toFixed(3)
      : "-";
    this.el<HTMLElement>("alpha").textContent = analysis ? analysis.alpha.toFixed(2) : "-";
    this.el<HTMLElement>("beta").textContent = analysis ? analysis.beta.toFixed(3) : "-";

    const banner = this.el<HTMLElement>("banner");
    if (this.state.banner) {
      banner.hidden = false;
      banner.textContent = this.state.banner;
    } else {
      banner.hidden = true;
      banner.textContent = "";
    }
  }
}

export { interpolate };
