// UI state and its pure transition functions.  The view is a function of
// this state plus the last server response; replaying the same events
// always reproduces the same state.

import type { AnalyzeResponse } from "./api.js";

export const COLS = "ABCDEFGHJKLMNOPQRST"; // GTP letters, no I

export interface UiState {
  size: number;
  komi: number;
  lambda: number;
  visits: number;
  /** moves like "B D4" / "W pass", strictly alternating from Black */
  history: string[];
  engineReplies: boolean;
  /** indices into history marking engine moves (for paired undo) */
  engineMoves: number[];
  analysis: AnalyzeResponse | null;
  banner: string | null;
  pendingRequests: number;
}

export function initialState(size = 7, komi = 9.5): UiState {
  return {
    size,
    komi,
    lambda: 0,
    visits: 100,
    history: [],
    engineReplies: false,
    engineMoves: [],
    analysis: null,
    banner: null,
    pendingRequests: 0,
  };
}

export function toMove(state: UiState): "b" | "w" {
  return state.history.length % 2 === 0 ? "b" : "w";
}

export function vertexOf(row: number, col: number, size: number): string {
  return `${COLS[col]}${size - row}`;
}

export function pointOf(vertex: string, size: number): { row: number; col: number } | null {
  const v = vertex.trim().toUpperCase();
  if (v === "PASS" || v === "RESIGN") return null;
  const col = COLS.indexOf(v[0]);
  const num = parseInt(v.slice(1), 10);
  if (col < 0 || Number.isNaN(num) || num < 1 || num > size) return null;
  return { row: size - num, col };
}

/** Board layout derived purely from the move history (captures are the
 * server's business; stones here are only what the last analysis showed
 * plus optimistic placement, so the authoritative view always comes from
 * re-deriving after the server accepted the move). */
export function withMove(state: UiState, vertex: string, engine = false): UiState {
  const color = toMove(state) === "b" ? "B" : "W";
  const history = [...state.history, `${color} ${vertex}`];
  return {
    ...state,
    history,
    engineMoves: engine ? [...state.engineMoves, history.length - 1] : state.engineMoves,
    banner: null,
  };
}

export function withUndo(state: UiState): UiState {
  if (state.history.length === 0) return state;
  let cut = state.history.length - 1;
  // paired undo: when the engine answered the human's move, remove both
  if (state.engineReplies && state.engineMoves.includes(state.history.length - 1) && cut > 0) {
    cut -= 1;
  }
  return {
    ...state,
    history: state.history.slice(0, cut),
    engineMoves: state.engineMoves.filter((i) => i < cut),
    analysis: null,
    banner: null,
  };
}

export function withAnalysis(state: UiState, analysis: AnalyzeResponse): UiState {
  return { ...state, analysis, banner: null };
}

export function withBanner(state: UiState, banner: string): UiState {
  return { ...state, banner };
}

export function revertMove(state: UiState): UiState {
  return {
    ...state,
    history: state.history.slice(0, -1),
    engineMoves: state.engineMoves.filter((i) => i < state.history.length - 1),
  };
}

/** Stones implied by the last analysis' accepted history: the UI keeps a
 * client-side optimistic board only for hit-testing; occupancy checks are
 * advisory (the server re-validates). */
export function occupiedPoints(state: UiState): Map<string, "b" | "w"> {
  const out = new Map<string, "b" | "w">();
  state.history.forEach((token, i) => {
    const vertex = token.split(" ")[1];
    if (vertex.toLowerCase() === "pass") return;
    out.set(vertex.toUpperCase(), i % 2 === 0 ? "b" : "w");
  });
  return out;
}
