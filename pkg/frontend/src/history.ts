/**
 * Session state: the current viewport over a source image plus an
 * append-only history of suggestion interactions. Each entry snapshots the
 * viewport the suggestion was made for and whether the user accepted it, so
 * replaying the last entry reconstructs the viewport that followed it.
 */

import { applySuggestion, type Suggestion, type ViewBox } from "./geometry.js";

export interface HistoryEntry {
  viewport: ViewBox;
  suggestion: Suggestion;
  accepted: boolean;
}

export class ViewportState {
  readonly history: HistoryEntry[] = [];
  viewport: ViewBox;

  constructor(readonly sourceId: string, initial: ViewBox) {
    this.viewport = initial;
  }

  /** Manual pan/zoom/rotate; does not touch the history. */
  moveTo(viewport: ViewBox): void {
    this.viewport = viewport;
  }

  /** Accept a suggestion: record it and apply it exactly. */
  apply(suggestion: Suggestion): ViewBox {
    this.history.push({ viewport: this.viewport, suggestion, accepted: true });
    this.viewport = applySuggestion(this.viewport, suggestion);
    return this.viewport;
  }

  /** Override a suggestion: record it, keep the viewport. */
  dismiss(suggestion: Suggestion): void {
    this.history.push({ viewport: this.viewport, suggestion, accepted: false });
  }
}

/** Viewport right after an entry was handled (applied or dismissed). */
export function replayEntry(entry: HistoryEntry): ViewBox {
  return entry.accepted ? applySuggestion(entry.viewport, entry.suggestion) : entry.viewport;
}

/**
 * Reconstruct the viewport after the last recorded interaction. Manual moves
 * between interactions are captured by each entry's viewport snapshot.
 */
export function replay(history: HistoryEntry[]): ViewBox | null {
  if (history.length === 0) {
    return null;
  }
  return replayEntry(history[history.length - 1]);
}
