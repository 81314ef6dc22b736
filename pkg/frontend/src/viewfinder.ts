/**
 * The interactive viewfinder: a viewport box over a wide source image that
 * the user pans (drag), zooms (wheel) and rotates (handle drag), with live
 * composition suggestions fetched after each settle.
 */

import { ApiClient, SuggestScheduler, type SuggestResponse } from "./api.js";
import {
  applySuggestion,
  boxCorners,
  isRotation,
  type Suggestion,
  type ViewBox,
} from "./geometry.js";
import { ViewportState } from "./history.js";

const HANDLE_OFFSET_PX = 28;

interface Elements {
  canvas: HTMLCanvasElement;
  preview: HTMLCanvasElement;
  status: HTMLElement;
  probability: HTMLElement;
  applyButton: HTMLButtonElement;
  dismissButton: HTMLButtonElement;
}

type DragMode = "pan" | "rotate" | null;

export class Viewfinder {
  private readonly ctx: CanvasRenderingContext2D;
  private readonly scheduler: SuggestScheduler;
  private current: SuggestResponse | null = null;
  private stale = false;
  private drag: DragMode = null;
  private dragStart = { x: 0, y: 0, box: null as ViewBox | null };

  constructor(
    private readonly elements: Elements,
    private readonly client: ApiClient,
    private readonly image: ImageBitmap,
    readonly state: ViewportState,
  ) {
    this.ctx = elements.canvas.getContext("2d")!;
    this.scheduler = new SuggestScheduler(
      client,
      (result) => this.onSuggestion(result),
      () => this.onServiceError(),
      250,
    );
    this.bindEvents();
    this.render();
    this.requestSuggestion();
  }

  // --- interactions -------------------------------------------------------

  private bindEvents(): void {
    const canvas = this.elements.canvas;
    canvas.addEventListener("pointerdown", (ev) => {
      canvas.setPointerCapture(ev.pointerId);
      this.drag = this.hitRotationHandle(ev.offsetX, ev.offsetY) ? "rotate" : "pan";
      this.dragStart = { x: ev.offsetX, y: ev.offsetY, box: this.state.viewport };
    });
    canvas.addEventListener("pointermove", (ev) => {
      if (!this.drag || !this.dragStart.box) return;
      if (this.drag === "pan") {
        const dx = (ev.offsetX - this.dragStart.x) / canvas.width;
        const dy = (ev.offsetY - this.dragStart.y) / canvas.height;
        this.state.moveTo({ ...this.dragStart.box, cx: this.dragStart.box.cx + dx, cy: this.dragStart.box.cy + dy });
      } else {
        const box = this.dragStart.box;
        const angle = (p: { x: number; y: number }) =>
          Math.atan2(box.cy * canvas.height - p.y, p.x - box.cx * canvas.width);
        const delta = angle({ x: ev.offsetX, y: ev.offsetY }) - angle(this.dragStart);
        this.state.moveTo({ ...box, alpha: box.alpha + delta });
      }
      this.invalidate();
    });
    const release = () => {
      this.drag = null;
    };
    canvas.addEventListener("pointerup", release);
    canvas.addEventListener("pointercancel", release);
    canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY > 0 ? 1.05 : 1 / 1.05;
      const box = this.state.viewport;
      this.state.moveTo({ ...box, w: box.w * factor, h: box.h * factor });
      this.invalidate();
    }, { passive: false });

    this.elements.applyButton.addEventListener("click", () => this.applyCurrent());
    this.elements.dismissButton.addEventListener("click", () => this.dismissCurrent());
  }

  private hitRotationHandle(x: number, y: number): boolean {
    const [hx, hy] = this.rotationHandlePosition();
    return Math.hypot(x - hx, y - hy) < 12;
  }

  private rotationHandlePosition(): [number, number] {
    const canvas = this.elements.canvas;
    const box = this.state.viewport;
    const corners = boxCorners(box);
    const topMid = {
      x: ((corners[0][0] + corners[1][0]) / 2) * canvas.width,
      y: ((corners[0][1] + corners[1][1]) / 2) * canvas.height,
    };
    const cx = box.cx * canvas.width;
    const cy = box.cy * canvas.height;
    const len = Math.hypot(topMid.x - cx, topMid.y - cy) || 1;
    return [
      cx + ((topMid.x - cx) / len) * (len + HANDLE_OFFSET_PX),
      cy + ((topMid.y - cy) / len) * (len + HANDLE_OFFSET_PX),
    ];
  }

  // --- suggestion lifecycle ------------------------------------------------

  private invalidate(): void {
    this.current = null;
    this.render();
    this.requestSuggestion();
  }

  private requestSuggestion(): void {
    this.scheduler.request(this.state.sourceId, this.state.viewport);
  }

  private onSuggestion(result: SuggestResponse): void {
    this.current = result;
    this.stale = false;
    this.render();
  }

  private onServiceError(): void {
    this.stale = true;
    this.render();
  }

  applyCurrent(): void {
    if (!this.current || !this.current.suggestion.adjust) return;
    this.state.apply(this.current.suggestion);
    this.invalidate();
  }

  dismissCurrent(): void {
    if (!this.current) return;
    this.state.dismiss(this.current.suggestion);
    this.current = null;
    this.render();
  }

  // --- rendering -----------------------------------------------------------

  render(): void {
    const { canvas, status, probability, applyButton, dismissButton } = this.elements;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(this.image, 0, 0, canvas.width, canvas.height);

    this.drawBox(this.state.viewport, "#4cc2ff", 2);
    const [hx, hy] = this.rotationHandlePosition();
    ctx.beginPath();
    ctx.arc(hx, hy, 6, 0, Math.PI * 2);
    ctx.fillStyle = "#4cc2ff";
    ctx.fill();

    const suggestion = this.current?.suggestion ?? null;
    if (suggestion?.adjust) {
      this.drawBox(applySuggestion(this.state.viewport, suggestion), "#ffd24c", 1.5, [6, 4]);
      this.drawSuggestionMarker(suggestion);
      status.textContent = `suggest ${suggestion.kind} ${isRotation(suggestion.kind)
        ? (suggestion.magnitude * 180 / Math.PI).toFixed(1) + "°"
        : suggestion.magnitude.toFixed(1) + "%"}`;
      applyButton.disabled = false;
      dismissButton.disabled = false;
    } else if (suggestion) {
      status.textContent = "well composed";
      applyButton.disabled = true;
      dismissButton.disabled = false;
    } else {
      status.textContent = this.stale ? "suggestion stale (service unreachable)" : "…";
      applyButton.disabled = true;
      dismissButton.disabled = true;
    }
    probability.textContent = this.current
      ? `p(adjust) = ${this.current.suggestion_probability.toFixed(3)}`
      : "";

    this.renderPreview();
  }

  private drawBox(box: ViewBox, color: string, width: number, dash: number[] = []): void {
    const { canvas } = this.elements;
    const ctx = this.ctx;
    const corners = boxCorners(box);
    ctx.save();
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.setLineDash(dash);
    ctx.beginPath();
    corners.forEach(([x, y], i) => {
      const px = x * canvas.width;
      const py = y * canvas.height;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.stroke();
    ctx.restore();
  }

  private drawSuggestionMarker(suggestion: Suggestion & { adjust: true }): void {
    const { canvas } = this.elements;
    const ctx = this.ctx;
    const cx = this.state.viewport.cx * canvas.width;
    const cy = this.state.viewport.cy * canvas.height;
    ctx.save();
    ctx.strokeStyle = "#ffd24c";
    ctx.fillStyle = "#ffd24c";
    ctx.lineWidth = 3;
    const arrows: Partial<Record<string, [number, number]>> = {
      left: [-1, 0], right: [1, 0], up: [0, -1], down: [0, 1],
    };
    const dir = arrows[suggestion.kind];
    if (dir) {
      const len = 30;
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(cx + dir[0] * len, cy + dir[1] * len);
      ctx.stroke();
      ctx.beginPath();
      ctx.arc(cx + dir[0] * len, cy + dir[1] * len, 4, 0, Math.PI * 2);
      ctx.fill();
    } else {
      const glyphs: Partial<Record<typeof suggestion.kind, string>> = {
        zoom_in: "⊕", zoom_out: "⊖", clockwise: "↻", counter_clockwise: "↺",
      };
      const glyph = glyphs[suggestion.kind];
      ctx.font = "28px sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      ctx.fillText(glyph ?? "?", cx, cy);
    }
    ctx.restore();
  }

  /** Approximate crop preview via canvas transforms (display only). */
  private renderPreview(): void {
    const preview = this.elements.preview;
    const pctx = preview.getContext("2d")!;
    const box = this.state.viewport;
    pctx.save();
    pctx.fillStyle = "#000";
    pctx.fillRect(0, 0, preview.width, preview.height);
    pctx.translate(preview.width / 2, preview.height / 2);
    pctx.rotate(box.alpha);
    const scaleX = preview.width / (box.w * this.image.width);
    const scaleY = preview.height / (box.h * this.image.height);
    pctx.scale(scaleX, scaleY);
    pctx.drawImage(this.image, -box.cx * this.image.width, -box.cy * this.image.height);
    pctx.restore();
  }
}
