/** Page wiring: upload a source image, then drive the viewfinder. */

import { ApiClient } from "./api.js";
import type { ViewBox } from "./geometry.js";
import { ViewportState } from "./history.js";
import { Viewfinder } from "./viewfinder.js";

const INITIAL_VIEWPORT: ViewBox = { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5, alpha: 0 };

function element<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

async function start(): Promise<void> {
  const client = new ApiClient("");
  const fileInput = element<HTMLInputElement>("file");
  const errorBox = element<HTMLElement>("error");

  const healthy = await client.health();
  element<HTMLElement>("service").textContent = healthy ? "service: ok" : "service: unreachable";

  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    errorBox.textContent = "";
    try {
      const bitmap = await createImageBitmap(file);
      const { source_id } = await client.uploadSource(file, file.type || "image/png");
      element<HTMLElement>("source-id").textContent = `source ${source_id.slice(0, 12)}…`;
      const state = new ViewportState(source_id, INITIAL_VIEWPORT);
      new Viewfinder(
        {
          canvas: element<HTMLCanvasElement>("stage"),
          preview: element<HTMLCanvasElement>("preview"),
          status: element<HTMLElement>("status"),
          probability: element<HTMLElement>("probability"),
          applyButton: element<HTMLButtonElement>("apply"),
          dismissButton: element<HTMLButtonElement>("dismiss"),
        },
        client,
        bitmap,
        state,
      );
    } catch (error) {
      errorBox.textContent = `upload failed: ${error instanceof Error ? error.message : error}`;
    }
  });
}

void start();
