/** Page wiring: upload a source image, then drive the viewfinder. */
import { ApiClient } from "./api.js";
import { ViewportState } from "./history.js";
import { Viewfinder } from "./viewfinder.js";
const INITIAL_VIEWPORT = { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5, alpha: 0 };
function element(id) {
    const el = document.getElementById(id);
    if (!el)
        throw new Error(`missing element #${id}`);
    return el;
}
async function start() {
    const client = new ApiClient("");
    const fileInput = element("file");
    const errorBox = element("error");
    const healthy = await client.health();
    element("service").textContent = healthy ? "service: ok" : "service: unreachable";
    fileInput.addEventListener("change", async () => {
        const file = fileInput.files?.[0];
        if (!file)
            return;
        errorBox.textContent = "";
        try {
            const bitmap = await createImageBitmap(file);
            const { source_id } = await client.uploadSource(file, file.type || "image/png");
            element("source-id").textContent = `source ${source_id.slice(0, 12)}…`;
            const state = new ViewportState(source_id, INITIAL_VIEWPORT);
            new Viewfinder({
                canvas: element("stage"),
                preview: element("preview"),
                status: element("status"),
                probability: element("probability"),
                applyButton: element("apply"),
                dismissButton: element("dismiss"),
            }, client, bitmap, state);
        }
        catch (error) {
            errorBox.textContent = `upload failed: ${error instanceof Error ? error.message : error}`;
        }
    });
}
void start();
