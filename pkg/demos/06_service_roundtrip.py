#!/usr/bin/env python3
"""Boot the HTTP suggestion service in-process and talk to it.

Uploads a wide synthetic source image, asks for a suggestion on a viewport,
then runs the iterative /v1/refine loop. The same endpoints back the
interactive viewfinder frontend.
"""

import base64
import io
import json
import threading
import urllib.request

import numpy as np
from PIL import Image

from viewadjust.adjuster import AdjusterTrainConfig, train_adjuster
from viewadjust.config import ServiceConfig
from viewadjust.nn import TrunkSpec
from viewadjust.service import SuggestionService, make_server
from viewadjust.synthesis import synth_adjustment_dataset
from viewadjust.synthetic import make_source, random_scene

rng = np.random.default_rng(9)
trunk = TrunkSpec(input_size=16, channels=3, hidden=(64, 32))
items = [make_source(random_scene(rng, "full"), 64) for _ in range(40)]
labeled = synth_adjustment_dataset(items, rng, out_size=16)
model, _ = train_adjuster(
    labeled, [], AdjusterTrainConfig(learning_rate=1e-3, steps=800, seed=1), trunk
)
print("adjuster trained; starting service...")

service = SuggestionService(model, config=ServiceConfig())
server = make_server(service, "127.0.0.1", 0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"


def post(path, payload=None, raw=None, content_type="application/json"):
    data = raw if raw is not None else json.dumps(payload).encode()
    req = urllib.request.Request(base + path, data=data, headers={"Content-Type": content_type})
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


with urllib.request.urlopen(base + "/v1/health") as resp:
    print("health:", json.loads(resp.read()))

# upload a wide source image the viewfinder would pan around in
wide, _ = make_source(random_scene(np.random.default_rng(77), "full"), 96)
buf = io.BytesIO()
Image.fromarray(np.round(wide * 255).astype(np.uint8)).save(buf, format="PNG")
upload = post("/v1/sources", raw=buf.getvalue(), content_type="image/png")
print("uploaded source:", upload["source_id"][:16], "…")

viewport = {"cx": 0.35, "cy": 0.55, "w": 0.3, "h": 0.3, "alpha": 0.0}
suggestion = post("/v1/suggest", {"source_id": upload["source_id"], "viewport": viewport})
print("suggestion:", json.dumps(suggestion["suggestion"]))
print("probability:", round(suggestion["suggestion_probability"], 3))

refined = post("/v1/refine", {"source_id": upload["source_id"], "viewport": viewport, "max_steps": 3})
print(f"refine trajectory ({len(refined['trajectory'])} states):")
for entry in refined["trajectory"]:
    v = entry["viewport"]
    print(f"  ({v['cx']:.3f},{v['cy']:.3f},{v['w']:.3f}) -> {json.dumps(entry['suggestion'])}")

# the base64-field upload path lands on the same content-hash id
again = post("/v1/sources", {"image": base64.b64encode(buf.getvalue()).decode()})
print("re-upload via base64 gives the same id:", again["source_id"] == upload["source_id"])
server.shutdown()
