import base64
import io
import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest
from PIL import Image

from viewadjust.adjuster import infer_suggestion, refine_iteratively
from viewadjust.config import ServiceConfig
from viewadjust.geometry import ViewBox
from viewadjust.imaging import decode_image_bytes, resize
from viewadjust.nn import TrunkSpec
from viewadjust.scorer import new_scorer, score
from viewadjust.service import SuggestionService, make_server
from viewadjust.synthetic import make_source, random_scene

from test_adjuster import scripted_model
from viewadjust.geometry import AdjustmentKind

TRUNK = TrunkSpec(input_size=8, channels=3, hidden=(16, 8))


def png_bytes(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.round(image * 255).astype(np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture(scope="module")
def server():
    adjuster = scripted_model(AdjustmentKind.RIGHT, 10.0, trunk=TRUNK)
    scorer = new_scorer(TRUNK, seed=1)
    service = SuggestionService(
        adjuster, scorer,
        ServiceConfig(max_image_bytes=200_000, source_cache_size=4),
        threshold=0.5,
    )
    httpd = make_server(service, "127.0.0.1", 0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, service
    httpd.shutdown()
    httpd.server_close()


def request(base, path, payload=None, raw=None, content_type="application/json", method=None):
    url = base + path
    if raw is not None:
        req = urllib.request.Request(url, data=raw, headers={"Content-Type": content_type})
    elif payload is not None:
        req = urllib.request.Request(
            url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
        )
    else:
        req = urllib.request.Request(url)
    if method:
        req.method = method
    with urllib.request.urlopen(req) as resp:
        return resp.status, json.loads(resp.read())


def request_error(base, path, **kwargs):
    try:
        request(base, path, **kwargs)
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())
    raise AssertionError("expected an HTTP error")


def test_health(server):
    base, _ = server
    status, obj = request(base, "/v1/health")
    assert status == 200
    assert obj == {"status": "ok"}


def test_upload_source_content_hash(server, rng):
    base, _ = server
    img = rng.uniform(size=(24, 24, 3))
    data = png_bytes(img)
    _, a = request(base, "/v1/sources", raw=data, content_type="image/png")
    _, b = request(base, "/v1/sources", raw=data, content_type="image/png")
    assert a["source_id"] == b["source_id"]

    # the same bytes uploaded as base64 JSON or multipart land on the same id
    _, c = request(base, "/v1/sources", payload={"image": base64.b64encode(data).decode()})
    assert c["source_id"] == a["source_id"]

    boundary = "boundary123"
    body = (
        f"--{boundary}\r\n"
        'Content-Disposition: form-data; name="image"; filename="x.png"\r\n'
        "Content-Type: image/png\r\n\r\n"
    ).encode() + data + f"\r\n--{boundary}--\r\n".encode()
    _, d = request(base, "/v1/sources", raw=body,
                   content_type=f"multipart/form-data; boundary={boundary}")
    assert d["source_id"] == a["source_id"]


def test_score_matches_offline(server, rng):
    base, service = server
    img = rng.uniform(size=(16, 16, 3))
    data = png_bytes(img)
    status, obj = request(base, "/v1/score", payload={"image": base64.b64encode(data).decode()})
    assert status == 200
    offline = score(service.scorer, resize(decode_image_bytes(data), 8, 8))
    assert obj["score"] == pytest.approx(offline, abs=1e-12)


def test_suggest_matches_offline_inference(server, rng):
    base, service = server
    img = rng.uniform(size=(20, 20, 3))
    data = png_bytes(img)
    status, obj = request(base, "/v1/suggest", payload={"image": base64.b64encode(data).decode()})
    assert status == 200
    offline = infer_suggestion(service.adjuster, resize(decode_image_bytes(data), 8, 8), 0.5)
    assert obj["suggestion"] == offline.to_json()
    assert 0.0 < obj["suggestion_probability"] < 1.0
    assert len(obj["adjustment_distribution"]) == 8
    assert sum(obj["adjustment_distribution"]) == pytest.approx(1.0, abs=1e-9)


def test_suggest_with_viewport(server, rng):
    base, _ = server
    gen = np.random.default_rng(5)
    image, _ = make_source(random_scene(gen, "full"), 64)
    _, up = request(base, "/v1/sources", raw=png_bytes(image), content_type="image/png")
    status, obj = request(base, "/v1/suggest", payload={
        "source_id": up["source_id"],
        "viewport": {"cx": 0.5, "cy": 0.5, "w": 0.5, "h": 0.5, "alpha": 0.0},
    })
    assert status == 200
    assert obj["suggestion"]["adjust"] is True  # scripted model always suggests


def test_refine_trajectory(server):
    base, service = server
    gen = np.random.default_rng(6)
    image, _ = make_source(random_scene(gen, "full"), 64)
    data = png_bytes(image)
    _, up = request(base, "/v1/sources", raw=data, content_type="image/png")
    viewport = {"cx": 0.3, "cy": 0.5, "w": 0.2, "h": 0.2, "alpha": 0.0}
    status, obj = request(base, "/v1/refine", payload={
        "source_id": up["source_id"], "viewport": viewport, "max_steps": 3,
    })
    assert status == 200
    trajectory = obj["trajectory"]
    assert 1 <= len(trajectory) <= 4

    offline = refine_iteratively(
        service.adjuster, decode_image_bytes(data), ViewBox.from_json(viewport), 3, 0.5
    )
    assert len(offline) == len(trajectory)
    for (box, sugg), entry in zip(offline, trajectory):
        assert entry["viewport"] == box.to_json()
        assert entry["suggestion"] == sugg.to_json()


def test_error_codes(server):
    base, _ = server
    code, body = request_error(base, "/v1/suggest", raw=b"{not json", content_type="application/json")
    assert code == 400 and "error" in body

    code, _ = request_error(base, "/v1/suggest", payload={"image": "!!!notbase64!!!"})
    assert code == 400

    code, _ = request_error(base, "/v1/refine", payload={
        "source_id": "feed" * 16, "viewport": {"cx": 0.5, "cy": 0.5, "w": 0.2, "h": 0.2, "alpha": 0},
    })
    assert code == 404

    code, _ = request_error(base, "/v1/nope", payload={})
    assert code == 404

    big = b"x" * 300_000  # over the configured 200 KB cap
    code, _ = request_error(base, "/v1/sources", raw=big, content_type="image/png")
    assert code == 413

    code, _ = request_error(base, "/v1/suggest", payload={"source_id": "zz", "viewport": {"cx": 1}})
    assert code in (400, 404)


def test_suggest_latency_under_one_second(server, rng):
    import time

    base, _ = server
    img = rng.uniform(size=(16, 16, 3))
    payload = {"image": base64.b64encode(png_bytes(img)).decode()}
    start = time.monotonic()
    status, _ = request(base, "/v1/suggest", payload=payload)
    elapsed = time.monotonic() - start
    assert status == 200
    assert elapsed < 1.0


def test_serves_frontend_statics(tmp_path):
    from viewadjust.service import SuggestionService, make_server as mk

    (tmp_path / "index.html").write_text("<html>viewfinder</html>")
    (tmp_path / "dist").mkdir()
    (tmp_path / "dist" / "main.js").write_text("console.log('hi')")
    service = SuggestionService(
        scripted_model(AdjustmentKind.RIGHT, 10.0, trunk=TRUNK),
        config=ServiceConfig(),
        frontend_dir=tmp_path,
    )
    httpd = mk(service, "127.0.0.1", 0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    try:
        with urllib.request.urlopen(base + "/") as resp:
            assert b"viewfinder" in resp.read()
        with urllib.request.urlopen(base + "/dist/main.js") as resp:
            assert resp.headers["Content-Type"] == "text/javascript"
        try:
            urllib.request.urlopen(base + "/../etc/passwd")
            raise AssertionError("expected 404")
        except urllib.error.HTTPError as exc:
            assert exc.code == 404
        with urllib.request.urlopen(base + "/v1/health") as resp:
            assert resp.status == 200
    finally:
        httpd.shutdown()
        httpd.server_close()


def test_concurrent_suggest(server, rng):
    base, _ = server
    img = rng.uniform(size=(12, 12, 3))
    payload = {"image": base64.b64encode(png_bytes(img)).decode()}
    results = []

    def hit():
        results.append(request(base, "/v1/suggest", payload=payload))

    threads = [threading.Thread(target=hit) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(results) == 8
    first = results[0][1]
    assert all(r[1] == first for r in results)
