"""Drive the HTTP service end to end, the way the browser UI does.

Starts the service in-process, creates a session, votes across three
iterations with idempotency nonces, reads the chart data, finalizes the
model, and samples fresh images from it. Everything lands in
demos/output/service-store/.
"""

from pathlib import Path

from fastapi.testclient import TestClient

from evoart.service import create_app

STORE = Path(__file__).parent / "output" / "service-store"

app = create_app(STORE)
with TestClient(app) as http:
    print("health:", http.get("/health").json())

    created = http.post(
        "/sessions", json={"n": 8, "width": 256, "height": 256, "master_seed": 99}
    ).json()
    sid = created["session"]
    print(f"session {sid}: generation 0 with "
          f"{len(created['generation']['individuals'])} individuals")

    for iteration in range(3):
        population = http.get(f"/sessions/{sid}/population").json()
        # vote for the two darkest prompts, like a user clicking favorites
        ranked = sorted(
            population["individuals"],
            key=lambda i: -i["chromosome"]["continuous"]["brightness"],
        )
        ballot = {ranked[0]["id"]: 2, ranked[1]["id"]: 1}
        reply = http.post(
            f"/sessions/{sid}/votes",
            json={"ballot": ballot, "nonce": f"demo-{iteration}"},
        ).json()
        brightness = reply["stats"]["bars"]["brightness"]
        print(f"iteration {iteration + 1}: brightness model mean -> {brightness['mean']:.2f}")

    stats = http.get(f"/sessions/{sid}/stats").json()
    print("stream series length:", len(next(iter(stats["stream"].values()))))

    finalized = http.post(f"/sessions/{sid}/finalize").json()
    model_path = STORE / "model.yaml"
    model_path.write_text(finalized["yaml"])
    print(f"finalized model -> {model_path}")

    samples = http.post(f"/sessions/{sid}/sample", json={"count": 2}).json()["samples"]
    for s in samples:
        image = http.get(s["image_url"])
        print(f"sampled {s['image_url']} ({len(image.content)} bytes): {s['prompt']}")

print("\nretry-safe: replaying a nonce returns the recorded response without evolving")
print(f"store (images + replayable session log) kept under {STORE}")
